#pragma once

#include <string>
#include <vector>

#include "chainkit/json_io.hpp"
#include "chainkit/space.hpp"

namespace chainkit {

struct SuiteCheck {
  std::string name;
  bool passed = false;
  Json detail;
};

struct SuiteResult {
  std::string name;
  std::vector<SuiteCheck> checks;
  std::size_t sandwich_cases = 0;
  std::size_t sandwich_violations = 0;

  bool passed() const;
  Json to_json() const;
};

struct SandwichTally {
  std::size_t cases = 0;
  std::size_t violations = 0;
  double max_hop_excess = 0.0;  // max N_eps / ceil(d_eps / eps)
};

/// Lemma-style chain sandwich over every pair with finite d_eps, x != y.
SandwichTally sandwich_scan(const FiniteMetricMeasureSpace& space, const std::vector<double>& epsilons);

/// 0, h, 2h, ..., 1 snowflaked with exponent 2/beta.
FiniteMetricMeasureSpace snowflake_grid(double spacing = 0.01, double beta = 3.0);

std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name);

SuiteResult geodesic_suite();
SuiteResult snowflake_suite();
SuiteResult gasket_suite();
SuiteResult replay_suite();

}  // namespace chainkit
