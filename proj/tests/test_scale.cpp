#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "chainkit/scale.hpp"

using namespace chainkit;

namespace {

// sup_r (s/r - 1/Psi(r)) by brute force over a fine log grid in r.
double phi_grid_oracle(const ScaleFunction& psi, double s) {
  double best = 0.0;
  const int n = 400000;
  const double a = std::log(1e-8), b = std::log(1e8);
  for (int k = 0; k <= n; ++k) {
    const double r = std::exp(a + (b - a) * k / n);
    best = std::max(best, s / r - 1.0 / psi(r));
  }
  return best;
}

}  // namespace

TEST_CASE("power scale values and inverse") {
  const auto p2 = ScaleFunction::power(2);
  CHECK(p2(3.0) == 9.0);
  CHECK(p2.inverse(9.0) == doctest::Approx(3.0).epsilon(1e-15));
  const auto pg = ScaleFunction::power(std::log(5.0) / std::log(2.0));
  CHECK(pg(2.0) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(pg.inverse(5.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(p2(0.0), DomainError);
  CHECK_THROWS_AS(p2.inverse(-1.0), DomainError);
  CHECK_THROWS_AS(ScaleFunction::power(0.0), DomainError);
}

TEST_CASE("piecewise scale is continuous and invertible") {
  const auto f = ScaleFunction::piecewise({{0, 2}, {1, 3}});
  CHECK(f(0.5) == doctest::Approx(0.25));
  CHECK(f(1.0) == doctest::Approx(1.0));
  CHECK(f(2.0) == doctest::Approx(8.0));
  CHECK(f.beta1() == 2.0);
  CHECK(f.beta2() == 3.0);
  for (double r : {0.01, 0.3, 1.0, 1.7, 40.0}) CHECK(f.inverse(f(r)) == doctest::Approx(r).epsilon(1e-13));
  CHECK_THROWS_AS(ScaleFunction::piecewise({{1, 2}}), InputError);
  CHECK_THROWS_AS(ScaleFunction::piecewise({{0, 2}, {1, 3}, {0.5, 2}}), InputError);
}

TEST_CASE("tabulated scale interpolates log-log and refuses extrapolation") {
  const auto f = ScaleFunction::tabulated({1, 10, 100}, {1, 100, 10000});
  CHECK(f(std::sqrt(10.0)) == doctest::Approx(10.0).epsilon(1e-13));
  CHECK(f.inverse(1000.0) == doctest::Approx(std::pow(10.0, 1.5)).epsilon(1e-13));
  CHECK(f.beta1() == doctest::Approx(2.0));
  CHECK_THROWS_AS(f(0.5), RangeError);
  CHECK_THROWS_AS(f(101.0), RangeError);
  CHECK_THROWS_AS(f.inverse(1e5), RangeError);
  CHECK_THROWS_AS(ScaleFunction::tabulated({1, 2}, {3, 2}), InputError);
}

TEST_CASE("parse scale specs") {
  CHECK(ScaleFunction::parse("power:2")(3.0) == 9.0);
  const auto pw = ScaleFunction::parse("piecewise:0,2;1,3");
  CHECK(pw.kind() == ScaleFunction::Kind::PiecewisePower);
  CHECK(pw(2.0) == doctest::Approx(8.0));
  CHECK_THROWS_AS(ScaleFunction::parse("power"), InputError);
  CHECK_THROWS_AS(ScaleFunction::parse("power:2x"), InputError);
  CHECK_THROWS_AS(ScaleFunction::parse("cubic:3"), InputError);
  CHECK_THROWS_AS(ScaleFunction::parse("table:/nonexistent/psi.csv"), InputError);

  const auto path = std::filesystem::temp_directory_path() / "chainkit_scale_table.csv";
  {
    std::ofstream out(path);
    out << "r,psi\n# comment\n1,1\n2,4\n4,16\n";
  }
  const auto t = ScaleFunction::parse("table:" + path.string());
  CHECK(t.kind() == ScaleFunction::Kind::Tabulated);
  CHECK(t(3.0) == doctest::Approx(9.0).epsilon(1e-13));
  std::filesystem::remove(path);
}

TEST_CASE("regularity certificates") {
  const auto p = ScaleFunction::power(2);
  auto c = verify_regularity(p, 1e-2, 1e2);
  CHECK(c.ok);
  CHECK(c.best_constant == doctest::Approx(1.0).epsilon(1e-12));

  const auto pw = ScaleFunction::piecewise({{0, 2}, {1, 3}});
  c = verify_regularity(pw, 1e-2, 1e2);
  CHECK(c.ok);
  CHECK(c.best_constant == doctest::Approx(1.0).epsilon(1e-12));

  c = verify_regularity(p.with_regularity(2.5, 2.5, 1.0), 1e-2, 1e2);
  CHECK_FALSE(c.ok);
  // Over four decades the missing half-exponent costs (10^4)^0.5.
  CHECK(c.best_constant == doctest::Approx(100.0).epsilon(1e-9));

  CHECK_THROWS_AS(p.with_regularity(3, 2, 1), DomainError);
  CHECK_THROWS_AS(p.with_regularity(2, 2, 0.5), DomainError);
  CHECK_THROWS_AS(verify_regularity(p, 2, 1), DomainError);
  const auto t = ScaleFunction::tabulated({1, 10}, {1, 100});
  CHECK_THROWS_AS(verify_regularity(t, 0.1, 10), RangeError);
}

TEST_CASE("Phi closed form examples") {
  CHECK(phi_power_closed_form(2, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(phi_power_closed_form(3, 3) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(phi_power_closed_form(2, 0), DomainError);
  CHECK_THROWS_AS(phi_power_closed_form(1, 1), DomainError);

  const PhiTransform phi(ScaleFunction::power(2));
  CHECK(phi.method() == PhiTransform::Method::ClosedForm);
  for (double d : {0.5, 3.0, 40.0})
    for (double t : {0.01, 1.0, 250.0}) {
      const double expected = d * d / (4 * t);
      CHECK(std::abs(t * phi(d / t) - expected) <= 1e-10 * expected);
    }
}

TEST_CASE("numeric Phi agrees with the closed form") {
  for (double beta : {1.5, 2.0, 2.5, 3.0, std::log(5.0) / std::log(2.0)}) {
    const PhiTransform numeric(ScaleFunction::power(beta), PhiTransform::Method::NumericSup);
    for (double s : log_grid(1e-3, 1e3, 8)) {
      const double exact = phi_power_closed_form(beta, s);
      CHECK(std::abs(numeric(s) - exact) <= 1e-6 * exact);
    }
  }
  CHECK_THROWS_AS(PhiTransform(ScaleFunction::piecewise({{0, 2}, {1, 3}}), PhiTransform::Method::ClosedForm),
                  DomainError);
  CHECK_THROWS_AS(phi_numeric_sup(ScaleFunction::power(0.8), 1.0), DomainError);
}

TEST_CASE("numeric Phi on a piecewise scale matches a grid search") {
  const auto psi = ScaleFunction::piecewise({{0, 2}, {1, 3}});
  const PhiTransform phi(psi);
  CHECK(phi.method() == PhiTransform::Method::NumericSup);
  for (double s : {1e-3, 0.1, 1.0, 2.0, 3.0, 10.0, 1e3}) {
    const double oracle = phi_grid_oracle(psi, s);
    CHECK(phi(s) >= oracle * (1 - 1e-12));
    CHECK(phi(s) == doctest::Approx(oracle).epsilon(1e-6));
  }
}

TEST_CASE("Phi is convex and scales like a power") {
  const PhiTransform phi(ScaleFunction::power(2.5));
  const auto g = log_grid(1e-2, 1e2, 16);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double a = g[i - 1], b = g[i], c = g[i + 1];
    const double interp = phi(a) + (phi(c) - phi(a)) * (b - a) / (c - a);
    CHECK(phi(b) <= interp * (1 + 1e-12));
  }
  const double e = 2.5 / 1.5;
  for (double s : g) CHECK(phi(3 * s) == doctest::Approx(std::pow(3.0, e) * phi(s)).epsilon(1e-12));
}

TEST_CASE("Phi regularity certificate") {
  for (double beta : {2.0, 2.5, 3.0}) {
    const PhiTransform phi(ScaleFunction::power(beta));
    const auto c = verify_phi_regularity(phi, 1e-3, 1e3);
    CHECK(c.ok);
    CHECK(c.best_constant <= 1.01);
    CHECK(c.lower_exponent == doctest::Approx(beta / (beta - 1)));
    CHECK(c.upper_exponent == doctest::Approx(beta / (beta - 1)));
  }
  const auto single = verify_phi_regularity(PhiTransform(ScaleFunction::power(3)), 2.0, 2.0);
  CHECK(single.ok);
  CHECK(single.grid_points == 1);
  CHECK(single.best_constant == 1.0);
  CHECK_THROWS_AS(verify_phi_regularity(PhiTransform(ScaleFunction::power(1.0), PhiTransform::Method::NumericSup), 1, 2),
                  HypothesisError);
}

TEST_CASE("walk dimension lower check") {
  CHECK(walk_dimension_lower_check(ScaleFunction::power(2), 1e4, 1, 1e3).ok);
  CHECK(walk_dimension_lower_check(ScaleFunction::power(2), 1e4, 1, 1e3).best_constant == doctest::Approx(1.0));
  CHECK(walk_dimension_lower_check(ScaleFunction::power(2.32), 1e4, 1, 1e3).ok);
  for (double lo : {1e-3, 1.0, 50.0}) {
    const auto c = walk_dimension_lower_check(ScaleFunction::power(1.5), 1e6, lo, 10 * lo);
    CHECK_FALSE(c.ok);
    CHECK(c.min_decade_exponent == doctest::Approx(1.5));
  }
  CHECK_THROWS_AS(walk_dimension_lower_check(ScaleFunction::power(2), 10, 1, 20), DomainError);
}

TEST_CASE("log grid endpoints") {
  const auto g = log_grid(1, 100, 4);
  CHECK(g.size() == 9);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == 100.0);
  CHECK(log_grid(2, 2, 3).size() == 1);
  CHECK_THROWS_AS(log_grid(0, 1, 3), DomainError);
}
