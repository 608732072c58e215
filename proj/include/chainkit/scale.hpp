#pragma once

#include <string>
#include <utility>
#include <vector>

#include "chainkit/common.hpp"

namespace chainkit {

/// Space-time scale function Psi: a strictly increasing bijection of (0, inf)
/// together with claimed regularity constants (C, beta1, beta2) such that
///   C^-1 (R/r)^beta1 <= Psi(R)/Psi(r) <= C (R/r)^beta2   for 0 < r <= R.
class ScaleFunction {
 public:
  enum class Kind { Power, PiecewisePower, Tabulated };

  /// Psi(r) = r^beta.
  static ScaleFunction power(double beta);

  /// Segments (r_i, b_i) with r_0 = 0 < r_1 < ...; Psi(r) = r^b_0 on (0, r_1] and
  /// continues as Psi(r_i) (r / r_i)^b_i on [r_i, r_{i+1}].
  static ScaleFunction piecewise(std::vector<std::pair<double, double>> segments);

  /// Samples (r_i, Psi_i), strictly increasing in both; log-log linear between.
  static ScaleFunction tabulated(std::vector<double> r, std::vector<double> values);

  /// "power:BETA" | "piecewise:r1,b1;r2,b2;..." | "table:PATH.csv".
  static ScaleFunction parse(const std::string& spec);

  double operator()(double r) const;
  double inverse(double v) const;

  Kind kind() const { return kind_; }
  double beta() const { return beta_; }  // Power kind only
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }
  double regularity_constant() const { return c_reg_; }

  /// Overrides the claimed regularity constants.
  ScaleFunction with_regularity(double beta1, double beta2, double c_reg) const;

  /// Range of r on which Psi is represented; (0, inf) except for tabulated data.
  std::pair<double, double> domain() const;

  std::string describe() const;

 private:
  ScaleFunction() = default;

  Kind kind_ = Kind::Power;
  double beta_ = 2.0;
  std::vector<double> knots_;   // piecewise breakpoints / table abscissae
  std::vector<double> values_;  // Psi at knots
  std::vector<double> exps_;    // piecewise exponents
  double beta1_ = 2.0;
  double beta2_ = 2.0;
  double c_reg_ = 1.0;
};

struct GridOptions {
  int points_per_decade = 64;
};

/// Grid-verified (not proven) regularity certificate.
struct RegularityCertificate {
  bool ok = false;
  double best_constant = 1.0;  // smallest C making both bounds hold on the grid
  double claimed_constant = 1.0;
  double lower_exponent = 0.0;
  double upper_exponent = 0.0;
  std::size_t grid_points = 0;
};

RegularityCertificate verify_regularity(const ScaleFunction& psi, double r_min, double r_max,
                                        GridOptions grid = {});

/// Phi(s) = sup_{r>0} (s/r - 1/Psi(r)).
class PhiTransform {
 public:
  enum class Method { ClosedForm, NumericSup };

  explicit PhiTransform(ScaleFunction psi);
  PhiTransform(ScaleFunction psi, Method method);

  double operator()(double s) const;
  const ScaleFunction& source() const { return psi_; }
  Method method() const { return method_; }

 private:
  ScaleFunction psi_;
  Method method_;
};

/// Closed form for Psi(r) = r^beta, beta > 1:
/// Phi(s) = s^(beta/(beta-1)) beta^(-1/(beta-1)) (1 - 1/beta).
double phi_power_closed_form(double beta, double s);

/// Log-grid search followed by golden-section refinement.
double phi_numeric_sup(const ScaleFunction& psi, double s);

/// Regularity of Phi with exponents beta2/(beta2-1) (lower) and beta1/(beta1-1)
/// (upper). Requires beta1 > 1 for the source.
RegularityCertificate verify_phi_regularity(const PhiTransform& phi, double s_min, double s_max,
                                            GridOptions grid = {});

struct WalkDimensionCertificate {
  bool ok = false;
  double best_constant = 1.0;                // smallest C1 with Psi(r)/Psi(s) >= C1^-1 (r/s)^2
  double min_decade_exponent = kInfinity;  // smallest log-slope over decade-wide sub-windows
  double cap = 1e6;
};

/// Grid check of Psi(r)/Psi(s) >= C1^-1 (r/s)^2 on [r_min, r_max] inside (0, diam).
/// Fails when the best C1 exceeds the cap or when the growth exponent stays below
/// 2 across some decade of the window.
WalkDimensionCertificate walk_dimension_lower_check(const ScaleFunction& psi, double space_diameter,
                                                    double r_min, double r_max, double cap = 1e6,
                                                    GridOptions grid = {});

/// Geometric grid with the given density, always including both endpoints.
std::vector<double> log_grid(double lo, double hi, int points_per_decade);

}  // namespace chainkit
