#pragma once

#include <optional>
#include <vector>

#include "chainkit/common.hpp"
#include "chainkit/graph.hpp"
#include "chainkit/scale.hpp"
#include "chainkit/space.hpp"

namespace chainkit {

double energy(const GraphDirichletForm& form, const Vector& f);
double energy(const GraphDirichletForm& form, const Vector& f, const Vector& g);

/// Energy measure of f as a vertex density: each edge's energy w (f(x)-f(y))^2
/// is split evenly between its endpoints, gamma(x) = 1/2 sum_y w_xy (f(x)-f(y))^2.
/// Sum of gamma equals E(f, f), and sum_x g(x) gamma(x) = E(f, fg) - E(f^2, g)/2.
struct EnergyMeasure {
  Vector density;
  double total = 0.0;

  /// Gamma(f, f)(S) for a vertex set S.
  double mass(const std::vector<Index>& set) const;
};

EnergyMeasure energy_measure(const GraphDirichletForm& form, const Vector& f);

struct CapacityResult {
  double capacity = 0.0;
  Vector potential;  // 1 on A, 0 on B, harmonic elsewhere
};

/// Cap(A, B) = min E(f, f) over f = 1 on A, f = 0 on B; exact on finite graphs
/// via a sparse Cholesky solve of the Dirichlet problem. Components touching
/// neither set get a constant (zero) potential.
CapacityResult capacity(const GraphDirichletForm& form, const std::vector<Index>& A, const std::vector<Index>& B);

struct CapacityScanRow {
  Index center = 0;
  double radius = 0.0;
  double capacity = 0.0;
  double ball_mass = 0.0;
  double constant = 0.0;  // Cap * Psi(R) / m(B(x, R))
};

struct CapacityScanReport {
  double best_constant = 0.0;
  std::optional<CapacityScanRow> worst;
  std::vector<CapacityScanRow> rows;
  std::size_t excluded_radii = 0;  // radii outside (0, diam / A2)
};

/// Cap(B(x, R), B(x, A1 R)^c) against m(B(x, R)) / Psi(R), for every vertex and
/// each radius R < diam / A2. An empty complement gives capacity 0.
CapacityScanReport capacity_upper_scan(const MetricGraph& graph, const ScaleFunction& psi,
                                       const std::vector<double>& radii, double A1, double A2 = 1.0,
                                       const std::vector<Index>& centers = {});

/// M_R^m nu(x) = sup_{0<r<R} nu(B(x, r)) / m(B(x, r)), exact over critical radii.
double truncated_maximal(const FiniteMetricMeasureSpace& space, const Vector& nu, Index x, double R);

/// Optimal C in  int_{B(x,r)} (f - mean)^2 dm <= C Psi(r) Gamma(f,f)(B(x, A r)),
/// from a generalized eigenproblem on B(x, A r). Values of f outside B(x, A r)
/// enter Gamma only through boundary edges and are eliminated exactly.
/// Returns 0 when B(x, r) is a single point.
double poincare_constant(const MetricGraph& graph, const ScaleFunction& psi, Index x, double r, double A = 2.0);

struct TwoPointReport {
  double lhs = 0.0;        // |u(x) - u(y)|^2
  double rhs_core = 0.0;   // Psi(R) (M_R Gamma(u,u)(x) + M_R Gamma(u,u)(y))
  double ratio = 0.0;      // lhs / rhs_core; infinite when rhs_core == 0 < lhs
  double maximal_x = 0.0;
  double maximal_y = 0.0;
  double center_scale = kInfinity;  // R / d(x, y): x, y lie in B(x, R / C) for C below this
  bool unbounded = false;
};

TwoPointReport two_point_check(const MetricGraph& graph, const ScaleFunction& psi, const Vector& u, Index x, Index y,
                               double R);

}  // namespace chainkit
