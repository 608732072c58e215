#pragma once

#include <optional>
#include <vector>

#include "chainkit/common.hpp"
#include "chainkit/graph.hpp"
#include "chainkit/scale.hpp"
#include "chainkit/space.hpp"

namespace chainkit {

/// Spectral data of L = M^-1 (D - W): eigenvalues ascending and eigenfunctions
/// orthonormal in L^2(m), so p_t(x, y) = sum_k exp(-lambda_k t) phi_k(x) phi_k(y).
struct HeatSpectrum {
  Vector eigenvalues;
  Matrix eigenfunctions;  // column k is phi_k
  Vector measure;

  Matrix kernel(double t) const;
  /// Rows of p_t for the given sources only.
  Matrix rows(double t, const std::vector<Index>& sources) const;
};

inline constexpr Index kMaxSpectralVertices = 3000;

HeatSpectrum heat_spectrum(const GraphDirichletForm& form);

/// p_t by uniformization: with q = max deg/m and N = q I - M^-1 (D - W) >= 0,
/// exp(-t M^-1 (D - W)) = e^{-qt} exp(tN), evaluated by a positive Taylor series
/// and repeated squaring. Every step adds nonnegative terms, so tiny entries keep
/// full relative accuracy where the spectral sum returns rounding noise.
Matrix uniformized_kernel(const GraphDirichletForm& form, double t);

enum class HeatMethod { Spectral, Uniformized };

struct HeatKernelTable {
  HeatMethod method = HeatMethod::Spectral;
  std::vector<double> times;
  std::vector<Index> sources;   // row i of each kernel is p_t(sources[i], .)
  std::vector<Matrix> kernels;  // one per time
  Vector measure;
  std::size_t components = 1;

  Index row_of(Index x) const;
  double value(std::size_t time_index, Index x, Index y) const { return kernels[time_index](row_of(x), y); }
  bool full() const { return sources.size() == static_cast<std::size_t>(measure.size()); }
};

/// Kernels over a time grid. Empty `sources` means every vertex. Disconnected
/// graphs are accepted with a warning; cross-component entries are zero.
HeatKernelTable heat_kernel(const GraphDirichletForm& form, std::vector<double> times,
                            HeatMethod method = HeatMethod::Spectral, std::vector<Index> sources = {});

struct HeatInvariantReport {
  double symmetry_error = 0.0;       // max |p_t(x,y) - p_t(y,x)|
  double stochasticity_error = 0.0;  // max |sum_y p_t(x,y) m(y) - 1|
  double semigroup_error = 0.0;      // max |p_{t+s} - p_t M p_s|
  double min_value = kInfinity;      // smallest same-component entry
  bool symmetric = false;
  bool stochastic = false;
  bool semigroup = false;
  bool positive = false;

  bool ok() const { return symmetric && stochastic && semigroup && positive; }
};

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kStochasticTolerance = 1e-10;
inline constexpr double kSemigroupTolerance = 1e-9;
/// The spectral sum carries rounding noise of order 1e-16 in entries that are
/// mathematically tiny; it is only required to be nonnegative up to this slack.
inline constexpr double kSpectralPositivitySlack = 1e-12;

/// Semigroup pairs are (t, t) and (t_i, t_{i+1}); p_{t+s} is recomputed with the
/// table's method. Requires a full table.
HeatInvariantReport check_heat_invariants(const GraphDirichletForm& form, const HeatKernelTable& table);

struct SubGaussianFitOptions {
  double beta_min = 1.8;
  double beta_max = 3.2;
  double beta_step = 0.01;
  double min_distance = 2.0;
  double max_distance_fraction = 0.45;  // of the diameter, keeps clear of finite-size wrap-around
  bool distance_below_time = true;      // d <= t drops the Poisson regime of short times
  double log_ratio_min = -25.0;
  double log_ratio_max = -0.5;
  double min_time_decades = 2.0;
  double min_distance_decades = 1.0;
};

struct SubGaussianFit {
  double beta = 0.0;
  double scale_c = 0.0;    // c in exp(-(d^beta / (c t))^{1/(beta-1)})
  double slope_b = 0.0;    // coefficient of (d^beta/t)^{1/(beta-1)}
  double intercept = 0.0;
  double c_lower = 0.0;    // p_t(x,y) / p_t(x,x) >= c_lower exp(-b z) on all samples
  double C_upper = 0.0;    // p_t(x,y) / p_t(x,x) <= C_upper exp(-b z)
  double residual_rms = 0.0;
  double diagonal_slope = 0.0;  // d log p_t(x,x) / d log t
  std::size_t samples = 0;
  double time_decades = 0.0;
  double distance_decades = 0.0;
  std::vector<std::pair<double, double>> residual_curve;  // (beta, rms)
};

/// Two-stage fit. V(x, Psi^-1(t)) is represented by 1 / p_t(x, x), so stage (ii)
/// regresses log(p_t(x,y) / p_t(x,x)) = a - b (d^beta / t)^{1/(beta-1)} for every
/// candidate beta and keeps the one with the smallest residual.
SubGaussianFit sub_gaussian_fit(const HeatKernelTable& table, const FiniteMetricMeasureSpace& space,
                                const SubGaussianFitOptions& options = {});

struct ChainingRow {
  std::size_t n = 0;
  double hop = 0.0;          // max distance between consecutive chain points
  double radius = 0.0;       // rho = C (t/n)^{1/beta} / 2
  bool admissible = false;   // hop <= C (t/n)^{1/beta} / 2
  double log_restricted = -kInfinity;     // log S_n, Chapman-Kolmogorov sum over the balls
  double log_near_diagonal = -kInfinity;  // log L_n, product of ball-to-ball minima (admissible only)
  bool below_kernel = true;
};

struct ChainingReport {
  Index x = 0;
  Index y = 0;
  double t = 0.0;
  double log_kernel = -kInfinity;
  std::vector<ChainingRow> rows;
  std::optional<std::size_t> best_n;  // maximiser of L_n
  double log_best = -kInfinity;
  double log_single_step = -kInfinity;  // L_1
  bool all_below_kernel = true;

  /// log(max_n L_n / L_1); infinite when the single step is inadmissible.
  double log_gain() const;
};

struct NearDiagonal {
  double C = 10.0;
  double beta = 2.0;
};

/// Chapman-Kolmogorov chaining along `path` (a chain from x to y, e.g. a geodesic
/// witness): chain points x_i sit evenly along the path, intermediate points range
/// over B(x_i, rho). S_n restricts the n-fold kernel to those balls; L_n bounds each
/// factor of S_n by its minimum over the ball pair, the discrete near-diagonal lower
/// bound. Both are lower bounds for p_t(x, y), with S_1 = L_1 = p_t(x, y) when the
/// single step is admissible. Kernels come from the uniformized method.
ChainingReport chaining_lower_bound(const MetricGraph& graph, const std::vector<Index>& path, double t,
                                    const std::vector<std::size_t>& steps, NearDiagonal near_diag = {});

struct GeneralizedEstimateRow {
  Index x = 0;
  Index y = 0;
  double t = 0.0;
  double kernel = 0.0;
  double epsilon = 0.0;          // eps(t, x, y)
  double d_eps = 0.0;
  double volume = 0.0;           // V(x, Psi^-1(t))
  double exponent = 0.0;         // t Phi(d_eps / t)
  double log_kernel_volume = 0.0;  // log(p_t V)
};

struct GeneralizedEstimateConstants {
  double c = 1.0;
  double upper = 0.0;  // p_t <= upper / V exp(-c tPhi)
  double lower = 0.0;  // p_t >= 1 / (lower V) exp(-c tPhi)
};

struct GeneralizedEstimateScan {
  std::vector<GeneralizedEstimateRow> rows;
  std::vector<GeneralizedEstimateConstants> family;  // one entry per exponent constant c
};

GeneralizedEstimateRow generalized_estimate_eval(const HeatKernelTable& table, std::size_t time_index,
                                                 const FiniteMetricMeasureSpace& space, const ScaleFunction& psi,
                                                 Index x, Index y);

GeneralizedEstimateScan generalized_estimate_scan(const HeatKernelTable& table, const FiniteMetricMeasureSpace& space,
                                                  const ScaleFunction& psi, const std::vector<std::pair<Index, Index>>& pairs,
                                                  const std::vector<double>& exponent_constants = {0.125, 0.25, 0.5, 1, 2, 4, 8});

/// E_p[tau_{B(x, r)}] for every start p: solves (D - W) E = m on the ball with E = 0
/// outside. Throws DomainError when the ball is the whole graph.
Vector exit_time_profile(const MetricGraph& graph, Index x, double r);
double mean_exit_time(const MetricGraph& graph, Index x, double r);

struct ExitTimeRow {
  Index center = 0;
  double radius = 0.0;
  double exit_time = 0.0;
};

struct ExitTimeEstimate {
  double beta_hat = 0.0;  // per-centre demeaned (fixed-effects) slope of log E vs log r
  std::vector<ExitTimeRow> rows;
  std::size_t excluded = 0;  // (centre, radius) pairs whose ball is the whole graph
  std::size_t centers_used = 0;
};

ExitTimeEstimate exit_time_walk_dimension(const MetricGraph& graph, const std::vector<Index>& centers,
                                          const std::vector<double>& radii);

struct GasketGraph {
  GraphDirichletForm form;
  Matrix coords;  // planar embedding, unit edge length
};

inline constexpr int kMaxGasketLevel = 8;

/// Level-k Sierpinski gasket approximation: (3^{k+1} + 3) / 2 vertices, 3^{k+1}
/// unit-conductance edges, unit vertex measure.
GasketGraph sierpinski_gasket_graph(int level);

}  // namespace chainkit
