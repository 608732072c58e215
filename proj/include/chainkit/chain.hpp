#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "chainkit/common.hpp"
#include "chainkit/scale.hpp"
#include "chainkit/space.hpp"

namespace chainkit {

/// Graph on the points of a space whose edges are the admissible epsilon-chain
/// hops, {(i, j) : d(i, j) < eps} with strict inequality, weighted by d(i, j).
class ProximityIndex {
 public:
  struct Edge {
    Index to;
    double length;
  };

  ProximityIndex(const FiniteMetricMeasureSpace& space, double epsilon);

  const FiniteMetricMeasureSpace& space() const { return *space_; }
  double epsilon() const { return epsilon_; }
  const std::vector<Edge>& neighbors(Index i) const { return adj_[i]; }
  std::size_t edge_count() const;

  /// Dijkstra from a source: chain distances d_eps(source, .) with predecessors.
  std::pair<Vector, std::vector<Index>> chain_distances(Index source) const;

  /// Breadth-first hop counts N_eps(source, .) with predecessors (kNoChain if unreachable).
  std::pair<std::vector<std::size_t>, std::vector<Index>> hop_counts(Index source) const;

  /// Connected components as a label per point.
  std::vector<Index> components() const;
  bool connected() const;

 private:
  const FiniteMetricMeasureSpace* space_;
  double epsilon_;
  std::vector<std::vector<Edge>> adj_;
};

struct ChainPath {
  double length = kInfinity;
  std::vector<Index> points;  // empty when no chain exists
};

struct HopPath {
  std::size_t hops = kNoChain;
  std::vector<Index> points;
};

/// d_eps(x, y) with an optimal witness chain.
ChainPath chain_metric(const FiniteMetricMeasureSpace& space, double epsilon, Index x, Index y);

/// N_eps(x, y) with a witness chain of minimal hop count.
HopPath min_chain_count(const FiniteMetricMeasureSpace& space, double epsilon, Index x, Index y);

struct ChainAnalysis {
  Index x = 0;
  Index y = 0;
  double epsilon = 0.0;
  double d_eps = kInfinity;
  std::size_t n_eps = kNoChain;
  std::vector<Index> witness_metric;
  std::vector<Index> witness_hops;
};

ChainAnalysis analyze_chain(const ProximityIndex& index, Index x, Index y);
ChainAnalysis analyze_chain(const FiniteMetricMeasureSpace& space, double epsilon, Index x, Index y);

/// Sum of consecutive distances along a chain; throws if a hop is not < eps.
double chain_length(const FiniteMetricMeasureSpace& space, const std::vector<Index>& chain, double epsilon);

/// ceil(d_eps / eps) <= N_eps <= 9 ceil(d_eps / eps). Requires finite d_eps.
bool chain_sandwich_check(const ChainAnalysis& analysis);

/// ceil(d_eps / eps), guarded against rounding just above an integer.
std::size_t chain_ceiling(double d_eps, double epsilon);

struct MainInequalityRow {
  Index x = 0;
  Index y = 0;
  double epsilon = 0.0;
  double d = 0.0;
  double d_eps = kInfinity;
  std::size_t n_eps = kNoChain;
  double ratio = 0.0;  // (d_eps^2 / eps^2) / (Psi(d) / Psi(eps))
  bool sandwich_ok = true;
};

struct EpsilonTrend {
  double epsilon = 0.0;
  double max_functional = 0.0;  // max over pairs of Psi(eps) d_eps / eps
  std::size_t pairs = 0;
};

struct MainInequalityReport {
  double worst_ratio = 0.0;
  std::optional<MainInequalityRow> worst;
  std::vector<MainInequalityRow> rows;
  std::vector<EpsilonTrend> trend;
  std::size_t skipped_below_epsilon = 0;  // pairs with d(x, y) < eps
  std::size_t sandwich_violations = 0;
  double max_hop_excess = 0.0;  // max N_eps / ceil(d_eps / eps)
};

using PointPair = std::pair<Index, Index>;

std::vector<PointPair> all_pairs(const FiniteMetricMeasureSpace& space);

/// Evaluates the chain-length inequality ratio over pairs and scales. Throws
/// DomainError if an admissible pair has infinite d_eps.
MainInequalityReport main_inequality_scan(const FiniteMetricMeasureSpace& space, const ScaleFunction& psi,
                                          const std::vector<PointPair>& pairs,
                                          const std::vector<double>& epsilons);

struct ChainConditionEstimate {
  double k_hat = 1.0;
  std::optional<double> disconnected_at;  // first eps at which the proximity graph splits
  std::optional<PointPair> argmax;
  std::optional<double> argmax_epsilon;
};

/// max over pairs and eps of d_eps(x, y) / d(x, y).
ChainConditionEstimate chain_condition_estimate(const FiniteMetricMeasureSpace& space,
                                                const std::vector<double>& epsilons);

/// All-pairs d_eps as a matrix (one Dijkstra per source).
Matrix all_pairs_chain_metric(const ProximityIndex& index);

/// sup{eps in (0, diam] : (Psi(eps)/eps) d_eps(x, y) <= t}.
double epsilon_of_t(const FiniteMetricMeasureSpace& space, const ScaleFunction& psi, Index x, Index y, double t);

}  // namespace chainkit
