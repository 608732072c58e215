#include "chainkit/chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include "chainkit/parallel.hpp"

namespace chainkit {

ProximityIndex::ProximityIndex(const FiniteMetricMeasureSpace& space, double epsilon)
    : space_(&space), epsilon_(epsilon), adj_(space.size()) {
  if (!(epsilon > 0.0)) throw DomainError("chain scale epsilon must be positive");
  const Index n = space.size();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && space.distance(i, j) < epsilon) adj_[i].push_back({j, space.distance(i, j)});
}

std::size_t ProximityIndex::edge_count() const {
  std::size_t e = 0;
  for (const auto& a : adj_) e += a.size();
  return e / 2;
}

std::pair<Vector, std::vector<Index>> ProximityIndex::chain_distances(Index source) const {
  space_->check_id(source);
  const Index n = space_->size();
  Vector dist = Vector::Constant(n, kInfinity);
  std::vector<Index> pred(n, n);
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist(source) = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist(u)) continue;
    for (const auto& e : adj_[u]) {
      const double nd = d + e.length;
      // Ties keep the smaller predecessor id for reproducible witnesses.
      if (nd < dist(e.to) || (nd == dist(e.to) && u < pred[e.to])) {
        const bool improved = nd < dist(e.to);
        dist(e.to) = nd;
        pred[e.to] = u;
        if (improved) heap.emplace(nd, e.to);
      }
    }
  }
  return {dist, pred};
}

std::pair<std::vector<std::size_t>, std::vector<Index>> ProximityIndex::hop_counts(Index source) const {
  space_->check_id(source);
  const Index n = space_->size();
  std::vector<std::size_t> hops(n, kNoChain);
  std::vector<Index> pred(n, n);
  std::queue<Index> q;
  hops[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const Index u = q.front();
    q.pop();
    for (const auto& e : adj_[u]) {
      if (hops[e.to] == kNoChain) {
        hops[e.to] = hops[u] + 1;
        pred[e.to] = u;
        q.push(e.to);
      }
    }
  }
  return {hops, pred};
}

std::vector<Index> ProximityIndex::components() const {
  const Index n = space_->size();
  std::vector<Index> label(n, n);
  Index next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[s] != n) continue;
    std::vector<Index> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto& e : adj_[u])
        if (label[e.to] == n) {
          label[e.to] = next;
          stack.push_back(e.to);
        }
    }
    ++next;
  }
  return label;
}

bool ProximityIndex::connected() const {
  const auto label = components();
  return std::all_of(label.begin(), label.end(), [](Index l) { return l == 0; });
}

namespace {

std::vector<Index> unwind(const std::vector<Index>& pred, Index source, Index target) {
  const Index none = pred.size();
  std::vector<Index> path{target};
  for (Index v = target; v != source;) {
    v = pred[v];
    if (v == none) return {};
    path.push_back(v);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

ChainPath chain_metric(const FiniteMetricMeasureSpace& space, double epsilon, Index x, Index y) {
  space.check_id(y);
  const ProximityIndex idx(space, epsilon);
  const auto [dist, pred] = idx.chain_distances(x);
  ChainPath p;
  p.length = dist(y);
  if (std::isfinite(p.length)) p.points = unwind(pred, x, y);
  return p;
}

HopPath min_chain_count(const FiniteMetricMeasureSpace& space, double epsilon, Index x, Index y) {
  space.check_id(y);
  const ProximityIndex idx(space, epsilon);
  const auto [hops, pred] = idx.hop_counts(x);
  HopPath p;
  p.hops = hops[y];
  if (p.hops != kNoChain) p.points = unwind(pred, x, y);
  return p;
}

ChainAnalysis analyze_chain(const ProximityIndex& index, Index x, Index y) {
  index.space().check_id(y);
  ChainAnalysis a;
  a.x = x;
  a.y = y;
  a.epsilon = index.epsilon();
  const auto [dist, dpred] = index.chain_distances(x);
  const auto [hops, hpred] = index.hop_counts(x);
  a.d_eps = dist(y);
  a.n_eps = hops[y];
  if (std::isfinite(a.d_eps)) {
    a.witness_metric = unwind(dpred, x, y);
    a.witness_hops = unwind(hpred, x, y);
  }
  return a;
}

ChainAnalysis analyze_chain(const FiniteMetricMeasureSpace& space, double epsilon, Index x, Index y) {
  const ProximityIndex idx(space, epsilon);
  return analyze_chain(idx, x, y);
}

double chain_length(const FiniteMetricMeasureSpace& space, const std::vector<Index>& chain, double epsilon) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    const double d = space.distance(chain[i], chain[i + 1]);
    if (!(d < epsilon)) {
      std::ostringstream os;
      os << "hop " << chain[i] << " -> " << chain[i + 1] << " has length " << d << " >= eps " << epsilon;
      throw ConsistencyError(os.str());
    }
    total += d;
  }
  return total;
}

std::size_t chain_ceiling(double d_eps, double epsilon) {
  const double q = d_eps / epsilon;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

bool chain_sandwich_check(const ChainAnalysis& a) {
  if (!std::isfinite(a.d_eps) || a.n_eps == kNoChain)
    throw HypothesisError("chain sandwich requires a finite chain distance");
  const std::size_t c = chain_ceiling(a.d_eps, a.epsilon);
  return c <= a.n_eps && a.n_eps <= 9 * c;
}

std::vector<PointPair> all_pairs(const FiniteMetricMeasureSpace& space) {
  std::vector<PointPair> out;
  for (Index i = 0; i < space.size(); ++i)
    for (Index j = i + 1; j < space.size(); ++j) out.emplace_back(i, j);
  return out;
}

MainInequalityReport main_inequality_scan(const FiniteMetricMeasureSpace& space, const ScaleFunction& psi,
                                          const std::vector<PointPair>& pairs, const std::vector<double>& epsilons) {
  for (const auto& [x, y] : pairs) {
    space.check_id(x);
    space.check_id(y);
  }
  MainInequalityReport rep;
  for (double eps : epsilons) {
    const ProximityIndex idx(space, eps);
    // Group the pairs by source so each source runs one Dijkstra and one BFS.
    std::map<Index, std::vector<Index>> by_source;
    for (const auto& [x, y] : pairs) by_source[x].push_back(y);
    std::vector<Index> sources;
    for (const auto& kv : by_source) sources.push_back(kv.first);
    std::vector<std::vector<MainInequalityRow>> per_source(sources.size());
    std::vector<std::size_t> skipped(sources.size(), 0);
    const double psi_eps = psi(eps);
    parallel_for(sources.size(), [&](std::size_t s) {
      const Index x = sources[s];
      const auto [dist, dpred] = idx.chain_distances(x);
      const auto [hops, hpred] = idx.hop_counts(x);
      for (Index y : by_source.at(x)) {
        const double d = space.distance(x, y);
        if (d < eps) {
          ++skipped[s];
          continue;
        }
        MainInequalityRow row;
        row.x = x;
        row.y = y;
        row.epsilon = eps;
        row.d = d;
        row.d_eps = dist(y);
        row.n_eps = hops[y];
        if (!std::isfinite(row.d_eps)) {
          std::ostringstream os;
          os << "d_eps(" << x << ", " << y << ") is infinite at eps=" << eps;
          throw DomainError(os.str());
        }
        const double q = row.d_eps / eps;
        row.ratio = q * q / (psi(d) / psi_eps);
        const std::size_t c = chain_ceiling(row.d_eps, eps);
        row.sandwich_ok = c <= row.n_eps && row.n_eps <= 9 * c;
        per_source[s].push_back(row);
      }
    });
    EpsilonTrend trend;
    trend.epsilon = eps;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      rep.skipped_below_epsilon += skipped[s];
      for (const auto& row : per_source[s]) {
        ++trend.pairs;
        trend.max_functional = std::max(trend.max_functional, psi_eps * row.d_eps / eps);
        if (!row.sandwich_ok) ++rep.sandwich_violations;
        rep.max_hop_excess = std::max(
            rep.max_hop_excess, static_cast<double>(row.n_eps) / static_cast<double>(chain_ceiling(row.d_eps, eps)));
        if (!rep.worst || row.ratio > rep.worst_ratio) {
          rep.worst_ratio = row.ratio;
          rep.worst = row;
        }
        rep.rows.push_back(row);
      }
    }
    rep.trend.push_back(trend);
  }
  return rep;
}

Matrix all_pairs_chain_metric(const ProximityIndex& index) {
  const Index n = index.space().size();
  Matrix out(n, n);
  parallel_for(n, [&](std::size_t x) { out.row(x) = index.chain_distances(x).first.transpose(); });
  return out;
}

ChainConditionEstimate chain_condition_estimate(const FiniteMetricMeasureSpace& space,
                                                const std::vector<double>& epsilons) {
  ChainConditionEstimate est;
  for (double eps : epsilons) {
    const ProximityIndex idx(space, eps);
    if (!idx.connected()) {
      est.k_hat = kInfinity;
      est.disconnected_at = eps;
      return est;
    }
    const Matrix de = all_pairs_chain_metric(idx);
    for (Index i = 0; i < space.size(); ++i) {
      for (Index j = i + 1; j < space.size(); ++j) {
        const double k = de(i, j) / space.distance(i, j);
        if (k > est.k_hat || !est.argmax) {
          est.k_hat = std::max(est.k_hat, k);
          est.argmax = PointPair{i, j};
          est.argmax_epsilon = eps;
        }
      }
    }
  }
  return est;
}

double epsilon_of_t(const FiniteMetricMeasureSpace& space, const ScaleFunction& psi, Index x, Index y, double t) {
  space.check_id(x);
  space.check_id(y);
  if (!(t > 0.0)) throw DomainError("time must be positive");
  if (x == y) throw DomainError("epsilon_of_t needs distinct points");
  // Distinct positive distances delta_1 < ... < delta_K = diam. On (delta_k, delta_{k+1}]
  // the admissible hops are exactly d <= delta_k, so d_eps is constant there; past
  // diam every hop is admissible and d_eps = d(x, y).
  std::vector<double> delta;
  for (Index i = 0; i < space.size(); ++i)
    for (Index j = i + 1; j < space.size(); ++j) delta.push_back(space.distance(i, j));
  std::sort(delta.begin(), delta.end());
  delta.erase(std::unique(delta.begin(), delta.end()), delta.end());
  const double diam = space.diameter();

  auto g = [&](double e) { return psi(e) / e; };
  // Largest e in (lo, hi] with g(e) * D <= t, or nullopt.
  auto admissible_sup = [&](double lo, double hi, double D) -> std::optional<double> {
    if (!std::isfinite(D)) return std::nullopt;
    const double c = t / D;
    if (g(hi) <= c) return hi;
    if (lo > 0.0 && !(g(lo) < c)) return std::nullopt;
    double a = lo > 0.0 ? lo : hi * 1e-300, b = hi;
    if (lo <= 0.0) {
      // Walk down until g drops below the level; g -> 0 as e -> 0 when beta1 > 1.
      a = hi;
      for (int k = 0; k < 2000 && g(a) > c; ++k) a *= 0.5;
      if (g(a) > c) return std::nullopt;
    }
    for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
      const double m = 0.5 * (a + b);
      (g(m) <= c ? a : b) = m;
    }
    return a;
  };

  // Past diam every hop is admissible and d_eps = d(x, y); the result is capped at diam.
  if (g(diam) * space.distance(x, y) < t) return diam;
  for (std::size_t k = delta.size(); k-- > 0;) {
    const double hi = delta[k];
    const double lo = k == 0 ? 0.0 : delta[k - 1];
    const ProximityIndex idx(space, hi);
    const double D = idx.chain_distances(x).first(y);
    if (auto e = admissible_sup(lo, hi, D)) return *e;
  }
  throw DomainError("time below chain resolution: no eps satisfies (Psi(eps)/eps) d_eps <= t");
}

}  // namespace chainkit
