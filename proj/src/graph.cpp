#include "chainkit/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "chainkit/parallel.hpp"

namespace chainkit {

GraphDirichletForm::GraphDirichletForm(Index n, std::vector<WeightedEdge> edges, Vector measure)
    : edges_(std::move(edges)), measure_(std::move(measure)), adj_(n) {
  if (n == 0) throw InputError("graph must have at least one vertex");
  if (measure_.size() == 0) measure_ = Vector::Ones(n);
  if (static_cast<Index>(measure_.size()) != n) throw InputError("vertex measure length does not match vertex count");
  for (Index i = 0; i < n; ++i)
    if (!(measure_(i) > 0.0)) throw InputError("vertex measure must be positive");
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : edges_) {
    if (e.u >= n || e.v >= n) {
      std::ostringstream os;
      os << "edge (" << e.u << ", " << e.v << ") references a vertex outside 0.." << n - 1;
      throw InputError(os.str());
    }
    if (e.u == e.v) throw InputError("self-loops are not allowed");
    if (!(e.conductance >= 0.0) || !std::isfinite(e.conductance)) throw InputError("conductances must be nonnegative");
    if (!(e.length > 0.0)) throw InputError("edge lengths must be positive");
    adj_[e.u].push_back({e.v, e.conductance, e.length});
    adj_[e.v].push_back({e.u, e.conductance, e.length});
    trip.emplace_back(e.u, e.v, e.conductance);
    trip.emplace_back(e.v, e.u, e.conductance);
  }
  w_.resize(n, n);
  w_.setFromTriplets(trip.begin(), trip.end());
}

Vector GraphDirichletForm::degrees() const {
  Vector d = Vector::Zero(size());
  for (const auto& e : edges_) {
    d(e.u) += e.conductance;
    d(e.v) += e.conductance;
  }
  return d;
}

SparseMatrix GraphDirichletForm::laplacian() const {
  SparseMatrix l = -w_;
  const Vector d = degrees();
  for (Index i = 0; i < size(); ++i) l.coeffRef(i, i) += d(i);
  l.makeCompressed();
  return l;
}

std::vector<Index> GraphDirichletForm::components() const {
  const Index n = size();
  std::vector<Index> label(n, n);
  Index next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[s] != n) continue;
    std::vector<Index> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto& nb : adj_[u])
        if (nb.conductance > 0.0 && label[nb.to] == n) {
          label[nb.to] = next;
          stack.push_back(nb.to);
        }
    }
    ++next;
  }
  return label;
}

bool GraphDirichletForm::connected() const {
  const auto label = components();
  return std::all_of(label.begin(), label.end(), [](Index l) { return l == 0; });
}

Matrix GraphDirichletForm::geodesic_distances() const {
  const Index n = size();
  Matrix out(n, n);
  parallel_for(n, [&](std::size_t s) {
    Vector dist = Vector::Constant(n, kInfinity);
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist(s) = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist(u)) continue;
      for (const auto& nb : adj_[u]) {
        if (!(nb.conductance > 0.0)) continue;
        const double nd = d + nb.length;
        if (nd < dist(nb.to)) {
          dist(nb.to) = nd;
          heap.emplace(nd, nb.to);
        }
      }
    }
    out.row(s) = dist.transpose();
  });
  return out;
}

MetricGraph make_metric_graph(GraphDirichletForm form) {
  if (!form.connected()) throw InputError("graph-geodesic metric requires a connected graph");
  SpaceSpec spec;
  spec.metric.kind = MetricKind::GraphGeodesic;
  spec.metric.matrix = form.geodesic_distances();
  spec.measure = form.measure();
  // Shortest-path metrics satisfy the triangle inequality by construction.
  spec.verify_triangle = form.size() <= kTriangleCheckSkipThreshold;
  auto space = build_space(spec);
  return MetricGraph{std::move(form), std::move(space)};
}

GraphDirichletForm path_graph(Index n, double conductance) {
  std::vector<WeightedEdge> e;
  for (Index i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, conductance, 1.0});
  return GraphDirichletForm(n, std::move(e));
}

GraphDirichletForm cycle_graph(Index n, double conductance) {
  std::vector<WeightedEdge> e;
  for (Index i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, conductance, 1.0});
  return GraphDirichletForm(n, std::move(e));
}

GraphDirichletForm star_graph(Index leaves) {
  std::vector<WeightedEdge> e;
  for (Index i = 1; i <= leaves; ++i) e.push_back({0, i, 1.0, 1.0});
  return GraphDirichletForm(leaves + 1, std::move(e));
}

}  // namespace chainkit
