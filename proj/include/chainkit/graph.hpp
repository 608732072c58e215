#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "chainkit/common.hpp"
#include "chainkit/space.hpp"

namespace chainkit {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct WeightedEdge {
  Index u = 0;
  Index v = 0;
  double conductance = 1.0;
  double length = 1.0;
};

/// Dirichlet form of a finite weighted graph:
///   E(f, g) = 1/2 sum_{x,y} w_xy (f(x) - f(y)) (g(x) - g(y)),
/// on L^2 of a positive vertex measure m. Parallel edges add their conductances.
class GraphDirichletForm {
 public:
  struct Neighbor {
    Index to;
    double conductance;
    double length;
  };

  GraphDirichletForm(Index n, std::vector<WeightedEdge> edges, Vector measure = {});

  Index size() const { return static_cast<Index>(measure_.size()); }
  const Vector& measure() const { return measure_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(Index x) const { return adj_[x]; }
  const SparseMatrix& conductances() const { return w_; }

  /// Weighted degrees sum_y w_xy.
  Vector degrees() const;

  /// D - W.
  SparseMatrix laplacian() const;

  std::vector<Index> components() const;
  bool connected() const;

  /// Shortest-path distances with the per-edge lengths.
  Matrix geodesic_distances() const;

 private:
  std::vector<WeightedEdge> edges_;
  Vector measure_;
  std::vector<std::vector<Neighbor>> adj_;
  SparseMatrix w_;
};

/// A graph together with the metric measure space given by its geodesic metric
/// and vertex measure. Used wherever balls and energies are needed together.
struct MetricGraph {
  GraphDirichletForm form;
  FiniteMetricMeasureSpace space;
};

MetricGraph make_metric_graph(GraphDirichletForm form);

GraphDirichletForm path_graph(Index n, double conductance = 1.0);
GraphDirichletForm cycle_graph(Index n, double conductance = 1.0);
GraphDirichletForm star_graph(Index leaves);

}  // namespace chainkit
