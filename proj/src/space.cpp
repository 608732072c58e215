#include "chainkit/space.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "chainkit/parallel.hpp"

namespace chainkit {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Explicit: return "explicit";
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::Snowflake: return "snowflake";
    case MetricKind::GraphGeodesic: return "graph-geodesic";
  }
  return "unknown";
}

namespace {

void verify_metric(const Matrix& d, bool check_triangle) {
  const Index n = static_cast<Index>(d.rows());
  if (d.cols() != d.rows()) throw InputError("distance matrix must be square");
  for (Index i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) {
      std::ostringstream os;
      os << "distance matrix has nonzero diagonal at " << i;
      throw InputError(os.str());
    }
    for (Index j = i + 1; j < n; ++j) {
      if (!(d(i, j) > 0.0) || !std::isfinite(d(i, j))) {
        std::ostringstream os;
        os << "distance between distinct points " << i << " and " << j << " must be positive and finite";
        throw InputError(os.str());
      }
      if (d(i, j) != d(j, i)) {
        std::ostringstream os;
        os << "distance matrix is not symmetric at (" << i << ", " << j << ")";
        throw InputError(os.str());
      }
    }
  }
  if (!check_triangle) return;
  // Relative slack absorbs rounding in computed metrics (e.g. snowflake powers).
  const double slack = 1e-12 * d.maxCoeff();
  // Column k of d plus d(i, k) bounds column i; the matrix is symmetric so
  // columns are contiguous rows.
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < n; ++k) {
      const Eigen::Array<bool, Eigen::Dynamic, 1> bad = d.col(i).array() > d.col(k).array() + (d(i, k) + slack);
      if (!bad.any()) continue;
      Index j = 0;
      while (!bad(j)) ++j;
      std::ostringstream os;
      os.precision(17);
      os << "triangle inequality violated for triple (" << i << ", " << k << ", " << j << "): d(" << i << "," << j
         << ")=" << d(i, j) << " > d(" << i << "," << k << ")+d(" << k << "," << j << ")=" << d(i, k) + d(k, j);
      throw InputError(os.str());
    }
  }
}

Matrix pairwise_euclidean(const Matrix& coords) {
  const Index n = static_cast<Index>(coords.rows());
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (coords.row(i) - coords.row(j)).norm();
  return d;
}

}  // namespace

FiniteMetricMeasureSpace::FiniteMetricMeasureSpace(Matrix dist, Vector measure, MetricDescriptor provenance,
                                                   bool verify_triangle)
    : dist_(std::move(dist)), measure_(std::move(measure)), provenance_(std::move(provenance)) {
  const Index n = static_cast<Index>(dist_.rows());
  if (n == 0) throw InputError("space must contain at least one point");
  if (measure_.size() == 0) measure_ = Vector::Ones(n);
  if (static_cast<Index>(measure_.size()) != n) throw InputError("measure length does not match number of points");
  for (Index i = 0; i < n; ++i) {
    if (!(measure_(i) > 0.0) || !std::isfinite(measure_(i))) {
      std::ostringstream os;
      os << "measure weight of point " << i << " must be positive, got " << measure_(i);
      throw InputError(os.str());
    }
  }
  bool check = verify_triangle;
  if (!check && n <= kTriangleCheckSkipThreshold) check = true;
  if (!check) std::cerr << "warning: skipping triangle-inequality verification for n=" << n << "\n";
  verify_metric(dist_, check);
  diameter_ = dist_.maxCoeff();
}

void FiniteMetricMeasureSpace::check_id(Index i) const {
  if (i >= size()) {
    std::ostringstream os;
    os << "unknown point id " << i << " (space has " << size() << " points)";
    throw InputError(os.str());
  }
}

FiniteMetricMeasureSpace build_space(const SpaceSpec& spec) {
  const MetricDescriptor& m = spec.metric;
  Matrix dist;
  switch (m.kind) {
    case MetricKind::Explicit:
      dist = m.matrix;
      break;
    case MetricKind::Euclidean:
      dist = pairwise_euclidean(m.coords);
      break;
    case MetricKind::Snowflake: {
      if (!(m.beta >= 2.0)) throw DomainError("snowflake exponent 2/beta must lie in (0, 1]; need beta >= 2");
      const double p = 2.0 / m.beta;
      dist = pairwise_euclidean(m.coords).unaryExpr([p](double v) { return v == 0.0 ? 0.0 : std::pow(v, p); });
      break;
    }
    case MetricKind::GraphGeodesic:
      if (m.matrix.size() == 0) throw InputError("graph-geodesic descriptor requires a distance matrix");
      dist = m.matrix;
      break;
  }
  return FiniteMetricMeasureSpace(std::move(dist), spec.measure, m, spec.verify_triangle);
}

FiniteMetricMeasureSpace euclidean_space(const Matrix& coords, Vector measure) {
  SpaceSpec spec;
  spec.metric.kind = MetricKind::Euclidean;
  spec.metric.coords = coords;
  spec.measure = std::move(measure);
  return build_space(spec);
}

FiniteMetricMeasureSpace snowflake_space(const Matrix& coords, double beta, Vector measure) {
  SpaceSpec spec;
  spec.metric.kind = MetricKind::Snowflake;
  spec.metric.coords = coords;
  spec.metric.beta = beta;
  spec.measure = std::move(measure);
  return build_space(spec);
}

FiniteMetricMeasureSpace explicit_space(const Matrix& dist, Vector measure) {
  SpaceSpec spec;
  spec.metric.kind = MetricKind::Explicit;
  spec.metric.matrix = dist;
  spec.measure = std::move(measure);
  return build_space(spec);
}

Matrix line_coords(Index n, double spacing) {
  Matrix c(n, 1);
  for (Index i = 0; i < n; ++i) c(i, 0) = spacing * static_cast<double>(i);
  return c;
}

std::vector<Index> ball(const FiniteMetricMeasureSpace& space, Index x, double r) {
  space.check_id(x);
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  std::vector<Index> out;
  for (Index y = 0; y < space.size(); ++y)
    if (space.distance(x, y) < r) out.push_back(y);
  return out;
}

double volume(const FiniteMetricMeasureSpace& space, Index x, double r) {
  space.check_id(x);
  double v = 0.0;
  for (Index y = 0; y < space.size(); ++y)
    if (space.distance(x, y) < r) v += space.mass(y);
  return v;
}

std::vector<double> critical_radii(const FiniteMetricMeasureSpace& space, Index x) {
  space.check_id(x);
  std::vector<double> r(space.size());
  for (Index y = 0; y < space.size(); ++y) r[y] = space.distance(x, y);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

VolumeProfile volume_profile(const FiniteMetricMeasureSpace& space, Index x) {
  space.check_id(x);
  std::vector<std::pair<double, double>> dm(space.size());
  for (Index y = 0; y < space.size(); ++y) dm[y] = {space.distance(x, y), space.mass(y)};
  std::sort(dm.begin(), dm.end());
  VolumeProfile p;
  p.center = x;
  double acc = 0.0;
  for (std::size_t k = 0; k < dm.size(); ++k) {
    acc += dm[k].second;
    if (k + 1 == dm.size() || dm[k + 1].first != dm[k].first) {
      p.radii.push_back(dm[k].first);
      p.volumes.push_back(acc);
    }
  }
  return p;
}

namespace {

// Sorted distances from x with cumulative masses, for O(log n) open-ball volumes.
struct RadialIndex {
  std::vector<double> dist;
  std::vector<double> cum;  // cum[k] = mass of the first k points

  RadialIndex(const FiniteMetricMeasureSpace& space, Index x) {
    std::vector<std::pair<double, double>> dm(space.size());
    for (Index y = 0; y < space.size(); ++y) dm[y] = {space.distance(x, y), space.mass(y)};
    std::sort(dm.begin(), dm.end());
    dist.resize(dm.size());
    cum.assign(dm.size() + 1, 0.0);
    for (std::size_t k = 0; k < dm.size(); ++k) {
      dist[k] = dm[k].first;
      cum[k + 1] = cum[k] + dm[k].second;
    }
  }

  double open_volume(double r) const {
    const auto k = std::lower_bound(dist.begin(), dist.end(), r) - dist.begin();
    return cum[static_cast<std::size_t>(k)];
  }
};

}  // namespace

double doubling_constant(const FiniteMetricMeasureSpace& space) {
  const Index n = space.size();
  std::vector<double> per_center(n, 1.0);
  parallel_for(n, [&](std::size_t x) {
    const RadialIndex idx(space, x);
    // V(x, r) and V(x, 2r) are left-continuous steps breaking at d_k and d_k / 2;
    // the ratio is constant between consecutive breakpoints and attains its
    // value at the right end, so evaluating at every breakpoint is exact.
    double best = 1.0;
    for (double d : idx.dist) {
      if (d <= 0.0) continue;
      for (double r : {d, d / 2.0}) {
        const double ratio = idx.open_volume(2.0 * r) / idx.open_volume(r);
        best = std::max(best, ratio);
      }
    }
    per_center[x] = best;
  });
  return *std::max_element(per_center.begin(), per_center.end());
}

bool annulus_nonempty(const FiniteMetricMeasureSpace& space, Index x, double r, double C) {
  space.check_id(x);
  for (Index y = 0; y < space.size(); ++y) {
    const double d = space.distance(x, y);
    if (d < r && d >= r / C) return true;
  }
  return false;
}

PerfectnessReport uniform_perfectness(const FiniteMetricMeasureSpace& space) {
  PerfectnessReport rep;
  for (Index x = 0; x < space.size(); ++x) {
    const auto radii = critical_radii(space, x);
    // radii[0] == 0. For r in (radii[j], radii[j+1]] the ball is the closed ball
    // of radius radii[j]; its farthest point is radii[j], so the annulus at
    // scale C is nonempty iff radii[j+1] / C <= radii[j] (worst at r = radii[j+1]).
    for (std::size_t j = 1; j + 1 < radii.size(); ++j) {
      const double ratio = radii[j + 1] / radii[j];
      rep.best_constant = std::max(rep.best_constant, ratio);
      if (ratio > 2.0 && rep.holds_at_2) {
        rep.holds_at_2 = false;
        rep.worst_center = x;
        rep.worst_radius = radii[j + 1];
      }
    }
  }
  return rep;
}

}  // namespace chainkit
