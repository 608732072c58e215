#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chainkit/common.hpp"

namespace chainkit {

enum class MetricKind { Explicit, Euclidean, Snowflake, GraphGeodesic };

std::string to_string(MetricKind kind);

/// How a distance matrix was produced. Coordinates are one point per row.
struct MetricDescriptor {
  MetricKind kind = MetricKind::Explicit;
  Matrix coords;      // Euclidean, Snowflake
  double beta = 2.0;  // Snowflake: d = |x - y|^(2/beta)
  Matrix matrix;      // Explicit
};

/// A finite metric measure space (X, d, m) with points 0..n-1.
/// Immutable after construction; the metric axioms are checked on entry.
class FiniteMetricMeasureSpace {
 public:
  FiniteMetricMeasureSpace(Matrix dist, Vector measure, MetricDescriptor provenance,
                           bool verify_triangle = true);

  Index size() const { return static_cast<Index>(dist_.rows()); }
  double distance(Index i, Index j) const { return dist_(i, j); }
  const Matrix& distances() const { return dist_; }
  double mass(Index i) const { return measure_(i); }
  const Vector& measure() const { return measure_; }
  double total_mass() const { return measure_.sum(); }
  const MetricDescriptor& provenance() const { return provenance_; }
  double diameter() const { return diameter_; }

  void check_id(Index i) const;

 private:
  Matrix dist_;
  Vector measure_;
  MetricDescriptor provenance_;
  double diameter_ = 0.0;
};

struct SpaceSpec {
  MetricDescriptor metric;
  Vector measure;  // empty means unit weights
  bool verify_triangle = true;
};

/// Threshold above which the O(n^3) triangle check may be skipped on request.
inline constexpr Index kTriangleCheckSkipThreshold = 1500;

FiniteMetricMeasureSpace build_space(const SpaceSpec& spec);

FiniteMetricMeasureSpace euclidean_space(const Matrix& coords, Vector measure = {});
FiniteMetricMeasureSpace snowflake_space(const Matrix& coords, double beta, Vector measure = {});
FiniteMetricMeasureSpace explicit_space(const Matrix& dist, Vector measure = {});

/// Unit-spaced points 0, h, 2h, ... on a line.
Matrix line_coords(Index n, double spacing = 1.0);

/// Open ball B(x, r) = {y : d(x, y) < r}, in ascending id order.
std::vector<Index> ball(const FiniteMetricMeasureSpace& space, Index x, double r);

/// m(B(x, r)).
double volume(const FiniteMetricMeasureSpace& space, Index x, double r);

/// Sorted distinct distances from x, starting with 0.
std::vector<double> critical_radii(const FiniteMetricMeasureSpace& space, Index x);

/// volumes[k] is V(x, r) for r just above radii[k], i.e. the mass of the
/// closed ball of radius radii[k]. V(x, .) is constant on (radii[k], radii[k+1]].
struct VolumeProfile {
  Index center = 0;
  std::vector<double> radii;
  std::vector<double> volumes;
};

VolumeProfile volume_profile(const FiniteMetricMeasureSpace& space, Index x);

/// Exact sup over x and r of m(B(x, 2r)) / m(B(x, r)).
double doubling_constant(const FiniteMetricMeasureSpace& space);

struct PerfectnessReport {
  bool holds_at_2 = true;
  std::optional<Index> worst_center;
  std::optional<double> worst_radius;  // first failing scale when !holds_at_2
  double best_constant = 1.0;          // holds for every C above this value
};

/// Scans r over (min positive distance from x, max distance from x] and checks
/// that B(x, r) != X implies B(x, r) \ B(x, r/2) is nonempty.
PerfectnessReport uniform_perfectness(const FiniteMetricMeasureSpace& space);

/// B(x, r) \ B(x, r/C) is nonempty.
bool annulus_nonempty(const FiniteMetricMeasureSpace& space, Index x, double r, double C = 2.0);

}  // namespace chainkit
