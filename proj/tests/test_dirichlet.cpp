#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chainkit/dirichlet.hpp"

using namespace chainkit;

namespace {

GraphDirichletForm edge_graph(double w = 1.0) { return GraphDirichletForm(2, {{0, 1, w, 1.0}}); }

GraphDirichletForm random_graph(std::mt19937_64& rng, Index n, double p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedEdge> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 0.1 + u(rng), 1.0});
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 2; j < n; ++j)
      if (u(rng) < p) edges.push_back({i, j, 0.1 + u(rng), 1.0});
  Vector m(n);
  for (Index i = 0; i < n; ++i) m(i) = 0.5 + u(rng);
  return GraphDirichletForm(n, edges, m);
}

Vector random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

// Neumann path on k unit-mass vertices: the largest variance/energy ratio is 1/lambda_2.
double path_poincare_product(Index k) {
  const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(k)));
  return 1.0 / (4.0 * s * s);
}

}  // namespace

TEST_CASE("energy and energy measure on small graphs") {
  Vector f(2);
  f << 0, 1;
  CHECK(energy(edge_graph(), f) == 1.0);
  auto em = energy_measure(edge_graph(), f);
  CHECK(em.density(0) == 0.5);
  CHECK(em.density(1) == 0.5);
  CHECK(em.total == 1.0);

  Vector g(3);
  g << 0, 1, 2;
  const auto p3 = path_graph(3);
  CHECK(energy(p3, g) == 2.0);
  em = energy_measure(p3, g);
  CHECK(em.density(0) == 0.5);
  CHECK(em.density(1) == 1.0);
  CHECK(em.density(2) == 0.5);
  CHECK(em.mass({0, 1}) == 1.5);

  CHECK(energy(p3, Vector::Constant(3, 4.2)) == 0.0);
  CHECK(energy_measure(p3, Vector::Constant(3, 4.2)).density.isZero());
  CHECK_THROWS_AS(energy(p3, f), InputError);
}

TEST_CASE("energy measure identity on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto form = random_graph(rng, 12, 0.3);
    const Vector f = random_vector(rng, 12), g = random_vector(rng, 12);
    const auto em = energy_measure(form, f);
    const double lhs = g.dot(em.density);
    const Vector fg = f.cwiseProduct(g), f2 = f.cwiseProduct(f);
    const double rhs = energy(form, f, fg) - 0.5 * energy(form, f2, g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    CHECK(em.total == doctest::Approx(energy(form, f)).epsilon(1e-12));
    CHECK(energy(form, f, g) == doctest::Approx(energy(form, g, f)).epsilon(1e-12));
  }
}

TEST_CASE("capacity closed forms") {
  CHECK(capacity(edge_graph(), {0}, {1}).capacity == 1.0);
  CHECK(std::abs(capacity(path_graph(3), {0}, {2}).capacity - 0.5) <= 1e-12);

  // Series: 1 / sum(1 / c).
  const std::vector<double> c = {1.0, 2.0, 0.5, 4.0, 3.0};
  std::vector<WeightedEdge> series;
  double resistance = 0.0;
  for (Index i = 0; i < c.size(); ++i) {
    series.push_back({i, i + 1, c[i], 1.0});
    resistance += 1.0 / c[i];
  }
  CHECK(std::abs(capacity(GraphDirichletForm(6, series), {0}, {5}).capacity - 1.0 / resistance) <= 1e-12);

  // Parallel edges add.
  std::vector<WeightedEdge> parallel;
  double total = 0.0;
  for (double w : c) {
    parallel.push_back({0, 1, w, 1.0});
    total += w;
  }
  CHECK(std::abs(capacity(GraphDirichletForm(2, parallel), {0}, {1}).capacity - total) <= 1e-12);

  // Two series branches in parallel: 1/(1/1 + 1/2) + 1/(1/3 + 1/4).
  const GraphDirichletForm branches(4, {{0, 1, 1.0, 1.0}, {1, 3, 2.0, 1.0}, {0, 2, 3.0, 1.0}, {2, 3, 4.0, 1.0}});
  const double expected = 1.0 / 1.5 + 1.0 / (1.0 / 3 + 1.0 / 4);
  CHECK(std::abs(capacity(branches, {0}, {3}).capacity - expected) <= 1e-12);

  // Long path: 1 / length.
  CHECK(std::abs(capacity(path_graph(101), {0}, {100}).capacity - 0.01) <= 1e-12);
}

TEST_CASE("capacity potential and monotonicity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto form = random_graph(rng, 15, 0.2);
    const auto small = capacity(form, {0}, {14});
    const auto big = capacity(form, {0, 1, 2}, {14});
    const auto far = capacity(form, {0}, {13, 14});
    CHECK(small.capacity <= big.capacity * (1 + 1e-12));
    CHECK(small.capacity <= far.capacity * (1 + 1e-12));
    CHECK((small.potential.array() >= 0.0).all());
    CHECK((small.potential.array() <= 1.0).all());
    CHECK(small.potential(0) == 1.0);
    CHECK(small.potential(14) == 0.0);
    CHECK(small.capacity == doctest::Approx(energy(form, small.potential)).epsilon(1e-12));
    // The equilibrium potential minimises energy: perturbing free values cannot help.
    Vector h = random_vector(rng, 15) * 1e-3;
    h(0) = h(14) = 0.0;
    CHECK(energy(form, small.potential + h) >= small.capacity * (1 - 1e-12));
  }
}

TEST_CASE("capacity argument errors") {
  const auto p = path_graph(4);
  CHECK_THROWS_AS(capacity(p, {1}, {1, 2}), DomainError);
  CHECK_THROWS_AS(capacity(p, {}, {1}), DomainError);
  CHECK_THROWS_AS(capacity(p, {9}, {1}), InputError);
  // A component touching neither set keeps potential 0.
  const GraphDirichletForm split(4, {{0, 1, 1.0, 1.0}, {2, 3, 1.0, 1.0}});
  const auto c = capacity(split, {0}, {1});
  CHECK(c.capacity == 1.0);
  CHECK(c.potential(2) == 0.0);
  CHECK(c.potential(3) == 0.0);
}

TEST_CASE("capacity upper scan") {
  const auto g = make_metric_graph(path_graph(101));
  const auto psi = ScaleFunction::power(2);
  const auto rep = capacity_upper_scan(g, psi, {2, 4, 8, 16, 200}, 2.0);
  CHECK(rep.excluded_radii == 1);
  CHECK(rep.rows.size() == 101 * 4);
  CHECK(std::isfinite(rep.best_constant));
  // B(50, R) has 2R - 1 vertices; each side is a resistor of R + 1 unit edges up to distance 2R.
  for (const auto& row : rep.rows) {
    if (row.center != 50) continue;
    const double R = row.radius;
    CHECK(row.capacity == doctest::Approx(2.0 / (R + 1)).epsilon(1e-12));
    CHECK(row.constant == doctest::Approx(2.0 / (R + 1) * R * R / (2 * R - 1)).epsilon(1e-12));
  }
  // Ball complement empty: admissible f = 1 everywhere.
  const auto small = make_metric_graph(path_graph(5));
  const auto all = capacity_upper_scan(small, psi, {3}, 2.0, 1.0, {2});
  REQUIRE(all.rows.size() == 1);
  CHECK(all.rows[0].capacity == 0.0);

  const auto star = make_metric_graph(star_graph(20));
  const auto diag = capacity_upper_scan(star, psi, {1, 1.5}, 1.2);
  CHECK(diag.rows.size() == 21 * 2);
  CHECK(std::isfinite(diag.best_constant));
  CHECK_THROWS_AS(capacity_upper_scan(g, psi, {2}, 1.0), DomainError);
}

TEST_CASE("truncated maximal function") {
  const auto s = euclidean_space(line_coords(11));
  CHECK(truncated_maximal(s, s.measure(), 4, 3.0) == doctest::Approx(1.0));
  Vector delta = Vector::Zero(11);
  delta(0) = 1.0;
  CHECK(truncated_maximal(s, delta, 0, 5.0) == 1.0);
  CHECK(truncated_maximal(s, delta, 2, 5.0) == doctest::Approx(1.0 / 5.0));
  // Strict radius: B(2, r) for r <= 2 never reaches 0.
  CHECK(truncated_maximal(s, delta, 2, 2.0) == 0.0);
  CHECK(truncated_maximal(s, Vector::Zero(11), 3, 4.0) == 0.0);
  CHECK_THROWS_AS(truncated_maximal(s, delta, 0, 0.0), DomainError);
  CHECK_THROWS_AS(truncated_maximal(s, Vector::Zero(3), 0, 1.0), InputError);
}

TEST_CASE("Poincare constant") {
  const auto psi = ScaleFunction::power(2);
  const auto edge = make_metric_graph(edge_graph());
  // f = (0, 1): variance 1/2, energy 1.
  CHECK(poincare_constant(edge, psi, 0, 2.0, 1.0) * psi(2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(poincare_constant(edge, psi, 0, 1.0) == 0.0);

  const auto p21 = make_metric_graph(path_graph(21));
  for (Index x : {7, 8, 10, 12, 13}) {
    for (double r : {2.0, 3.0, 3.5}) {
      const auto k = ball(p21.space, x, r).size();
      CHECK(poincare_constant(p21, psi, x, r) * psi(r) == doctest::Approx(path_poincare_product(k)).epsilon(1e-10));
    }
  }
  // Near the end of the path the inner ball is still an interval.
  CHECK(poincare_constant(p21, psi, 0, 4.0) * 16.0 == doctest::Approx(path_poincare_product(4)).epsilon(1e-10));

  std::mt19937_64 rng(3);
  const double c = poincare_constant(p21, psi, 10, 4.0);
  const auto inner = ball(p21.space, 10, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector f = random_vector(rng, 21);
    double mean = 0.0;
    for (Index p : inner) mean += f(p);
    mean /= static_cast<double>(inner.size());
    double var = 0.0;
    for (Index p : inner) var += (f(p) - mean) * (f(p) - mean);
    const double gamma = energy_measure(p21.form, f).mass(ball(p21.space, 10, 8.0));
    CHECK(var <= c * psi(4.0) * gamma * (1 + 1e-10));
  }

  // The long edge leaves vertex 2 outside B(0, 2); its boundary edge is eliminated.
  const auto joined = make_metric_graph(GraphDirichletForm(3, {{0, 1, 1.0, 1.0}, {1, 2, 1.0, 5.0}}));
  CHECK(poincare_constant(joined, psi, 0, 2.0, 1.0) * 4.0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(poincare_constant(joined, psi, 0, 2.0, 0.5), DomainError);
}

TEST_CASE("two-point estimate") {
  const auto g = make_metric_graph(path_graph(21));
  const auto psi = ScaleFunction::power(2);
  auto rep = two_point_check(g, psi, Vector::Constant(21, 3.0), 0, 10, 20.0);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.ratio == 0.0);

  Vector u(21);
  for (Index i = 0; i < 21; ++i) u(i) = static_cast<double>(i);
  rep = two_point_check(g, psi, u, 0, 10, 20.0);
  // Gamma is 1/2 at both ends and 1 inside. From 0 the best ball is {0..19}: 19.5/20.
  // From 10 every ball below the whole path is interior: 1.
  CHECK(rep.lhs == 100.0);
  CHECK(rep.maximal_x == doctest::Approx(0.975).epsilon(1e-15));
  CHECK(rep.maximal_y == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rep.rhs_core == doctest::Approx(400.0 * 1.975).epsilon(1e-14));
  CHECK(rep.ratio == doctest::Approx(100.0 / 790.0).epsilon(1e-14));
  CHECK(rep.center_scale == 2.0);
  CHECK_FALSE(rep.unbounded);
}
