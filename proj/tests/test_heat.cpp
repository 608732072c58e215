#include <doctest.h>

#include <cmath>
#include <random>

#include "chainkit/heat.hpp"
#include "oracles.hpp"

using namespace chainkit;

namespace {

Matrix dense_conductances(const GraphDirichletForm& form) { return Matrix(form.conductances()); }

}  // namespace

TEST_CASE("single vertex kernel") {
  const GraphDirichletForm one(1, {});
  const auto table = heat_kernel(one, {0.5, 3.0});
  CHECK(table.value(0, 0, 0) == doctest::Approx(1.0));
  CHECK(table.value(1, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("two-vertex closed form") {
  const GraphDirichletForm edge(2, {{0, 1, 1.0, 1.0}});
  const auto spec = heat_spectrum(edge);
  CHECK(spec.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(spec.eigenvalues(1) == doctest::Approx(2.0).epsilon(1e-14));
  for (auto method : {HeatMethod::Spectral, HeatMethod::Uniformized}) {
    const auto table = heat_kernel(edge, {0.1, 1.0, 7.0}, method);
    for (std::size_t i = 0; i < table.times.size(); ++i) {
      const double e = std::exp(-2 * table.times[i]);
      CHECK(table.value(i, 0, 0) == doctest::Approx((1 + e) / 2).epsilon(1e-13));
      CHECK(table.value(i, 0, 1) == doctest::Approx((1 - e) / 2).epsilon(1e-13));
    }
  }
}

TEST_CASE("cycle kernel matches the Bessel series") {
  const auto form = cycle_graph(30);
  const auto table = heat_kernel(form, {0.5, 2.0, 10.0, 40.0});
  for (std::size_t i = 0; i < table.times.size(); ++i)
    for (std::size_t d = 0; d <= 15; ++d) {
      const double want = oracle::cycle_kernel(30, d, table.times[i]);
      CHECK(std::abs(table.value(i, 0, d) - want) <= 1e-12 * std::max(1.0, want));
    }
  // Far tail: the uniformized kernel keeps relative accuracy where the spectral sum cannot.
  const Matrix u = uniformized_kernel(cycle_graph(200), 1.0);
  for (std::size_t d : {10, 40, 100}) {
    const double want = oracle::cycle_kernel(200, d, 1.0);
    CHECK(u(0, d) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("uniformized kernel matches a dense matrix exponential") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 25;
    std::vector<WeightedEdge> edges;
    for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 0.2 + unit(rng), 1.0});
    for (int k = 0; k < 15; ++k) {
      const auto a = static_cast<Index>(unit(rng) * n), b = static_cast<Index>(unit(rng) * n);
      if (a != b) edges.push_back({a, b, 0.2 + unit(rng), 1.0});
    }
    Vector m(n);
    for (Index i = 0; i < n; ++i) m(i) = 0.5 + unit(rng);
    const GraphDirichletForm form(n, edges, m);
    for (double t : {0.3, 2.0, 15.0}) {
      const Matrix want = oracle::expm_kernel(dense_conductances(form), m, t);
      const Matrix uni = uniformized_kernel(form, t);
      const Matrix spec = heat_spectrum(form).kernel(t);
      CHECK((uni - want).cwiseAbs().maxCoeff() <= 1e-12 * want.maxCoeff());
      CHECK((spec - want).cwiseAbs().maxCoeff() <= 1e-11 * want.maxCoeff());
      CHECK((uni.array() > 0).all());
    }
  }
}

TEST_CASE("heat invariants and long-time limit") {
  const auto form = cycle_graph(40);
  const auto table = heat_kernel(form, {0.1, 1.0, 10.0, 100.0});
  const auto rep = check_heat_invariants(form, table);
  CHECK(rep.ok());
  CHECK(rep.symmetry_error <= kSymmetryTolerance);
  CHECK(rep.stochasticity_error <= kStochasticTolerance);
  CHECK(rep.semigroup_error <= kSemigroupTolerance);

  const auto late = heat_kernel(cycle_graph(10), {1000.0});
  CHECK((late.kernels[0].array() - 0.1).abs().maxCoeff() <= 1e-12);

  const auto uni = heat_kernel(form, {1.0, 10.0}, HeatMethod::Uniformized);
  CHECK(check_heat_invariants(form, uni).ok());

  const auto partial = heat_kernel(form, {1.0}, HeatMethod::Spectral, {3, 7});
  CHECK_FALSE(partial.full());
  CHECK(partial.value(0, 7, 9) == doctest::Approx(table.value(1, 7, 9)).epsilon(1e-13));
  CHECK_THROWS(check_heat_invariants(form, partial));
}

TEST_CASE("disconnected graph kernel stays block diagonal") {
  const GraphDirichletForm split(4, {{0, 1, 1.0, 1.0}, {2, 3, 1.0, 1.0}});
  const auto table = heat_kernel(split, {1.0});
  CHECK(table.components == 2);
  CHECK(std::abs(table.value(0, 0, 2)) <= 1e-15);
  CHECK(table.value(0, 0, 1) == doctest::Approx((1 - std::exp(-2.0)) / 2));
}

TEST_CASE("gasket graph sizes") {
  const std::pair<int, Index> counts[] = {{0, 3}, {1, 6}, {2, 15}, {5, 366}, {6, 1095}};
  for (auto [level, vertices] : counts) {
    const auto g = sierpinski_gasket_graph(level);
    CHECK(g.form.size() == vertices);
    CHECK(g.form.edges().size() == static_cast<std::size_t>(std::pow(3, level + 1)));
    CHECK(g.form.connected());
    CHECK(g.coords.rows() == static_cast<Eigen::Index>(vertices));
    for (const auto& e : g.form.edges())
      CHECK((g.coords.row(e.u) - g.coords.row(e.v)).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Corners have degree 2, every other vertex degree 4.
  const Vector deg = sierpinski_gasket_graph(3).form.degrees();
  CHECK((deg.array() == 2.0).count() == 3);
  CHECK((deg.array() == 4.0).count() == deg.size() - 3);
  CHECK_THROWS_AS(sierpinski_gasket_graph(-1), DomainError);
  CHECK_THROWS_AS(sierpinski_gasket_graph(kMaxGasketLevel + 1), DomainError);
}

TEST_CASE("exit times on a path") {
  const auto g = make_metric_graph(path_graph(41));
  for (double r : {1.0, 3.0, 8.0}) {
    const Vector e = exit_time_profile(g, 20, r);
    for (Index p = 0; p < 41; ++p) {
      const double k = std::abs(static_cast<double>(p) - 20.0);
      const double want = k < r ? (r * r - k * k) / 2 : 0.0;
      CHECK(std::abs(e(p) - want) <= 1e-10 * std::max(1.0, want));
    }
  }
  CHECK(mean_exit_time(g, 20, 1.0) == 0.5);
  const auto star = make_metric_graph(star_graph(6));
  CHECK(mean_exit_time(star, 0, 1.0) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(exit_time_profile(g, 20, 100.0), DomainError);

  const auto big = make_metric_graph(path_graph(201));
  const auto est = exit_time_walk_dimension(big, {60, 100, 140}, {2, 4, 8, 16, 32});
  CHECK(est.beta_hat == doctest::Approx(2.0).epsilon(0.05));
  CHECK(est.excluded == 0);
  CHECK(est.centers_used == 3);
  CHECK_THROWS_AS(exit_time_walk_dimension(big, {100}, {2, 4}), FitError);
}

TEST_CASE("sub-Gaussian fit") {
  const GraphDirichletForm edge(2, {{0, 1, 1.0, 1.0}});
  const auto g2 = make_metric_graph(edge);
  CHECK_THROWS_AS(sub_gaussian_fit(heat_kernel(edge, {0.1, 1.0, 10.0, 100.0}), g2.space), FitError);

  const auto g = make_metric_graph(cycle_graph(200));
  std::vector<double> times;
  for (int i = 0; i <= 15; ++i) times.push_back(std::pow(10.0, 3.0 * i / 15.0));
  const auto table = heat_kernel(g.form, times, HeatMethod::Spectral, {0, 50, 100, 150});
  const auto fit = sub_gaussian_fit(table, g.space);
  CHECK(fit.beta >= 1.8);
  CHECK(fit.beta <= 2.2);
  CHECK(fit.samples > 0);
  CHECK(fit.c_lower <= 1.0);
  CHECK(fit.C_upper >= 1.0);
  CHECK(fit.diagonal_slope == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("generalized estimate reduces to the Gaussian form on a cycle") {
  const auto g = make_metric_graph(cycle_graph(60));
  const auto psi = ScaleFunction::power(2);
  const auto table = heat_kernel(g.form, {25.0, 100.0, 300.0});
  for (std::size_t i = 0; i < table.times.size(); ++i)
    for (Index y : {5, 12, 20}) {
      const auto row = generalized_estimate_eval(table, i, g.space, psi, 0, y);
      const double t = table.times[i], d = static_cast<double>(y);
      CHECK(row.d_eps == d);
      CHECK(row.exponent == doctest::Approx(d * d / (4 * t)).epsilon(1e-10));
      // V(0, sqrt t): vertices at cycle distance < sqrt t.
      double count = 0;
      for (Index p = 0; p < 60; ++p)
        if (g.space.distance(0, p) < std::sqrt(t)) ++count;
      CHECK(row.volume == count);
      CHECK(row.kernel == doctest::Approx(oracle::cycle_kernel(60, y, t)).epsilon(1e-9));
    }
  const auto scan = generalized_estimate_scan(table, g.space, psi, {{0, 5}, {0, 12}, {0, 20}});
  CHECK(scan.rows.size() == 9);
  CHECK(scan.family.size() == 7);
  for (const auto& c : scan.family) {
    CHECK(c.upper > 0.0);
    CHECK(c.lower > 0.0);
  }
}

TEST_CASE("chaining bounds stay below the kernel") {
  const auto g = make_metric_graph(cycle_graph(40));
  std::vector<Index> path;
  for (Index i = 0; i <= 20; ++i) path.push_back(i);
  for (double t : {2.0, 8.0}) {
    const auto rep = chaining_lower_bound(g, path, t, {1, 2, 4, 5, 10});
    CHECK(rep.all_below_kernel);
    REQUIRE(rep.rows.front().n == 1);
    CHECK(rep.rows.front().log_restricted == doctest::Approx(rep.log_kernel).epsilon(1e-12));
    CHECK(rep.log_kernel == doctest::Approx(std::log(oracle::cycle_kernel(40, 20, t))).epsilon(1e-9));
    for (const auto& row : rep.rows) {
      CHECK(row.log_restricted <= rep.log_kernel + 1e-9);
      if (row.admissible) CHECK(row.log_near_diagonal <= rep.log_kernel + 1e-9);
      else CHECK(row.log_near_diagonal == -kInfinity);
    }
  }
  // A single admissible step reproduces the kernel exactly.
  const auto near = chaining_lower_bound(g, {0, 1, 2}, 4.0, {1});
  REQUIRE(near.rows.front().admissible);
  CHECK(near.log_single_step == doctest::Approx(near.log_kernel).epsilon(1e-12));
}
