#include <doctest.h>

#include <cmath>
#include <random>

#include "chainkit/chain.hpp"
#include "chainkit/dirichlet.hpp"
#include "chainkit/heat.hpp"
#include "chainkit/net.hpp"
#include "oracles.hpp"

using namespace chainkit;

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Index index(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }

  FiniteMetricMeasureSpace space() {
    const Index n = index(3, 25);
    const Index dim = index(1, 3);
    Matrix c = oracle::random_cloud(rng, n, dim);
    Vector m(n);
    for (Index i = 0; i < n; ++i) m(i) = uniform(0.1, 3.0);
    if (index(0, 1) == 0) return euclidean_space(c, m);
    return snowflake_space(c, uniform(2.0, 4.0), m);
  }

  GraphDirichletForm graph() {
    const Index n = index(2, 20);
    std::vector<WeightedEdge> edges;
    for (Index i = 1; i < n; ++i) edges.push_back({index(0, i - 1), i, uniform(0.1, 2.0), 1.0});
    const Index extra = index(0, n);
    for (Index k = 0; k < extra; ++k) {
      const Index a = index(0, n - 1), b = index(0, n - 1);
      if (a != b) edges.push_back({a, b, uniform(0.1, 2.0), 1.0});
    }
    Vector m(n);
    for (Index i = 0; i < n; ++i) m(i) = uniform(0.2, 2.0);
    return GraphDirichletForm(n, edges, m);
  }

  Vector function(Index n) {
    Vector f(n);
    for (Index i = 0; i < n; ++i) f(i) = uniform(-2.0, 2.0);
    return f;
  }
};

constexpr int kCases = 100;

}  // namespace

TEST_CASE("random spaces satisfy the metric axioms") {
  Gen gen(101);
  for (int k = 0; k < kCases; ++k) {
    const auto s = gen.space();
    const Matrix& d = s.distances();
    for (Index i = 0; i < s.size(); ++i) {
      CHECK(d(i, i) == 0.0);
      for (Index j = 0; j < s.size(); ++j) {
        CHECK(d(i, j) == d(j, i));
        if (i != j) CHECK(d(i, j) > 0.0);
        for (Index l = 0; l < s.size(); ++l) CHECK(d(i, l) <= d(i, j) + d(j, l) + 1e-12);
      }
    }
  }
}

TEST_CASE("chain metric is a metric dominating d and decreasing in eps") {
  Gen gen(202);
  for (int k = 0; k < kCases; ++k) {
    const auto s = gen.space();
    const double e1 = gen.uniform(0.05, 1.0) * s.diameter();
    const double e2 = e1 * gen.uniform(1.0, 2.0);
    const Matrix a = all_pairs_chain_metric(ProximityIndex(s, e1));
    const Matrix b = all_pairs_chain_metric(ProximityIndex(s, e2));
    for (Index i = 0; i < s.size(); ++i)
      for (Index j = 0; j < s.size(); ++j) {
        if (std::isfinite(a(i, j))) CHECK(a(i, j) == doctest::Approx(a(j, i)).epsilon(1e-12));
        else CHECK(std::isinf(a(j, i)));
        CHECK(a(i, j) >= s.distance(i, j) * (1 - 1e-12));
        CHECK(b(i, j) <= a(i, j) * (1 + 1e-12));
        for (Index l = 0; l < s.size(); ++l)
          if (std::isfinite(a(i, l))) CHECK(a(i, l) <= a(i, j) + a(j, l) + 1e-12);
      }
  }
}

TEST_CASE("hop counts are monotone and sandwiched") {
  Gen gen(303);
  for (int k = 0; k < kCases; ++k) {
    const auto s = gen.space();
    const double eps = gen.uniform(0.1, 1.0) * s.diameter();
    const ProximityIndex small(s, eps), large(s, 1.5 * eps);
    const Index x = gen.index(0, s.size() - 1);
    const auto hs = small.hop_counts(x).first, hl = large.hop_counts(x).first;
    for (Index y = 0; y < s.size(); ++y) {
      CHECK(hl[y] <= hs[y]);
      if (y == x || hs[y] == kNoChain) continue;
      const auto a = analyze_chain(small, x, y);
      CHECK(a.n_eps == hs[y]);
      CHECK(chain_sandwich_check(a));
    }
  }
}

TEST_CASE("energy measure identity and capacity symmetry") {
  Gen gen(404);
  for (int k = 0; k < kCases; ++k) {
    const auto form = gen.graph();
    const Index n = form.size();
    const Vector f = gen.function(n), g = gen.function(n);
    const double lhs = g.dot(energy_measure(form, f).density);
    const double rhs = energy(form, f, f.cwiseProduct(g)) - 0.5 * energy(form, f.cwiseProduct(f), g);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    const double e = energy(form, f), eg = energy(form, g), efg = energy(form, f + g);
    CHECK(std::sqrt(efg) <= std::sqrt(e) + std::sqrt(eg) + 1e-12);
    if (n >= 2) {
      const Index a = 0, b = n - 1;
      const double ab = capacity(form, {a}, {b}).capacity, ba = capacity(form, {b}, {a}).capacity;
      CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
    }
  }
}

TEST_CASE("doubling constant is invariant under rescaling") {
  Gen gen(505);
  for (int k = 0; k < 40; ++k) {
    const Index n = gen.index(2, 15);
    const Matrix c = oracle::random_cloud(gen.rng, n, 2);
    const double lambda = gen.uniform(0.1, 10.0);
    const double d1 = doubling_constant(euclidean_space(c));
    const double d2 = doubling_constant(euclidean_space(lambda * c));
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
    CHECK(d1 >= 1.0);
    CHECK(d1 <= static_cast<double>(n));
  }
}

TEST_CASE("greedy nets certify on random spaces") {
  Gen gen(606);
  for (int k = 0; k < kCases; ++k) {
    const auto s = gen.space();
    const double eps = gen.uniform(0.05, 1.2) * s.diameter();
    const auto net = build_net(s, eps, {gen.index(0, s.size() - 1)});
    CHECK(certify_net(s, net).ok());
    for (Index p = 0; p < s.size(); ++p) CHECK(net.contains(net.voronoi[p]));
  }
}

TEST_CASE("heat kernels on random graphs are symmetric, stochastic and positive") {
  Gen gen(707);
  for (int k = 0; k < 30; ++k) {
    const auto form = gen.graph();
    const double t = gen.uniform(0.05, 20.0);
    const auto table = heat_kernel(form, {t, 2 * t}, HeatMethod::Uniformized);
    const auto rep = check_heat_invariants(form, table);
    CHECK(rep.ok());
  }
}
