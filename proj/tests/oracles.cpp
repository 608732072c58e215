#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

ChainOptimum enumerate_chains(const Matrix& dist, double eps, Index x, Index y) {
  const Index n = dist.rows();
  ChainOptimum best;
  if (x == y) return {0.0, 0};
  std::vector<char> used(n, 0);
  std::function<void(Index, double, std::size_t)> walk = [&](Index u, double len, std::size_t hops) {
    if (u == y) {
      best.length = std::min(best.length, len);
      best.hops = std::min(best.hops, hops);
      return;
    }
    for (Index v = 0; v < n; ++v) {
      if (used[v] || !(dist(u, v) < eps)) continue;
      used[v] = 1;
      walk(v, len + dist(u, v), hops + 1);
      used[v] = 0;
    }
  };
  used[x] = 1;
  walk(x, 0.0, 0);
  return best;
}

Matrix floyd_chain_metric(const Matrix& dist, double eps) {
  const Index n = dist.rows();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = i == j ? 0.0 : (dist(i, j) < eps ? dist(i, j) : chainkit::kInfinity);
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

double cycle_kernel(std::size_t n, std::size_t d, double t) {
  double sum = 0.0;
  const long N = static_cast<long>(n);
  for (long k = -60; k <= 60; ++k) {
    const long order = std::labs(static_cast<long>(d) + k * N);
    // I_nu(2t) is negligible once nu far exceeds 2t, and libstdc++ returns NaN there.
    if (static_cast<double>(order) > 2 * t + 15 * std::sqrt(2 * t) + 40) continue;
    sum += std::cyl_bessel_i(static_cast<double>(order), 2 * t);
  }
  return std::exp(-2 * t) * sum;
}

Matrix expm_kernel(const Matrix& W, const Vector& m, double t) {
  const Vector deg = W.rowwise().sum();
  const Matrix gen = m.cwiseInverse().asDiagonal() * (Matrix(deg.asDiagonal()) - W);
  const Matrix P = (-t * gen).exp();
  return P * m.cwiseInverse().asDiagonal();
}

Matrix random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix pts(n, dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) pts(i, j) = u(rng);
  return pts;
}

double epsilon_of_t_grid(const Matrix& dist, double beta, Index x, Index y, double t, std::size_t steps) {
  const double diam = dist.maxCoeff();
  double best = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double eps = diam * static_cast<double>(i) / static_cast<double>(steps);
    const double de = floyd_chain_metric(dist, eps)(x, y);
    if (std::pow(eps, beta) / eps * de <= t) best = eps;
  }
  return best;
}

}  // namespace oracle
