#include "chainkit/heat.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "chainkit/chain.hpp"
#include "chainkit/parallel.hpp"

namespace chainkit {

Matrix HeatSpectrum::kernel(double t) const {
  const Vector decay = (-eigenvalues.array() * t).exp().matrix();
  return eigenfunctions * decay.asDiagonal() * eigenfunctions.transpose();
}

Matrix HeatSpectrum::rows(double t, const std::vector<Index>& sources) const {
  const Vector decay = (-eigenvalues.array() * t).exp().matrix();
  Matrix sub(sources.size(), eigenfunctions.cols());
  for (std::size_t i = 0; i < sources.size(); ++i) sub.row(i) = eigenfunctions.row(sources[i]);
  return sub * decay.asDiagonal() * eigenfunctions.transpose();
}

HeatSpectrum heat_spectrum(const GraphDirichletForm& form) {
  const Index n = form.size();
  if (n > kMaxSpectralVertices) {
    std::ostringstream os;
    os << "dense heat kernel limited to " << kMaxSpectralVertices << " vertices, got " << n;
    throw DomainError(os.str());
  }
  const Vector inv_sqrt_m = form.measure().array().rsqrt().matrix();
  const Matrix L = Matrix(form.laplacian());
  const Matrix S = inv_sqrt_m.asDiagonal() * L * inv_sqrt_m.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) throw ConsistencyError("Laplacian eigendecomposition failed");
  HeatSpectrum spec;
  spec.eigenvalues = es.eigenvalues();
  spec.eigenfunctions = inv_sqrt_m.asDiagonal() * es.eigenvectors();
  spec.measure = form.measure();
  return spec;
}

namespace {

// Upper bound on the hop diameter of every component.
Index hop_diameter_bound(const GraphDirichletForm& form) {
  const Index n = form.size();
  std::vector<Index> dist(n, n);
  Index bound = 0;
  for (Index s = 0; s < n; ++s) {
    if (dist[s] != n) continue;
    std::queue<Index> q;
    dist[s] = 0;
    q.push(s);
    Index ecc = 0;
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      ecc = std::max(ecc, dist[u]);
      for (const auto& nb : form.neighbors(u))
        if (nb.conductance > 0.0 && dist[nb.to] == n) {
          dist[nb.to] = dist[u] + 1;
          q.push(nb.to);
        }
    }
    bound = std::max(bound, 2 * ecc);
  }
  return bound;
}

}  // namespace

Matrix uniformized_kernel(const GraphDirichletForm& form, double t) {
  if (!(t > 0.0)) throw DomainError("heat kernel time must be positive");
  const Index n = form.size();
  const Vector& m = form.measure();
  const Vector rate = form.degrees().cwiseQuotient(m);
  const double q = rate.maxCoeff();
  if (q == 0.0) return Matrix(m.cwiseInverse().asDiagonal());

  // N = q I - M^-1 (D - W), kept sparse; entries are clipped at zero to absorb
  // rounding in q - deg/m.
  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, std::max(q - rate(i), 0.0));
  for (const auto& e : form.edges()) {
    trip.emplace_back(e.u, e.v, e.conductance / m(e.u));
    trip.emplace_back(e.v, e.u, e.conductance / m(e.v));
  }
  SparseMatrix N(n, n);
  N.setFromTriplets(trip.begin(), trip.end());

  // Scale so that q s <= 1/2 and each factor only needs to bridge a few hops.
  const double reach = static_cast<double>(hop_diameter_bound(form));
  int k = 0;
  while (q * t / std::ldexp(1.0, k) > 0.5 || std::ldexp(1.0, k) * 8.0 < reach) ++k;
  const double s = t / std::ldexp(1.0, k);
  const SparseMatrix sN = s * N;
  const std::size_t min_terms = static_cast<std::size_t>(std::ceil(reach / std::ldexp(1.0, k)));

  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (std::size_t j = 1; j <= 400; ++j) {
    term = term * sN / static_cast<double>(j);
    sum += term;
    if (j >= min_terms && (term.array() <= 1e-17 * sum.array()).all()) break;
  }
  sum *= std::exp(-q * s);
  for (int i = 0; i < k; ++i) sum = sum * sum;
  return sum * m.cwiseInverse().asDiagonal();
}

Index HeatKernelTable::row_of(Index x) const {
  if (full()) return x;
  const auto it = std::find(sources.begin(), sources.end(), x);
  if (it == sources.end()) throw DomainError("vertex is not a source row of this heat kernel table");
  return static_cast<Index>(it - sources.begin());
}

HeatKernelTable heat_kernel(const GraphDirichletForm& form, std::vector<double> times, HeatMethod method,
                            std::vector<Index> sources) {
  for (double t : times)
    if (!(t > 0.0)) throw DomainError("heat kernel times must be positive");
  std::sort(times.begin(), times.end());
  HeatKernelTable table;
  table.method = method;
  table.times = times;
  table.measure = form.measure();
  if (sources.empty()) {
    sources.resize(form.size());
    std::iota(sources.begin(), sources.end(), Index{0});
  }
  for (Index s : sources)
    if (s >= form.size()) throw InputError("heat kernel source out of range");
  table.sources = sources;
  const auto labels = form.components();
  table.components = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (table.components > 1)
    std::cerr << "warning: graph has " << table.components
              << " components; cross-component kernel entries are zero\n";
  table.kernels.resize(times.size());
  if (method == HeatMethod::Spectral) {
    const auto spec = heat_spectrum(form);
    parallel_for(times.size(), [&](std::size_t i) {
      table.kernels[i] = table.full() ? spec.kernel(times[i]) : spec.rows(times[i], sources);
    });
  } else {
    parallel_for(times.size(), [&](std::size_t i) {
      const Matrix p = uniformized_kernel(form, times[i]);
      if (table.full()) {
        table.kernels[i] = p;
      } else {
        table.kernels[i].resize(sources.size(), p.cols());
        for (std::size_t r = 0; r < sources.size(); ++r) table.kernels[i].row(r) = p.row(sources[r]);
      }
    });
  }
  return table;
}

HeatInvariantReport check_heat_invariants(const GraphDirichletForm& form, const HeatKernelTable& table) {
  if (!table.full()) throw DomainError("invariant checks need the full kernel table");
  const Vector& m = table.measure;
  const auto labels = form.components();
  const Index n = form.size();
  HeatInvariantReport rep;
  for (const auto& p : table.kernels) {
    rep.symmetry_error = std::max(rep.symmetry_error, (p - p.transpose()).cwiseAbs().maxCoeff());
    rep.stochasticity_error = std::max(rep.stochasticity_error, ((p * m).array() - 1.0).abs().maxCoeff());
    for (Index x = 0; x < n; ++x)
      for (Index y = 0; y < n; ++y)
        if (labels[x] == labels[y]) rep.min_value = std::min(rep.min_value, p(x, y));
  }

  std::vector<std::tuple<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < table.times.size(); ++i) {
    pairs.emplace_back(i, i);
    if (i + 1 < table.times.size()) pairs.emplace_back(i, i + 1);
  }
  std::optional<HeatSpectrum> spec;
  if (table.method == HeatMethod::Spectral) spec = heat_spectrum(form);
  std::vector<double> errs(pairs.size(), 0.0);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double sum_t = table.times[i] + table.times[j];
    const Matrix direct = spec ? spec->kernel(sum_t) : uniformized_kernel(form, sum_t);
    const Matrix composed = table.kernels[i] * m.asDiagonal() * table.kernels[j];
    errs[k] = (direct - composed).cwiseAbs().maxCoeff();
  });
  for (double e : errs) rep.semigroup_error = std::max(rep.semigroup_error, e);

  rep.symmetric = rep.symmetry_error <= kSymmetryTolerance;
  rep.stochastic = rep.stochasticity_error <= kStochasticTolerance;
  rep.semigroup = rep.semigroup_error <= kSemigroupTolerance;
  rep.positive = table.method == HeatMethod::Spectral ? rep.min_value >= -kSpectralPositivitySlack : rep.min_value > 0.0;
  return rep;
}

namespace {

// Pooled slope after removing each group's mean.
double demeaned_slope(const std::vector<std::vector<std::pair<double, double>>>& groups) {
  double sxy = 0.0, sxx = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : g) {
      mx += x;
      my += y;
    }
    mx /= g.size();
    my /= g.size();
    for (const auto& [x, y] : g) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
  }
  if (!(sxx > 0.0)) throw FitError("no variation in the regressor");
  return sxy / sxx;
}

}  // namespace

SubGaussianFit sub_gaussian_fit(const HeatKernelTable& table, const FiniteMetricMeasureSpace& space,
                                const SubGaussianFitOptions& opt) {
  if (table.times.size() < 2) throw FitError("sub-Gaussian fit needs at least two times");
  SubGaussianFit fit;
  fit.time_decades = std::log10(table.times.back() / table.times.front());
  if (fit.time_decades < opt.min_time_decades) {
    std::ostringstream os;
    os << "time grid spans " << fit.time_decades << " decades, fit needs " << opt.min_time_decades;
    throw FitError(os.str());
  }

  std::vector<std::vector<std::pair<double, double>>> diag(table.sources.size());
  std::vector<double> D, T, Y;
  const double dmax = opt.max_distance_fraction * space.diameter();
  for (std::size_t k = 0; k < table.times.size(); ++k) {
    const double t = table.times[k];
    for (std::size_t r = 0; r < table.sources.size(); ++r) {
      const Index x = table.sources[r];
      const double pxx = table.kernels[k](r, x);
      if (!(pxx > 0.0)) throw FitError("nonpositive on-diagonal kernel value");
      diag[r].emplace_back(std::log(t), std::log(pxx));
      for (Index y = 0; y < space.size(); ++y) {
        const double d = space.distance(x, y);
        if (d < opt.min_distance || d > dmax) continue;
        if (opt.distance_below_time && d > t) continue;
        const double p = table.kernels[k](r, y);
        if (!(p > 0.0)) continue;
        const double ratio = std::log(p / pxx);
        if (!(ratio > opt.log_ratio_min && ratio < opt.log_ratio_max)) continue;
        D.push_back(d);
        T.push_back(t);
        Y.push_back(ratio);
      }
    }
  }
  fit.diagonal_slope = demeaned_slope(diag);
  fit.samples = Y.size();
  if (fit.samples < 3) throw FitError("fewer than three usable off-diagonal samples");
  const auto [dlo, dhi] = std::minmax_element(D.begin(), D.end());
  fit.distance_decades = std::log10(*dhi / *dlo);
  if (fit.distance_decades < opt.min_distance_decades) {
    std::ostringstream os;
    os << "usable distances span " << fit.distance_decades << " decades, fit needs " << opt.min_distance_decades;
    throw FitError(os.str());
  }

  const Eigen::Map<const Vector> dv(D.data(), D.size()), tv(T.data(), T.size()), yv(Y.data(), Y.size());
  const auto steps = static_cast<int>(std::round((opt.beta_max - opt.beta_min) / opt.beta_step));
  double best_rms = kInfinity;
  for (int i = 0; i <= steps; ++i) {
    const double beta = opt.beta_min + i * opt.beta_step;
    const Vector z = (dv.array().pow(beta) / tv.array()).pow(1.0 / (beta - 1.0)).matrix();
    const double mz = z.mean(), my = yv.mean();
    const double szz = (z.array() - mz).square().sum();
    const double szy = ((z.array() - mz) * (yv.array() - my)).sum();
    const double slope = szz > 0.0 ? szy / szz : 0.0;
    const double icpt = my - slope * mz;
    const double rms = std::sqrt(((yv.array() - icpt - slope * z.array()).square()).mean());
    fit.residual_curve.emplace_back(beta, rms);
    if (rms < best_rms) {
      best_rms = rms;
      fit.beta = beta;
      fit.slope_b = -slope;
      fit.intercept = icpt;
      fit.residual_rms = rms;
      const Vector shifted = yv + fit.slope_b * z;
      fit.c_lower = std::exp(shifted.minCoeff());
      fit.C_upper = std::exp(shifted.maxCoeff());
    }
  }
  fit.scale_c = fit.slope_b > 0.0 ? std::pow(fit.slope_b, -(fit.beta - 1.0)) : kInfinity;
  return fit;
}

double ChainingReport::log_gain() const {
  if (log_best == -kInfinity) return -kInfinity;
  return log_best - log_single_step;
}

namespace {

// log sum_i exp(a_i) for a vector with possibly -inf entries.
double log_dot(const Vector& v, double log_scale) {
  const double s = v.sum();
  return s > 0.0 ? std::log(s) + log_scale : -kInfinity;
}

}  // namespace

ChainingReport chaining_lower_bound(const MetricGraph& graph, const std::vector<Index>& path, double t,
                                    const std::vector<std::size_t>& steps, NearDiagonal nd) {
  if (path.empty()) throw InputError("chaining needs a nonempty path");
  if (!(t > 0.0)) throw DomainError("chaining time must be positive");
  if (!(nd.C > 0.0) || !(nd.beta > 1.0)) throw DomainError("near-diagonal constants need C > 0 and beta > 1");
  const auto& space = graph.space;
  for (Index p : path) space.check_id(p);
  ChainingReport rep;
  rep.x = path.front();
  rep.y = path.back();
  rep.t = t;
  const Matrix pt = uniformized_kernel(graph.form, t);
  rep.log_kernel = pt(rep.x, rep.y) > 0.0 ? std::log(pt(rep.x, rep.y)) : -kInfinity;
  const double slack = 1e-9;
  rep.log_single_step = space.distance(rep.x, rep.y) <= nd.C * std::pow(t, 1.0 / nd.beta) / 2 * (1 + 1e-12)
                            ? rep.log_kernel
                            : -kInfinity;

  rep.rows.resize(steps.size());
  parallel_for(steps.size(), [&](std::size_t si) {
    const std::size_t n = steps[si];
    if (n == 0) throw DomainError("chain length must be at least 1");
    ChainingRow& row = rep.rows[si];
    row.n = n;
    const double s = t / static_cast<double>(n);
    const Matrix p = n == 1 ? pt : uniformized_kernel(graph.form, s);
    const double reach = nd.C * std::pow(s, 1.0 / nd.beta);
    row.radius = reach / 2;

    std::vector<Index> pts(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      pts[i] = path[static_cast<std::size_t>(std::llround(static_cast<double>(i) * (path.size() - 1) / n))];
    for (std::size_t i = 0; i < n; ++i) row.hop = std::max(row.hop, space.distance(pts[i], pts[i + 1]));
    row.admissible = row.hop <= row.radius * (1 + 1e-12);

    std::vector<std::vector<Index>> balls(n + 1);
    balls[0] = {rep.x};
    balls[n] = {rep.y};
    for (std::size_t i = 1; i < n; ++i) balls[i] = ball(space, pts[i], row.radius);

    // S_n by forward recursion, rescaled each step.
    Vector v(1);
    v(0) = 1.0;
    double log_scale = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      Vector next = Vector::Zero(balls[i].size());
      for (std::size_t b = 0; b < balls[i].size(); ++b) {
        const Index z = balls[i][b];
        double acc = 0.0;
        for (std::size_t a = 0; a < balls[i - 1].size(); ++a) acc += v(a) * p(balls[i - 1][a], z);
        next(b) = i < n ? acc * space.mass(z) : acc;
      }
      const double top = next.maxCoeff();
      if (!(top > 0.0)) {
        log_scale = -kInfinity;
        v = Vector::Zero(1);
        break;
      }
      v = next / top;
      log_scale += std::log(top);
    }
    row.log_restricted = std::isfinite(log_scale) ? log_dot(v, log_scale) : -kInfinity;

    if (row.admissible) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n && std::isfinite(acc); ++i) {
        double lo = kInfinity;
        for (Index u : balls[i])
          for (Index w : balls[i + 1]) lo = std::min(lo, p(u, w));
        acc += lo > 0.0 ? std::log(lo) : -kInfinity;
        if (i + 1 < n) {
          double mass = 0.0;
          for (Index w : balls[i + 1]) mass += space.mass(w);
          acc += std::log(mass);
        }
      }
      row.log_near_diagonal = acc;
    }
    row.below_kernel = row.log_restricted <= rep.log_kernel + slack && row.log_near_diagonal <= rep.log_kernel + slack;
  });
  for (const auto& row : rep.rows) {
    rep.all_below_kernel = rep.all_below_kernel && row.below_kernel;
    if (row.log_near_diagonal > rep.log_best) {
      rep.log_best = row.log_near_diagonal;
      rep.best_n = row.n;
    }
  }
  return rep;
}

GeneralizedEstimateRow generalized_estimate_eval(const HeatKernelTable& table, std::size_t time_index,
                                                 const FiniteMetricMeasureSpace& space, const ScaleFunction& psi,
                                                 Index x, Index y) {
  if (time_index >= table.times.size()) throw DomainError("time index out of range");
  if (x == y) throw DomainError("generalized estimate needs distinct points");
  GeneralizedEstimateRow row;
  row.x = x;
  row.y = y;
  row.t = table.times[time_index];
  row.kernel = table.value(time_index, x, y);
  row.epsilon = epsilon_of_t(space, psi, x, y, row.t);
  row.d_eps = chain_metric(space, row.epsilon, x, y).length;
  row.volume = volume(space, x, psi.inverse(row.t));
  const PhiTransform phi(psi);
  row.exponent = row.t * phi(row.d_eps / row.t);
  row.log_kernel_volume = row.kernel > 0.0 ? std::log(row.kernel * row.volume) : -kInfinity;
  return row;
}

GeneralizedEstimateScan generalized_estimate_scan(const HeatKernelTable& table, const FiniteMetricMeasureSpace& space,
                                                  const ScaleFunction& psi, const std::vector<std::pair<Index, Index>>& pairs,
                                                  const std::vector<double>& exponent_constants) {
  GeneralizedEstimateScan scan;
  std::vector<GeneralizedEstimateRow> rows(pairs.size() * table.times.size());
  parallel_for(rows.size(), [&](std::size_t k) {
    const auto& [x, y] = pairs[k / table.times.size()];
    rows[k] = generalized_estimate_eval(table, k % table.times.size(), space, psi, x, y);
  });
  scan.rows = std::move(rows);
  for (double c : exponent_constants) {
    GeneralizedEstimateConstants fam;
    fam.c = c;
    double hi = -kInfinity, lo = kInfinity;
    for (const auto& r : scan.rows) {
      const double v = r.log_kernel_volume + c * r.exponent;
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    fam.upper = std::exp(hi);
    fam.lower = std::exp(-lo);
    scan.family.push_back(fam);
  }
  return scan;
}

Vector exit_time_profile(const MetricGraph& graph, Index x, double r) {
  const auto& space = graph.space;
  const auto& form = graph.form;
  const auto inside = ball(space, x, r);
  if (inside.size() == space.size()) throw DomainError("exit time is undefined when the ball is the whole graph");
  std::vector<Index> slot(space.size(), space.size());
  for (Index s = 0; s < inside.size(); ++s) slot[inside[s]] = s;
  std::vector<Eigen::Triplet<double>> trip;
  Vector rhs(inside.size());
  for (Index s = 0; s < inside.size(); ++s) {
    const Index p = inside[s];
    double deg = 0.0;
    for (const auto& nb : form.neighbors(p)) {
      deg += nb.conductance;
      if (slot[nb.to] != space.size()) trip.emplace_back(s, slot[nb.to], -nb.conductance);
    }
    trip.emplace_back(s, s, deg);
    rhs(s) = form.measure()(p);
  }
  SparseMatrix A(inside.size(), inside.size());
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SparseMatrix> solver(A);
  if (solver.info() != Eigen::Success) throw ConsistencyError("exit-time system is singular");
  const Vector sol = solver.solve(rhs);
  Vector out = Vector::Zero(space.size());
  for (Index s = 0; s < inside.size(); ++s) out(inside[s]) = sol(s);
  return out;
}

double mean_exit_time(const MetricGraph& graph, Index x, double r) { return exit_time_profile(graph, x, r)(x); }

ExitTimeEstimate exit_time_walk_dimension(const MetricGraph& graph, const std::vector<Index>& centers,
                                          const std::vector<double>& radii) {
  if (radii.empty() || centers.empty()) throw FitError("exit-time fit needs centres and radii");
  const auto [rlo, rhi] = std::minmax_element(radii.begin(), radii.end());
  if (!(*rlo > 0.0)) throw DomainError("radii must be positive");
  if (*rhi / *rlo < 10.0 * (1 - 1e-12)) throw FitError("exit-time radii must span at least one decade");
  for (Index c : centers) graph.space.check_id(c);

  std::vector<std::vector<ExitTimeRow>> per(centers.size());
  std::vector<std::size_t> skipped(centers.size(), 0);
  parallel_for(centers.size(), [&](std::size_t k) {
    for (double r : radii) {
      if (ball(graph.space, centers[k], r).size() == graph.space.size()) {
        ++skipped[k];
        continue;
      }
      per[k].push_back({centers[k], r, mean_exit_time(graph, centers[k], r)});
    }
  });
  ExitTimeEstimate est;
  std::vector<std::vector<std::pair<double, double>>> groups;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    est.excluded += skipped[k];
    std::vector<std::pair<double, double>> g;
    for (const auto& row : per[k]) {
      est.rows.push_back(row);
      g.emplace_back(std::log(row.radius), std::log(row.exit_time));
    }
    if (g.size() >= 2) ++est.centers_used;
    groups.push_back(std::move(g));
  }
  est.beta_hat = demeaned_slope(groups);
  return est;
}

GasketGraph sierpinski_gasket_graph(int level) {
  if (level < 0 || level > kMaxGasketLevel) {
    std::ostringstream os;
    os << "gasket level must lie in [0, " << kMaxGasketLevel << "], got " << level;
    throw DomainError(os.str());
  }
  std::map<std::pair<long, long>, Index> ids;
  std::vector<std::pair<long, long>> lattice;
  std::vector<WeightedEdge> edges;
  auto vid = [&](long a, long b) {
    auto [it, fresh] = ids.emplace(std::make_pair(a, b), lattice.size());
    if (fresh) lattice.emplace_back(a, b);
    return it->second;
  };
  auto rec = [&](auto&& self, long a, long b, long side) -> void {
    if (side == 1) {
      const Index p = vid(a, b), q = vid(a + 1, b), r = vid(a, b + 1);
      edges.push_back({p, q});
      edges.push_back({q, r});
      edges.push_back({p, r});
      return;
    }
    const long h = side / 2;
    self(self, a, b, h);
    self(self, a + h, b, h);
    self(self, a, b + h, h);
  };
  rec(rec, 0, 0, 1L << level);
  const Index n = lattice.size();
  Matrix coords(n, 2);
  for (Index i = 0; i < n; ++i) {
    coords(i, 0) = lattice[i].first + 0.5 * lattice[i].second;
    coords(i, 1) = lattice[i].second * std::sqrt(3.0) / 2;
  }
  return GasketGraph{GraphDirichletForm(n, std::move(edges)), std::move(coords)};
}

}  // namespace chainkit
