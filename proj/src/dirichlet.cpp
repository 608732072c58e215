#include "chainkit/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "chainkit/parallel.hpp"

namespace chainkit {

double energy(const GraphDirichletForm& form, const Vector& f, const Vector& g) {
  if (static_cast<Index>(f.size()) != form.size() || static_cast<Index>(g.size()) != form.size())
    throw InputError("function length does not match vertex count");
  double e = 0.0;
  for (const auto& ed : form.edges()) e += ed.conductance * (f(ed.u) - f(ed.v)) * (g(ed.u) - g(ed.v));
  return e;
}

double energy(const GraphDirichletForm& form, const Vector& f) { return energy(form, f, f); }

double EnergyMeasure::mass(const std::vector<Index>& set) const {
  double m = 0.0;
  for (Index i : set) m += density(i);
  return m;
}

EnergyMeasure energy_measure(const GraphDirichletForm& form, const Vector& f) {
  if (static_cast<Index>(f.size()) != form.size()) throw InputError("function length does not match vertex count");
  EnergyMeasure em;
  em.density = Vector::Zero(form.size());
  for (const auto& ed : form.edges()) {
    const double half = 0.5 * ed.conductance * (f(ed.u) - f(ed.v)) * (f(ed.u) - f(ed.v));
    em.density(ed.u) += half;
    em.density(ed.v) += half;
  }
  em.total = em.density.sum();
  return em;
}

CapacityResult capacity(const GraphDirichletForm& form, const std::vector<Index>& A, const std::vector<Index>& B) {
  const Index n = form.size();
  if (A.empty() || B.empty()) throw DomainError("capacity needs nonempty sets A and B");
  enum : char { Free, InA, InB };
  std::vector<char> role(n, Free);
  for (Index a : A) {
    if (a >= n) throw InputError("vertex id out of range in A");
    role[a] = InA;
  }
  for (Index b : B) {
    if (b >= n) throw InputError("vertex id out of range in B");
    if (role[b] == InA) {
      std::ostringstream os;
      os << "sets A and B intersect at vertex " << b;
      throw DomainError(os.str());
    }
    role[b] = InB;
  }
  CapacityResult res;
  res.potential = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (role[i] == InA) res.potential(i) = 1.0;

  // Free vertices whose component (in the free subgraph) touches A or B get solved;
  // the rest sit in components away from both sets and keep potential 0.
  std::vector<char> touches(n, 0);
  {
    std::vector<Index> stack;
    for (Index i = 0; i < n; ++i) {
      if (role[i] != Free) continue;
      for (const auto& nb : form.neighbors(i))
        if (role[nb.to] != Free && nb.conductance > 0.0 && !touches[i]) {
          touches[i] = 1;
          stack.push_back(i);
        }
    }
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto& nb : form.neighbors(u))
        if (role[nb.to] == Free && nb.conductance > 0.0 && !touches[nb.to]) {
          touches[nb.to] = 1;
          stack.push_back(nb.to);
        }
    }
  }
  std::vector<Index> free_ids;
  std::vector<Index> slot(n, n);
  for (Index i = 0; i < n; ++i)
    if (role[i] == Free && touches[i]) {
      slot[i] = free_ids.size();
      free_ids.push_back(i);
    }
  if (!free_ids.empty()) {
    const Index k = free_ids.size();
    std::vector<Eigen::Triplet<double>> trip;
    Vector rhs = Vector::Zero(k);
    for (Index s = 0; s < k; ++s) {
      const Index i = free_ids[s];
      double diag = 0.0;
      for (const auto& nb : form.neighbors(i)) {
        diag += nb.conductance;
        if (role[nb.to] == InA) rhs(s) += nb.conductance;
        else if (role[nb.to] == Free && slot[nb.to] != n) trip.emplace_back(s, slot[nb.to], -nb.conductance);
      }
      trip.emplace_back(s, s, diag);
    }
    SparseMatrix L(k, k);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SparseMatrix> solver(L);
    if (solver.info() != Eigen::Success) throw ConsistencyError("capacity system is not positive definite");
    const Vector sol = solver.solve(rhs);
    for (Index s = 0; s < k; ++s) res.potential(free_ids[s]) = std::clamp(sol(s), 0.0, 1.0);
  }
  res.capacity = energy(form, res.potential);
  return res;
}

CapacityScanReport capacity_upper_scan(const MetricGraph& graph, const ScaleFunction& psi,
                                       const std::vector<double>& radii, double A1, double A2,
                                       const std::vector<Index>& centers) {
  if (!(A1 > 1.0)) throw DomainError("capacity scan needs A1 > 1");
  if (!(A2 >= 1.0)) throw DomainError("capacity scan needs A2 >= 1");
  const auto& space = graph.space;
  CapacityScanReport rep;
  std::vector<double> used;
  for (double R : radii) {
    if (R > 0.0 && R < space.diameter() / A2) used.push_back(R);
    else ++rep.excluded_radii;
  }
  std::vector<Index> xs = centers;
  if (xs.empty())
    for (Index x = 0; x < space.size(); ++x) xs.push_back(x);
  std::vector<std::vector<CapacityScanRow>> rows(xs.size());
  parallel_for(xs.size(), [&](std::size_t k) {
    const Index x = xs[k];
    for (double R : used) {
      CapacityScanRow row;
      row.center = x;
      row.radius = R;
      const auto inner = ball(space, x, R);
      std::vector<Index> outer;
      for (Index y = 0; y < space.size(); ++y)
        if (!(space.distance(x, y) < A1 * R)) outer.push_back(y);
      row.capacity = outer.empty() ? 0.0 : capacity(graph.form, inner, outer).capacity;
      row.ball_mass = volume(space, x, R);
      row.constant = row.capacity * psi(R) / row.ball_mass;
      rows[k].push_back(row);
    }
  });
  for (const auto& per : rows)
    for (const auto& row : per) {
      if (!rep.worst || row.constant > rep.best_constant) {
        rep.best_constant = row.constant;
        rep.worst = row;
      }
      rep.rows.push_back(row);
    }
  return rep;
}

double truncated_maximal(const FiniteMetricMeasureSpace& space, const Vector& nu, Index x, double R) {
  space.check_id(x);
  if (!(R > 0.0)) throw DomainError("truncation radius must be positive");
  if (static_cast<Index>(nu.size()) != space.size()) throw InputError("measure length does not match space size");
  // For r in (d_k, d_{k+1}] the open ball is the closed ball of radius d_k, so the
  // balls with 0 < r < R are exactly the closed balls with d_k < R.
  std::vector<std::pair<double, Index>> order(space.size());
  for (Index y = 0; y < space.size(); ++y) order[y] = {space.distance(x, y), y};
  std::sort(order.begin(), order.end());
  double best = 0.0, num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!(order[k].first < R)) break;
    num += nu(order[k].second);
    den += space.mass(order[k].second);
    if (k + 1 == order.size() || order[k + 1].first != order[k].first) best = std::max(best, num / den);
  }
  return best;
}

double poincare_constant(const MetricGraph& graph, const ScaleFunction& psi, Index x, double r, double A) {
  const auto& space = graph.space;
  const auto& form = graph.form;
  if (!(A >= 1.0)) throw DomainError("Poincare dilation A must be >= 1");
  const auto inner = ball(space, x, r);
  if (inner.size() <= 1) return 0.0;
  const auto outer_ball = ball(space, x, A * r);
  const Index k = outer_ball.size();
  std::vector<Index> slot(space.size(), space.size());
  for (Index s = 0; s < k; ++s) slot[outer_ball[s]] = s;

  // Q(f) = Gamma(f,f)(B(x, A r)) minimised over values outside the ball.
  Matrix Q = Matrix::Zero(k, k);
  std::vector<std::vector<std::pair<Index, double>>> outside(space.size());
  for (const auto& e : form.edges()) {
    const Index a = slot[e.u], b = slot[e.v];
    const bool in_a = a != space.size(), in_b = b != space.size();
    if (in_a && in_b) {
      Q(a, a) += e.conductance;
      Q(b, b) += e.conductance;
      Q(a, b) -= e.conductance;
      Q(b, a) -= e.conductance;
    } else if (in_a) {
      outside[e.v].emplace_back(a, e.conductance);
    } else if (in_b) {
      outside[e.u].emplace_back(b, e.conductance);
    }
  }
  // Each outside vertex y contributes 1/2 sum_p w_py (f_p - f_y)^2; optimal f_y is
  // the w-weighted mean, leaving 1/2 (sum w f^2 - (sum w f)^2 / sum w).
  for (const auto& links : outside) {
    if (links.empty()) continue;
    double total = 0.0;
    for (const auto& [p, w] : links) total += w;
    if (!(total > 0.0)) continue;
    for (const auto& [p, w] : links) Q(p, p) += 0.5 * w;
    for (const auto& [p, wp] : links)
      for (const auto& [q, wq] : links) Q(p, q) -= 0.5 * wp * wq / total;
  }
  // D(f) = sum_{B(x,r)} m (f - mean)^2.
  Matrix D = Matrix::Zero(k, k);
  double mass = 0.0;
  Vector mvec = Vector::Zero(k);
  for (Index p : inner) {
    mvec(slot[p]) = space.mass(p);
    mass += space.mass(p);
  }
  D.diagonal() = mvec;
  D -= mvec * mvec.transpose() / mass;
  // Both forms vanish on constants; pinning the last coordinate to zero
  // parametrises the quotient by constants.
  const Index m = k - 1;
  const Matrix Qr = Q.topLeftCorner(m, m);
  const Matrix Dr = D.topLeftCorner(m, m);
  Eigen::LLT<Matrix> llt(Qr);
  if (llt.info() != Eigen::Success)
    throw HypothesisError("B(x, A r) is not connected; the Poincare quotient is unbounded");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(Dr, Qr, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw ConsistencyError("Poincare eigenproblem failed");
  const double mu_max = ges.eigenvalues().maxCoeff();
  return std::max(mu_max, 0.0) / psi(r);
}

TwoPointReport two_point_check(const MetricGraph& graph, const ScaleFunction& psi, const Vector& u, Index x, Index y,
                               double R) {
  const auto& space = graph.space;
  space.check_id(x);
  space.check_id(y);
  TwoPointReport rep;
  const auto gamma = energy_measure(graph.form, u);
  rep.lhs = (u(x) - u(y)) * (u(x) - u(y));
  rep.maximal_x = truncated_maximal(space, gamma.density, x, R);
  rep.maximal_y = truncated_maximal(space, gamma.density, y, R);
  rep.rhs_core = psi(R) * (rep.maximal_x + rep.maximal_y);
  if (rep.lhs == 0.0) rep.ratio = 0.0;
  else if (rep.rhs_core == 0.0) {
    rep.ratio = kInfinity;
    rep.unbounded = true;
  } else rep.ratio = rep.lhs / rep.rhs_core;
  const double d = space.distance(x, y);
  rep.center_scale = d > 0.0 ? R / d : kInfinity;
  return rep;
}

}  // namespace chainkit
