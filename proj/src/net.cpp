#include "chainkit/net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chainkit/parallel.hpp"

namespace chainkit {

bool EpsilonNet::contains(Index p) const { return std::find(members.begin(), members.end(), p) != members.end(); }

EpsilonNet build_net(const FiniteMetricMeasureSpace& space, double epsilon, const std::vector<Index>& include) {
  if (!(epsilon > 0.0)) throw DomainError("net scale must be positive");
  EpsilonNet net;
  net.epsilon = epsilon;
  for (Index p : include) {
    space.check_id(p);
    if (std::find(net.include_set.begin(), net.include_set.end(), p) != net.include_set.end()) continue;
    for (Index q : net.include_set)
      if (space.distance(p, q) < epsilon) {
        std::ostringstream os;
        os << "include set is not " << epsilon << "-separated: d(" << q << ", " << p << ") = " << space.distance(p, q);
        throw InputError(os.str());
      }
    net.include_set.push_back(p);
  }
  net.members = net.include_set;
  for (Index p = 0; p < space.size(); ++p) {
    bool far = true;
    for (Index z : net.members)
      if (space.distance(p, z) < epsilon) {
        far = false;
        break;
      }
    if (far) net.members.push_back(p);
  }
  net.voronoi = voronoi_assign(space, net.members);
  return net;
}

std::vector<Index> voronoi_assign(const FiniteMetricMeasureSpace& space, const std::vector<Index>& members) {
  if (members.empty()) throw DomainError("Voronoi assignment needs at least one member");
  std::vector<Index> owner(space.size());
  for (Index p = 0; p < space.size(); ++p) {
    Index best = members.front();
    for (Index z : members) {
      const double d = space.distance(p, z), db = space.distance(p, best);
      if (d < db || (d == db && z < best)) best = z;
    }
    owner[p] = best;
  }
  return owner;
}

namespace {

Vector distance_to_net(const FiniteMetricMeasureSpace& space, const std::vector<Index>& members) {
  Vector d = Vector::Constant(space.size(), kInfinity);
  for (Index z : members) d = d.cwiseMin(space.distances().col(z));
  return d;
}

}  // namespace

std::vector<Index> voronoi_cell(const FiniteMetricMeasureSpace& space, const std::vector<Index>& members, Index z) {
  const Vector dv = distance_to_net(space, members);
  std::vector<Index> cell;
  for (Index p = 0; p < space.size(); ++p)
    if (space.distance(p, z) == dv(p)) cell.push_back(p);
  return cell;
}

NetCertificate certify_net(const FiniteMetricMeasureSpace& space, const EpsilonNet& net) {
  NetCertificate cert;
  const double eps = net.epsilon;
  for (std::size_t i = 0; i < net.members.size(); ++i)
    for (std::size_t j = i + 1; j < net.members.size(); ++j) {
      const double d = space.distance(net.members[i], net.members[j]);
      cert.min_separation = std::min(cert.min_separation, d);
      if (d < eps && cert.separated) {
        cert.separated = false;
        cert.separation_violation = PointPair{net.members[i], net.members[j]};
      }
    }
  const Vector dv = distance_to_net(space, net.members);
  for (Index p = 0; p < space.size(); ++p) {
    cert.max_cover_distance = std::max(cert.max_cover_distance, dv(p));
    if (!(dv(p) < eps) && cert.covering) {
      cert.covering = false;
      cert.uncovered_point = p;
    }
  }
  const auto owner = net.voronoi.empty() ? voronoi_assign(space, net.members) : net.voronoi;
  for (Index z : net.members) {
    bool good = owner[z] == z;
    for (Index p = 0; p < space.size() && good; ++p) {
      const double d = space.distance(p, z);
      if (d < eps / 2 && owner[p] != z) good = false;
      if (owner[p] == z && d > eps) good = false;
    }
    if (!good && cert.voronoi_inclusion) {
      cert.voronoi_inclusion = false;
      cert.inclusion_violation = z;
    }
  }
  return cert;
}

Index PartitionOfUnity::member_slot(Index z) const {
  const auto it = std::find(net.members.begin(), net.members.end(), z);
  if (it == net.members.end()) throw DomainError("point is not a net member");
  return static_cast<Index>(it - net.members.begin());
}

PartitionOfUnity build_partition(const MetricGraph& graph, const EpsilonNet& net, const ScaleFunction& psi) {
  const auto& space = graph.space;
  const Index n = space.size();
  const Index k = net.members.size();
  const double eps = net.epsilon;
  const double plateau = eps / 4;
  PartitionOfUnity pu;
  pu.net = net;

  for (Index p = 0; p < n; ++p) {
    double nn = kInfinity;
    for (Index q = 0; q < n; ++q)
      if (q != p) nn = std::min(nn, space.distance(p, q));
    if (std::isfinite(nn)) pu.nearest_neighbor_hop = std::max(pu.nearest_neighbor_hop, nn);
  }
  pu.resolution_ok = eps >= 4 * pu.nearest_neighbor_hop;

  const Vector dv = distance_to_net(space, net.members);
  Matrix phi(k, n);
  parallel_for(k, [&](std::size_t s) {
    const Index z = net.members[s];
    Vector to_cell = Vector::Constant(n, kInfinity);
    for (Index q = 0; q < n; ++q)
      if (space.distance(q, z) == dv(q)) to_cell = to_cell.cwiseMin(space.distances().col(q));
    for (Index p = 0; p < n; ++p) phi(s, p) = std::clamp(1.0 - to_cell(p) / plateau, 0.0, 1.0);
  });
  const Eigen::RowVectorXd total = phi.colwise().sum();
  for (Index p = 0; p < n; ++p)
    if (!(total(p) > 0.0)) throw ConsistencyError("partition denominator vanished; the net is not covering");
  pu.psi = phi.array().rowwise() / total.array();

  for (Index p = 0; p < n; ++p) pu.max_sum_error = std::max(pu.max_sum_error, std::abs(pu.psi.col(p).sum() - 1.0));
  for (Index s = 0; s < k; ++s) {
    const Index z = net.members[s];
    for (Index p = 0; p < n; ++p) {
      const double d = space.distance(p, z);
      if (d < plateau) {
        if (pu.psi(s, p) != 1.0) pu.plateau_ok = false;
        for (Index t = 0; t < k; ++t)
          if (t != s && pu.psi(t, p) != 0.0) pu.disjoint_ok = false;
      }
      if (!(d < 5 * plateau) && pu.psi(s, p) != 0.0) pu.support_ok = false;
    }
  }

  pu.energies.resize(k);
  pu.energy_ratios.resize(k);
  parallel_for(k, [&](std::size_t s) {
    const Index z = net.members[s];
    pu.energies(s) = energy(graph.form, pu.psi.row(s).transpose());
    pu.energy_ratios(s) = pu.energies(s) * psi(eps) / volume(space, z, eps);
  });
  pu.energy_constant = k ? pu.energy_ratios.maxCoeff() : 0.0;
  return pu;
}

ReplayReport proof_replay(const MetricGraph& graph, const ScaleFunction& psi, Index x, Index y, double epsilon,
                          double center_constant) {
  const auto& space = graph.space;
  space.check_id(x);
  space.check_id(y);
  ReplayReport rep;
  rep.x = x;
  rep.y = y;
  rep.epsilon = epsilon;
  rep.distance = space.distance(x, y);
  if (!(epsilon > 0.0) || epsilon > rep.distance) throw DomainError("replay needs 0 < eps <= d(x, y)");
  const ProximityIndex index(space, epsilon);
  if (!index.connected()) throw HypothesisError("proximity graph is disconnected at this eps");

  rep.epsilon_prime = epsilon / 3;
  const auto net = build_net(space, rep.epsilon_prime, {x, y});
  rep.net_members = net.members;
  const auto hops = index.hop_counts(x).first;
  rep.n_eps = hops[y];

  Vector u_hat_full = Vector::Zero(space.size());
  for (Index z : net.members) {
    u_hat_full(z) = static_cast<double>(hops[z]);
    rep.u_hat.push_back(u_hat_full(z));
  }
  rep.u_hat_x = u_hat_full(x);
  rep.u_hat_y = u_hat_full(y);

  for (std::size_t i = 0; i < net.members.size(); ++i)
    for (std::size_t j = i + 1; j < net.members.size(); ++j) {
      const Index a = net.members[i], b = net.members[j];
      if (!(space.distance(a, b) < epsilon)) continue;
      ++rep.lipschitz_pairs;
      rep.max_lipschitz_gap = std::max(rep.max_lipschitz_gap, std::abs(u_hat_full(a) - u_hat_full(b)));
    }
  rep.lipschitz_ok = rep.max_lipschitz_gap <= 1.0;
  if (!rep.lipschitz_ok) throw ConsistencyError("u_hat is not 1-Lipschitz on eps-close members; N_eps is wrong");

  const auto pu = build_partition(graph, net, psi);
  rep.partition_ok = pu.ok();
  rep.partition_resolution_ok = pu.resolution_ok;
  Vector weights(net.members.size());
  for (std::size_t s = 0; s < net.members.size(); ++s) weights(s) = u_hat_full(net.members[s]);
  rep.u = pu.psi.transpose() * weights;

  const auto gamma = energy_measure(graph.form, rep.u);
  rep.energy = gamma.total;
  const double plateau = rep.epsilon_prime / 4;
  for (Index z : net.members) {
    const auto b = ball(space, z, plateau);
    std::vector<char> inside(space.size(), 0);
    for (Index p : b) {
      inside[p] = 1;
      if (rep.u(p) != u_hat_full(z)) rep.plateau_consistent = false;
    }
    // Gamma(u, u) at p only sees edges at p, so it vanishes wherever p and all its
    // neighbours lie in the plateau.
    for (Index p : b) {
      bool interior = true;
      for (const auto& nb : graph.form.neighbors(p))
        if (!inside[nb.to]) interior = false;
      if (!interior) continue;
      ++rep.gamma_vanishing_checked;
      if (gamma.density(p) != 0.0) rep.gamma_vanishing_ok = false;
    }
  }

  rep.radius = 2 * center_constant * rep.distance;
  std::vector<double> maximal(net.members.size());
  parallel_for(net.members.size(), [&](std::size_t s) {
    maximal[s] = truncated_maximal(space, gamma.density, net.members[s], rep.radius);
  });
  for (double m : maximal) rep.max_maximal = std::max(rep.max_maximal, m);
  rep.K = psi(epsilon) * rep.max_maximal;

  rep.two_point = two_point_check(graph, psi, rep.u, x, y, rep.radius);
  const double n = static_cast<double>(rep.n_eps);
  rep.recovered_constant = n * n * psi(epsilon) / psi(rep.distance);
  rep.chain_constant = rep.two_point.ratio * 2 * rep.K * psi(rep.radius) / psi(rep.distance);
  rep.recovered_ok = std::isfinite(rep.chain_constant) && rep.recovered_constant <= rep.chain_constant * (1 + 1e-12);
  return rep;
}

}  // namespace chainkit
