#pragma once

#include <optional>
#include <vector>

#include "chainkit/chain.hpp"
#include "chainkit/common.hpp"
#include "chainkit/dirichlet.hpp"
#include "chainkit/graph.hpp"
#include "chainkit/scale.hpp"
#include "chainkit/space.hpp"

namespace chainkit {

/// Maximal eps-separated subset with its Voronoi assignment.
struct EpsilonNet {
  double epsilon = 0.0;
  std::vector<Index> members;      // forced members first, then ascending ids
  std::vector<Index> include_set;
  std::vector<Index> voronoi;      // point id -> owning member id

  bool contains(Index p) const;
};

/// Greedy construction: seed with `include`, then add every point (ascending id)
/// at distance >= eps from all current members. Throws InputError if the include
/// set is not eps-separated.
EpsilonNet build_net(const FiniteMetricMeasureSpace& space, double epsilon, const std::vector<Index>& include = {});

/// Nearest member per point, ties to the smallest member id.
std::vector<Index> voronoi_assign(const FiniteMetricMeasureSpace& space, const std::vector<Index>& members);

/// Cell R_z = {p : d(p, z) = d(p, V)}. Cells of different members may share
/// boundary points; this is the overlapping version, not the tie-broken one.
std::vector<Index> voronoi_cell(const FiniteMetricMeasureSpace& space, const std::vector<Index>& members, Index z);

struct NetCertificate {
  bool separated = true;
  bool covering = true;
  bool voronoi_inclusion = true;  // B(z, eps/2) in R_z in closed ball(z, eps)
  double min_separation = kInfinity;
  double max_cover_distance = 0.0;
  std::optional<PointPair> separation_violation;
  std::optional<Index> uncovered_point;
  std::optional<Index> inclusion_violation;  // offending member

  bool ok() const { return separated && covering && voronoi_inclusion; }
};

NetCertificate certify_net(const FiniteMetricMeasureSpace& space, const EpsilonNet& net);

/// psi(k, p) is the value of the bump of members[k] at vertex p.
struct PartitionOfUnity {
  EpsilonNet net;
  Matrix psi;
  Vector energies;                 // E(psi_z, psi_z)
  Vector energy_ratios;            // E(psi_z, psi_z) Psi(eps) / m(B(z, eps))
  double energy_constant = 0.0;    // max of energy_ratios
  double max_sum_error = 0.0;      // (a)
  bool plateau_ok = true;          // (b) psi_z = 1 on B(z, eps/4)
  bool support_ok = true;          // (b) psi_z = 0 off B(z, 5 eps/4)
  bool disjoint_ok = true;         // (c)
  bool resolution_ok = true;       // eps >= 4 * max nearest-neighbour distance
  double nearest_neighbor_hop = 0.0;

  bool ok() const { return max_sum_error <= 1e-12 && plateau_ok && support_ok && disjoint_ok; }
  Index member_slot(Index z) const;
};

/// Bumps phi_z(p) = clamp(1 - d(p, R_z) / (eps/4), 0, 1), normalised by their sum.
/// Properties (a)-(c) hold for every eps-net; the resolution flag only records
/// whether the plateaus B(z, eps/4) contain more than their centre.
PartitionOfUnity build_partition(const MetricGraph& graph, const EpsilonNet& net, const ScaleFunction& psi);

struct ReplayReport {
  Index x = 0;
  Index y = 0;
  double epsilon = 0.0;
  double epsilon_prime = 0.0;
  double distance = 0.0;
  std::size_t n_eps = 0;
  std::vector<Index> net_members;
  std::vector<double> u_hat;  // N_eps(x, z) per member
  double u_hat_x = 0.0;
  double u_hat_y = 0.0;
  std::size_t lipschitz_pairs = 0;
  double max_lipschitz_gap = 0.0;
  bool lipschitz_ok = true;
  bool plateau_consistent = true;  // u = u_hat(z) on B(z, eps'/4)
  std::size_t gamma_vanishing_checked = 0;
  bool gamma_vanishing_ok = true;
  double energy = 0.0;
  double radius = 0.0;  // R = 2 C d(x, y)
  double max_maximal = 0.0;
  double K = 0.0;  // Psi(eps) max_z M_R Gamma(u, u)(z)
  TwoPointReport two_point;
  double recovered_constant = 0.0;  // N^2 Psi(eps) / Psi(d)
  double chain_constant = 0.0;      // ratio * 2K * Psi(R) / Psi(d)
  bool recovered_ok = false;
  bool partition_ok = false;
  bool partition_resolution_ok = false;
  Vector u;

  bool ok() const { return lipschitz_ok && plateau_consistent && gamma_vanishing_ok && recovered_ok && partition_ok; }
};

/// Rebuilds the test function of the chain-length lower bound on a graph and
/// measures every constant along the way. `center_constant` is the C in
/// R = 2 C d(x, y).
ReplayReport proof_replay(const MetricGraph& graph, const ScaleFunction& psi, Index x, Index y, double epsilon,
                          double center_constant = 2.0);

}  // namespace chainkit
