#include "chainkit/suites.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chainkit/chain.hpp"
#include "chainkit/dirichlet.hpp"
#include "chainkit/graph.hpp"
#include "chainkit/heat.hpp"
#include "chainkit/net.hpp"
#include "chainkit/parallel.hpp"
#include "chainkit/scale.hpp"

namespace chainkit {

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.passed; });
}

Json SuiteResult::to_json() const {
  Json doc;
  doc["suite"] = name;
  doc["passed"] = passed();
  doc["sandwich"] = {{"cases", sandwich_cases}, {"violations", sandwich_violations}};
  Json arr = Json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  doc["checks"] = arr;
  return doc;
}

SandwichTally sandwich_scan(const FiniteMetricMeasureSpace& space, const std::vector<double>& epsilons) {
  SandwichTally tally;
  const Index n = space.size();
  for (double eps : epsilons) {
    const ProximityIndex idx(space, eps);
    std::vector<SandwichTally> per(n);
    parallel_for(n, [&](std::size_t x) {
      const auto dist = idx.chain_distances(x).first;
      const auto hops = idx.hop_counts(x).first;
      for (Index y = x + 1; y < n; ++y) {
        if (!std::isfinite(dist(y))) continue;
        ChainAnalysis a;
        a.x = x;
        a.y = y;
        a.epsilon = eps;
        a.d_eps = dist(y);
        a.n_eps = hops[y];
        ++per[x].cases;
        if (!chain_sandwich_check(a)) ++per[x].violations;
        per[x].max_hop_excess = std::max(per[x].max_hop_excess,
                                         static_cast<double>(a.n_eps) / static_cast<double>(chain_ceiling(a.d_eps, eps)));
      }
    });
    for (const auto& p : per) {
      tally.cases += p.cases;
      tally.violations += p.violations;
      tally.max_hop_excess = std::max(tally.max_hop_excess, p.max_hop_excess);
    }
  }
  return tally;
}

FiniteMetricMeasureSpace snowflake_grid(double spacing, double beta) {
  const auto n = static_cast<Index>(std::llround(1.0 / spacing)) + 1;
  return snowflake_space(line_coords(n, spacing), beta);
}

namespace {

void add_sandwich(SuiteResult& res, const std::string& label, const FiniteMetricMeasureSpace& space,
                  const std::vector<double>& eps) {
  const auto t = sandwich_scan(space, eps);
  res.sandwich_cases += t.cases;
  res.sandwich_violations += t.violations;
  res.checks.push_back({"sandwich_" + label, t.violations == 0,
                        {{"cases", t.cases}, {"violations", t.violations}, {"max_hop_excess", t.max_hop_excess}}});
}

// Exact d_eps = d over all pairs and scales.
SuiteCheck geodesic_identity(const std::string& label, const FiniteMetricMeasureSpace& space,
                             const std::vector<double>& eps) {
  std::size_t mismatches = 0, cases = 0;
  double worst = 0.0;
  for (double e : eps) {
    const Matrix de = all_pairs_chain_metric(ProximityIndex(space, e));
    cases += static_cast<std::size_t>(space.size() * space.size());
    const Matrix diff = (de - space.distances()).cwiseAbs();
    mismatches += static_cast<std::size_t>((de.array() != space.distances().array()).count());
    worst = std::max(worst, diff.maxCoeff());
  }
  return {"geodesic_identity_" + label, mismatches == 0,
          {{"cases", cases}, {"mismatches", mismatches}, {"max_abs_difference", worst}, {"epsilons", eps}}};
}

std::vector<double> geometric(double lo, double hi, int count) {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1));
  return out;
}

}  // namespace

SuiteResult geodesic_suite() {
  SuiteResult res;
  res.name = "geodesic";
  const auto line = euclidean_space(line_coords(101));
  const auto eps_line = geometric(1.5, 60.0, 10);
  res.checks.push_back(geodesic_identity("line101", line, eps_line));

  const auto cycle = make_metric_graph(cycle_graph(60));
  const auto eps_cycle = geometric(1.5, 30.0, 10);
  res.checks.push_back(geodesic_identity("cycle60", cycle.space, eps_cycle));

  const auto gasket = make_metric_graph(sierpinski_gasket_graph(3).form);
  const auto eps_gasket = geometric(1.5, gasket.space.diameter(), 10);
  res.checks.push_back(geodesic_identity("gasket3", gasket.space, eps_gasket));

  const auto psi = ScaleFunction::power(2.0);
  const auto scan = main_inequality_scan(line, psi, all_pairs(line), eps_line);
  double lo = kInfinity;
  for (const auto& r : scan.rows) lo = std::min(lo, r.ratio);
  res.checks.push_back({"unit_ratio_line101", std::abs(scan.worst_ratio - 1.0) <= 1e-12 && std::abs(lo - 1.0) <= 1e-12,
                        {{"max_ratio", scan.worst_ratio}, {"min_ratio", lo}, {"rows", scan.rows.size()}}});

  add_sandwich(res, "line101", line, eps_line);
  add_sandwich(res, "cycle60", cycle.space, eps_cycle);
  add_sandwich(res, "gasket3", gasket.space, eps_gasket);
  return res;
}

SuiteResult snowflake_suite() {
  SuiteResult res;
  res.name = "snowflake";
  const double beta = 3.0;
  const auto space = snowflake_grid(0.01, beta);
  const auto psi = ScaleFunction::power(beta);

  const auto ex = analyze_chain(snowflake_grid(0.1, beta), 0.22, 0, 10);
  const double expected = 10 * std::pow(0.1, 2.0 / 3.0);
  res.checks.push_back({"coarse_grid_chain_metric", std::abs(ex.d_eps - expected) <= 1e-12 * expected && ex.n_eps == 10,
                        {{"d_eps", ex.d_eps}, {"expected", expected}, {"n_eps", ex.n_eps}}});

  const auto eps = geometric(0.05, 0.5, 10);
  const auto scan = main_inequality_scan(space, psi, all_pairs(space), eps);
  double lo = kInfinity, hi = 0.0;
  std::size_t used = 0;
  Json per_eps = Json::array();
  for (double e : eps) {
    double elo = kInfinity, ehi = 0.0;
    std::size_t count = 0;
    for (const auto& r : scan.rows) {
      if (r.epsilon != e || r.d < 10 * e) continue;
      ++count;
      elo = std::min(elo, r.ratio);
      ehi = std::max(ehi, r.ratio);
    }
    used += count;
    lo = std::min(lo, elo);
    hi = std::max(hi, ehi);
    per_eps.push_back({{"epsilon", e}, {"pairs", count}, {"min_ratio", count ? elo : 0.0}, {"max_ratio", ehi}});
  }
  res.checks.push_back({"sharpness_window", used > 0 && lo >= 0.5 && hi <= 2.0,
                        {{"pairs", used},
                         {"min_ratio", lo},
                         {"max_ratio", hi},
                         {"all_pairs_max_ratio", scan.worst_ratio},
                         {"per_epsilon", per_eps}}});

  Json trend = Json::array();
  for (const auto& t : scan.trend) trend.push_back({{"epsilon", t.epsilon}, {"max_functional", t.max_functional}});
  const auto kc = chain_condition_estimate(space, {0.5, 0.3, 0.22, 0.1, 0.05});
  const auto kc_coarse = chain_condition_estimate(space, {0.5});
  res.checks.push_back({"chain_condition_fails", kc.k_hat > kc_coarse.k_hat,
                        {{"k_hat", kc.k_hat}, {"k_hat_eps_0.5", kc_coarse.k_hat}, {"trend", trend}}});

  add_sandwich(res, "snowflake_grid", space, eps);
  return res;
}

SuiteResult gasket_suite() {
  SuiteResult res;
  res.name = "gasket";

  const auto g4 = sierpinski_gasket_graph(4);
  const auto g4m = make_metric_graph(g4.form);
  add_sandwich(res, "gasket4_graph", g4m.space, geometric(1.5, g4m.space.diameter(), 8));
  const auto g4e = euclidean_space(g4.coords);
  add_sandwich(res, "gasket4_euclidean", g4e, geometric(1.01, g4e.diameter(), 8));

  const std::vector<double> times{0.1, 1, 10, 100};
  const auto cycle = make_metric_graph(cycle_graph(200));
  const auto g5 = make_metric_graph(sierpinski_gasket_graph(5).form);
  for (const auto* mg : {&cycle, &g5}) {
    const auto table = heat_kernel(mg->form, times);
    const auto inv = check_heat_invariants(mg->form, table);
    res.checks.push_back({std::string("heat_invariants_") + (mg == &cycle ? "cycle200" : "gasket5"), inv.ok(),
                          {{"symmetry_error", inv.symmetry_error},
                           {"stochasticity_error", inv.stochasticity_error},
                           {"semigroup_error", inv.semigroup_error},
                           {"min_value", inv.min_value}}});
  }

  std::vector<double> fit_times(16);
  for (int i = 0; i < 16; ++i) fit_times[i] = std::pow(10.0, 3.0 * i / 15.0);
  std::vector<Index> cyc_centers;
  for (Index c = 0; c < 200; c += 20) cyc_centers.push_back(c);
  const auto cyc_fit = sub_gaussian_fit(heat_kernel(cycle.form, fit_times, HeatMethod::Spectral, cyc_centers), cycle.space);

  const auto g6 = make_metric_graph(sierpinski_gasket_graph(6).form);
  std::vector<Index> g6_centers;
  for (Index c = 0; c < g6.space.size(); c += 37) g6_centers.push_back(c);
  const auto g6_fit = sub_gaussian_fit(heat_kernel(g6.form, fit_times, HeatMethod::Spectral, g6_centers), g6.space);

  const std::vector<double> radii{1, 2, 4, 8, 16};
  std::vector<Index> all6(g6.space.size()), all_cycle(200);
  std::iota(all6.begin(), all6.end(), Index{0});
  std::iota(all_cycle.begin(), all_cycle.end(), Index{0});
  const auto cyc_exit = exit_time_walk_dimension(cycle, all_cycle, radii);
  const auto g6_exit = exit_time_walk_dimension(g6, all6, radii);

  const auto fit_json = [](const SubGaussianFit& f) {
    return Json{{"beta", f.beta},        {"scale_c", f.scale_c},         {"c_lower", f.c_lower},
                {"C_upper", f.C_upper},  {"residual_rms", f.residual_rms}, {"samples", f.samples},
                {"diagonal_slope", f.diagonal_slope}};
  };
  const auto agree = [](double a, double b) { return std::abs(a - b) <= 0.1 * std::min(a, b); };
  res.checks.push_back({"subgaussian_cycle200", cyc_fit.beta >= 1.8 && cyc_fit.beta <= 2.2, fit_json(cyc_fit)});
  res.checks.push_back({"subgaussian_gasket6", g6_fit.beta >= 2.09 && g6_fit.beta <= 2.55, fit_json(g6_fit)});
  res.checks.push_back({"exit_time_cycle200", cyc_exit.beta_hat >= 1.8 && cyc_exit.beta_hat <= 2.2,
                        {{"beta_hat", cyc_exit.beta_hat}, {"excluded", cyc_exit.excluded}}});
  res.checks.push_back({"exit_time_gasket6", g6_exit.beta_hat >= 2.09 && g6_exit.beta_hat <= 2.55,
                        {{"beta_hat", g6_exit.beta_hat}, {"excluded", g6_exit.excluded}}});
  res.checks.push_back({"estimators_agree", agree(cyc_fit.beta, cyc_exit.beta_hat) && agree(g6_fit.beta, g6_exit.beta_hat),
                        {{"cycle200", {cyc_fit.beta, cyc_exit.beta_hat}}, {"gasket6", {g6_fit.beta, g6_exit.beta_hat}}}});
  return res;
}

SuiteResult replay_suite() {
  SuiteResult res;
  res.name = "replay";
  const auto path = make_metric_graph(path_graph(101));
  const auto psi = ScaleFunction::power(2.0);
  const auto rep = proof_replay(path, psi, 0, 100, 6.0);
  res.checks.push_back({"lipschitz", rep.lipschitz_ok,
                        {{"pairs", rep.lipschitz_pairs}, {"max_gap", rep.max_lipschitz_gap}}});
  res.checks.push_back({"plateaus", rep.plateau_consistent && rep.gamma_vanishing_ok && rep.partition_ok,
                        {{"gamma_vanishing_checked", rep.gamma_vanishing_checked},
                         {"partition_resolution_ok", rep.partition_resolution_ok}}});
  res.checks.push_back({"maximal_constant", rep.K <= 50.0, {{"K", rep.K}, {"R", rep.radius}}});
  res.checks.push_back({"recovered_inequality", rep.recovered_ok,
                        {{"n_eps", rep.n_eps},
                         {"recovered_constant", rep.recovered_constant},
                         {"chain_constant", rep.chain_constant},
                         {"two_point_ratio", rep.two_point.ratio},
                         {"u_hat_x", rep.u_hat_x},
                         {"u_hat_y", rep.u_hat_y}}});
  return res;
}

std::vector<std::string> suite_names() { return {"geodesic", "snowflake", "gasket", "replay"}; }

SuiteResult run_suite(const std::string& name) {
  if (name == "geodesic") return geodesic_suite();
  if (name == "snowflake") return snowflake_suite();
  if (name == "gasket") return gasket_suite();
  if (name == "replay") return replay_suite();
  throw InputError("unknown suite: " + name);
}

}  // namespace chainkit
