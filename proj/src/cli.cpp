#include "chainkit/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "chainkit/chain.hpp"
#include "chainkit/dirichlet.hpp"
#include "chainkit/heat.hpp"
#include "chainkit/json_io.hpp"
#include "chainkit/net.hpp"
#include "chainkit/parallel.hpp"
#include "chainkit/scale.hpp"
#include "chainkit/suites.hpp"

namespace chainkit {

namespace {

struct Context {
  std::ostream& out;
  bool json_only = false;
  std::string report_path;
};

std::vector<PointPair> parse_pairs(const std::string& text, const FiniteMetricMeasureSpace& space) {
  if (text == "all") return all_pairs(space);
  std::vector<PointPair> pairs;
  std::stringstream groups(text);
  std::string g;
  while (std::getline(groups, g, ';')) {
    const auto comma = g.find(',');
    if (comma == std::string::npos) throw InputError("pair selector must be 'all' or 'x,y[;x,y...]', got: " + text);
    try {
      const Index x = std::stoul(g.substr(0, comma)), y = std::stoul(g.substr(comma + 1));
      space.check_id(x);
      space.check_id(y);
      pairs.emplace_back(x, y);
    } catch (const std::logic_error&) {
      throw InputError("bad pair selector: " + g);
    }
  }
  return pairs;
}

Json ids_json(const std::vector<Index>& v) {
  Json a = Json::array();
  for (Index i : v) a.push_back(i);
  return a;
}

// Prints the report (and writes it if requested); human-readable lines go first.
int finish(Context& ctx, Json report, const std::string& summary, bool verified) {
  report["verified"] = verified;
  const std::string text = dump_json(report);
  if (!ctx.report_path.empty()) write_text_file(ctx.report_path, text);
  if (ctx.json_only) ctx.out << text;
  else {
    ctx.out << summary;
    if (ctx.report_path.empty() && summary.empty()) ctx.out << text;
  }
  return verified ? kExitOk : kExitVerificationFailed;
}

GraphDirichletForm load_graph(const std::string& edges, const std::string& vertices) {
  return read_graph_csv(edges, vertices.empty() ? std::optional<std::string>{} : vertices);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"chainkit: chain metrics, nets, Dirichlet forms and heat kernels on finite spaces"};
  app.require_subcommand(1);
  Context ctx{out, false, {}};
  std::size_t threads = 0;
  app.add_flag("--json-only", ctx.json_only, "Print only the JSON report");
  app.add_option("--threads", threads, "Worker threads (default: CHAINKIT_THREADS or all cores)");

  // chain
  auto* chain = app.add_subcommand("chain", "Chain metric d_eps, hop counts N_eps and the chain-length inequality");
  std::string space_path, psi_spec = "power:2", pairs_text = "all";
  std::vector<double> eps_list;
  chain->add_option("--space", space_path, "Space JSON file")->required();
  chain->add_option("--eps", eps_list, "Scales, comma separated")->required()->delimiter(',');
  chain->add_option("--pairs", pairs_text, "'all' or x,y[;x,y...]");
  chain->add_option("--psi", psi_spec, "Scale function");
  chain->add_option("--report", ctx.report_path, "Write the JSON report here");

  // net
  auto* net = app.add_subcommand("net", "Greedy eps-net with Voronoi assignment");
  double net_eps = 0.0;
  std::vector<Index> include;
  bool certify = false;
  net->add_option("--space", space_path, "Space JSON file")->required();
  net->add_option("--eps", net_eps, "Separation scale")->required();
  net->add_option("--include", include, "Forced members")->delimiter(',');
  net->add_flag("--certify", certify, "Verify separation, covering and Voronoi inclusion");
  net->add_option("--report", ctx.report_path, "Write the JSON report here");

  // replay
  auto* replay = app.add_subcommand("replay", "Rebuild the chain-length test function on a graph");
  std::string graph_path, vertex_path;
  Index rx = 0, ry = 0;
  double replay_eps = 0.0, center_c = 2.0;
  replay->add_option("--graph", graph_path, "Edge CSV")->required();
  replay->add_option("--vertices", vertex_path, "Vertex measure CSV");
  replay->add_option("--psi", psi_spec, "Scale function");
  replay->add_option("--x", rx)->required();
  replay->add_option("--y", ry)->required();
  replay->add_option("--eps", replay_eps)->required();
  replay->add_option("--center-constant", center_c, "C in R = 2 C d(x, y)");
  replay->add_option("--report", ctx.report_path, "Write the JSON report here");

  // dirichlet
  auto* dir = app.add_subcommand("dirichlet", "Capacities and Poincare constants on graphs");
  dir->require_subcommand(1);
  auto* cap = dir->add_subcommand("cap", "Capacity between two vertex sets");
  std::vector<Index> set_a, set_b;
  cap->add_option("--graph", graph_path)->required();
  cap->add_option("--vertices", vertex_path);
  cap->add_option("--A", set_a)->required()->delimiter(',');
  cap->add_option("--B", set_b)->required()->delimiter(',');
  cap->add_option("--report", ctx.report_path);
  auto* poinc = dir->add_subcommand("poincare", "Optimal Poincare constant on a ball");
  Index px = 0;
  double pr = 0.0, pA = 2.0;
  poinc->add_option("--graph", graph_path)->required();
  poinc->add_option("--vertices", vertex_path);
  poinc->add_option("--psi", psi_spec);
  poinc->add_option("--x", px)->required();
  poinc->add_option("--r", pr)->required();
  poinc->add_option("--A", pA, "Dilation of the energy ball");
  poinc->add_option("--report", ctx.report_path);

  // heat
  auto* heat = app.add_subcommand("heat", "Heat kernels on a graph");
  std::vector<double> times;
  std::string heat_out, method_name = "spectral";
  bool check = false;
  heat->add_option("--graph", graph_path)->required();
  heat->add_option("--vertices", vertex_path);
  heat->add_option("--times", times)->required()->delimiter(',');
  heat->add_option("--method", method_name)->check(CLI::IsMember({"spectral", "uniformized"}));
  heat->add_option("--out", heat_out, "CSV prefix; one matrix per time as PREFIX_<i>.csv");
  heat->add_flag("--check", check, "Verify symmetry, stochasticity, semigroup and positivity");
  heat->add_option("--report", ctx.report_path);

  // gasket
  auto* gasket = app.add_subcommand("gasket", "Sierpinski gasket graph generator");
  int level = 0;
  std::string gasket_out, gasket_vertices, gasket_coords;
  gasket->add_option("--level", level)->required();
  gasket->add_option("--out", gasket_out, "Edge CSV")->required();
  gasket->add_option("--vertices-out", gasket_vertices, "Vertex measure CSV");
  gasket->add_option("--coords-out", gasket_coords, "Planar coordinates CSV");

  // scale
  auto* scale = app.add_subcommand("scale", "Scale functions and the Phi transform");
  scale->require_subcommand(1);
  double s_val = 0.0, r_val = 0.0, v_val = 0.0, diam = kInfinity, cap_c1 = 1e6;
  std::vector<double> window;
  int ppd = 64;
  auto* sphi = scale->add_subcommand("phi", "Phi(s) = sup_r (s/r - 1/Psi(r))");
  sphi->add_option("--psi", psi_spec)->required();
  sphi->add_option("--s", s_val)->required();
  auto* seval = scale->add_subcommand("eval", "Psi(r)");
  seval->add_option("--psi", psi_spec)->required();
  seval->add_option("--r", r_val)->required();
  auto* sinv = scale->add_subcommand("inverse", "Psi^-1(v)");
  sinv->add_option("--psi", psi_spec)->required();
  sinv->add_option("--v", v_val)->required();
  double beta1 = 0.0, beta2 = 0.0, creg = 0.0;
  auto* sreg = scale->add_subcommand("regularity", "Grid certificate for the two-sided power bounds");
  sreg->add_option("--psi", psi_spec)->required();
  sreg->add_option("--window", window)->required()->delimiter(',')->expected(2);
  sreg->add_option("--beta1", beta1);
  sreg->add_option("--beta2", beta2);
  sreg->add_option("--C", creg);
  sreg->add_option("--points-per-decade", ppd);
  bool phi_reg = false;
  sreg->add_flag("--phi", phi_reg, "Certify Phi instead of Psi");
  auto* swalk = scale->add_subcommand("walkdim", "Walk-dimension lower-bound check");
  swalk->add_option("--psi", psi_spec)->required();
  swalk->add_option("--window", window)->required()->delimiter(',')->expected(2);
  swalk->add_option("--diam", diam, "Space diameter");
  swalk->add_option("--cap", cap_c1, "Largest acceptable C1");
  swalk->add_option("--points-per-decade", ppd);
  for (auto* sc : {sphi, seval, sinv, sreg, swalk}) sc->add_option("--report", ctx.report_path);

  // verify-all
  auto* verify = app.add_subcommand("verify-all", "Run the named verification suites");
  std::vector<std::string> suites;
  verify->add_option("--suite", suites, "Suite name (repeatable); default all")
      ->check(CLI::IsMember(suite_names()));
  verify->add_option("--report", ctx.report_path);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (threads > 0) set_thread_count(threads);

  Json config;
  config["command"] = app.get_subcommands().front()->get_name();
  config["args"] = args;

  try {
    if (chain->parsed()) {
      const auto space = read_space_json(space_path);
      const auto psi = ScaleFunction::parse(psi_spec);
      const auto pairs = parse_pairs(pairs_text, space);
      const auto scan = main_inequality_scan(space, psi, pairs, eps_list);
      Json report{{"config", config}};
      Json rows = Json::array();
      for (const auto& r : scan.rows)
        rows.push_back({{"x", r.x}, {"y", r.y}, {"epsilon", r.epsilon}, {"d", r.d}, {"d_eps", r.d_eps},
                        {"n_eps", r.n_eps}, {"ratio", r.ratio}, {"sandwich_ok", r.sandwich_ok}});
      report["rows"] = rows;
      Json trend = Json::array();
      for (const auto& t : scan.trend)
        trend.push_back({{"epsilon", t.epsilon}, {"max_functional", t.max_functional}, {"pairs", t.pairs}});
      report["trend"] = trend;
      report["worst_ratio"] = scan.worst_ratio;
      if (scan.worst)
        report["worst"] = {{"x", scan.worst->x}, {"y", scan.worst->y}, {"epsilon", scan.worst->epsilon}};
      report["skipped_below_epsilon"] = scan.skipped_below_epsilon;
      report["sandwich_violations"] = scan.sandwich_violations;
      report["max_hop_excess"] = scan.max_hop_excess;
      if (pairs_text != "all") {
        Json witnesses = Json::array();
        for (double e : eps_list)
          for (const auto& [x, y] : pairs) {
            const auto a = analyze_chain(space, e, x, y);
            witnesses.push_back({{"x", x}, {"y", y}, {"epsilon", e}, {"d_eps", a.d_eps},
                                 {"n_eps", a.n_eps == kNoChain ? Json("inf") : Json(a.n_eps)},
                                 {"witness_metric", ids_json(a.witness_metric)},
                                 {"witness_hops", ids_json(a.witness_hops)}});
          }
        report["witnesses"] = witnesses;
      }
      std::ostringstream s;
      s << "pairs scanned: " << scan.rows.size() << " (skipped d < eps: " << scan.skipped_below_epsilon << ")\n"
        << "worst ratio: " << format_double(scan.worst_ratio) << "\n"
        << "sandwich violations: " << scan.sandwich_violations << "\n";
      return finish(ctx, report, s.str(), scan.sandwich_violations == 0);
    }

    if (net->parsed()) {
      const auto space = read_space_json(space_path);
      const auto n = build_net(space, net_eps, include);
      Json report{{"config", config}, {"epsilon", net_eps}, {"members", ids_json(n.members)},
                  {"voronoi", ids_json(n.voronoi)}};
      bool ok = true;
      std::ostringstream s;
      s << "members (" << n.members.size() << "):";
      for (Index z : n.members) s << ' ' << z;
      s << "\n";
      if (certify) {
        const auto cert = certify_net(space, n);
        ok = cert.ok();
        report["certificate"] = {{"separated", cert.separated},
                                 {"covering", cert.covering},
                                 {"voronoi_inclusion", cert.voronoi_inclusion},
                                 {"min_separation", cert.min_separation},
                                 {"max_cover_distance", cert.max_cover_distance}};
        s << "certificate: " << (ok ? "ok" : "FAILED") << "\n";
      }
      return finish(ctx, report, s.str(), ok);
    }

    if (replay->parsed()) {
      const auto graph = make_metric_graph(load_graph(graph_path, vertex_path));
      const auto psi = ScaleFunction::parse(psi_spec);
      const auto rep = proof_replay(graph, psi, rx, ry, replay_eps, center_c);
      Json u_hat = Json::array();
      for (std::size_t i = 0; i < rep.net_members.size(); ++i)
        u_hat.push_back({{"z", rep.net_members[i]}, {"u_hat", rep.u_hat[i]}});
      Json report{{"config", config},
                  {"x", rep.x},
                  {"y", rep.y},
                  {"epsilon", rep.epsilon},
                  {"epsilon_prime", rep.epsilon_prime},
                  {"distance", rep.distance},
                  {"n_eps", rep.n_eps},
                  {"u_hat", u_hat},
                  {"u_hat_x", rep.u_hat_x},
                  {"u_hat_y", rep.u_hat_y},
                  {"lipschitz", {{"pairs", rep.lipschitz_pairs}, {"max_gap", rep.max_lipschitz_gap}, {"ok", rep.lipschitz_ok}}},
                  {"plateau_consistent", rep.plateau_consistent},
                  {"gamma_vanishing", {{"checked", rep.gamma_vanishing_checked}, {"ok", rep.gamma_vanishing_ok}}},
                  {"partition", {{"ok", rep.partition_ok}, {"resolution_ok", rep.partition_resolution_ok}}},
                  {"energy", rep.energy},
                  {"R", rep.radius},
                  {"max_maximal", rep.max_maximal},
                  {"K", rep.K},
                  {"two_point", {{"lhs", rep.two_point.lhs}, {"rhs_core", rep.two_point.rhs_core},
                                 {"ratio", rep.two_point.ratio}, {"center_scale", rep.two_point.center_scale}}},
                  {"recovered_constant", rep.recovered_constant},
                  {"chain_constant", rep.chain_constant}};
      std::ostringstream s;
      s << "N_eps(x, y) = " << rep.n_eps << "\n"
        << "K = Psi(eps) max M_R Gamma(u,u) = " << format_double(rep.K) << "\n"
        << "recovered C = " << format_double(rep.recovered_constant)
        << " <= chain C = " << format_double(rep.chain_constant) << "\n";
      return finish(ctx, report, s.str(), rep.ok());
    }

    if (cap->parsed()) {
      const auto form = load_graph(graph_path, vertex_path);
      const auto res = capacity(form, set_a, set_b);
      Json report{{"config", config}, {"capacity", res.capacity}, {"potential", to_json(res.potential)}};
      return finish(ctx, report, format_double(res.capacity) + "\n", true);
    }

    if (poinc->parsed()) {
      const auto graph = make_metric_graph(load_graph(graph_path, vertex_path));
      const auto psi = ScaleFunction::parse(psi_spec);
      const double c = poincare_constant(graph, psi, px, pr, pA);
      Json report{{"config", config}, {"poincare_constant", c}};
      return finish(ctx, report, format_double(c) + "\n", true);
    }

    if (heat->parsed()) {
      const auto form = load_graph(graph_path, vertex_path);
      const auto method = method_name == "spectral" ? HeatMethod::Spectral : HeatMethod::Uniformized;
      const auto table = heat_kernel(form, times, method);
      Json report{{"config", config}, {"times", table.times}, {"vertices", form.size()},
                  {"components", table.components}};
      if (!heat_out.empty())
        for (std::size_t i = 0; i < table.times.size(); ++i)
          write_text_file(heat_out + "_" + std::to_string(i) + ".csv", matrix_csv(table.kernels[i]));
      bool ok = true;
      std::ostringstream s;
      s << "kernels computed at " << table.times.size() << " times on " << form.size() << " vertices\n";
      if (check) {
        const auto inv = check_heat_invariants(form, table);
        ok = inv.ok();
        report["invariants"] = {{"symmetry_error", inv.symmetry_error},
                                {"stochasticity_error", inv.stochasticity_error},
                                {"semigroup_error", inv.semigroup_error},
                                {"min_value", inv.min_value},
                                {"ok", ok}};
        s << "invariants: " << (ok ? "ok" : "FAILED") << "\n";
      }
      return finish(ctx, report, s.str(), ok);
    }

    if (gasket->parsed()) {
      const auto g = sierpinski_gasket_graph(level);
      write_graph_csv(g.form, gasket_out, gasket_vertices.empty() ? std::optional<std::string>{} : gasket_vertices);
      if (!gasket_coords.empty()) write_text_file(gasket_coords, matrix_csv(g.coords));
      Json report{{"config", config}, {"level", level}, {"vertices", g.form.size()}, {"edges", g.form.edges().size()}};
      std::ostringstream s;
      s << "level " << level << ": " << g.form.size() << " vertices, " << g.form.edges().size() << " edges\n";
      return finish(ctx, report, s.str(), true);
    }

    if (scale->parsed()) {
      auto psi = ScaleFunction::parse(psi_spec);
      Json report{{"config", config}, {"psi", psi.describe()}};
      if (sphi->parsed()) {
        if (!(s_val > 0.0)) throw DomainError("Phi needs s > 0");
        const PhiTransform phi(psi);
        const double v = phi(s_val);
        report["phi"] = v;
        report["method"] = phi.method() == PhiTransform::Method::ClosedForm ? "closed-form" : "numeric-sup";
        return finish(ctx, report, format_double(v) + "\n", true);
      }
      if (seval->parsed()) {
        const double v = psi(r_val);
        report["value"] = v;
        return finish(ctx, report, format_double(v) + "\n", true);
      }
      if (sinv->parsed()) {
        const double v = psi.inverse(v_val);
        report["value"] = v;
        return finish(ctx, report, format_double(v) + "\n", true);
      }
      if (sreg->parsed()) {
        if (beta1 > 0.0 || beta2 > 0.0 || creg > 0.0)
          psi = psi.with_regularity(beta1 > 0.0 ? beta1 : psi.beta1(), beta2 > 0.0 ? beta2 : psi.beta2(),
                                    creg > 0.0 ? creg : psi.regularity_constant());
        const auto cert = phi_reg ? verify_phi_regularity(PhiTransform(psi), window[0], window[1], {ppd})
                                  : verify_regularity(psi, window[0], window[1], {ppd});
        report["certificate"] = {{"ok", cert.ok},
                                 {"best_constant", cert.best_constant},
                                 {"claimed_constant", cert.claimed_constant},
                                 {"lower_exponent", cert.lower_exponent},
                                 {"upper_exponent", cert.upper_exponent},
                                 {"grid_points", cert.grid_points},
                                 {"note", "grid-verified, not a proof"}};
        std::ostringstream s;
        s << (cert.ok ? "ok" : "FAILED") << " best C = " << format_double(cert.best_constant) << "\n";
        return finish(ctx, report, s.str(), cert.ok);
      }
      if (swalk->parsed()) {
        const auto cert = walk_dimension_lower_check(psi, diam, window[0], window[1], cap_c1, {ppd});
        report["certificate"] = {{"ok", cert.ok},
                                 {"best_constant", cert.best_constant},
                                 {"min_decade_exponent", cert.min_decade_exponent},
                                 {"cap", cert.cap},
                                 {"note", "grid-verified, not a proof"}};
        std::ostringstream s;
        s << (cert.ok ? "ok" : "FAILED") << " C1 = " << format_double(cert.best_constant) << "\n";
        return finish(ctx, report, s.str(), cert.ok);
      }
    }

    if (verify->parsed()) {
      if (suites.empty()) suites = suite_names();
      Json report{{"config", config}};
      Json results = Json::array();
      bool ok = true;
      std::ostringstream s;
      for (const auto& name : suites) {
        const auto res = run_suite(name);
        ok = ok && res.passed();
        results.push_back(res.to_json());
        for (const auto& c : res.checks) s << (c.passed ? "PASS " : "FAIL ") << name << "/" << c.name << "\n";
      }
      report["suites"] = results;
      return finish(ctx, report, s.str(), ok);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "no subcommand handled\n";
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace chainkit
