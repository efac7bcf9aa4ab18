#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gratwave/dirac.hpp"
#include "gratwave/existence.hpp"
#include "gratwave/gn.hpp"
#include "gratwave/graph.hpp"
#include "gratwave/nls.hpp"

namespace gratwave::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read graph file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["graph"] = c.graph_path;
  j["p"] = c.p;
  j["mass"] = c.mass ? Json(*c.mass) : Json(nullptr);
  j["alpha"] = c.alpha;
  j["h"] = c.h;
  j["trunc"] = c.trunc;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["m"] = c.m;
  j["c"] = c.c;
  j["c_schedule"] = c.c_schedule;
  j["lambda"] = c.lambda ? Json(*c.lambda) : Json(nullptr);
  j["omega"] = c.omega ? Json(*c.omega) : Json(nullptr);
  if (c.command == "sweep") j["masses"] = c.masses;
  if (c.command == "gn") {
    j["variant"] = c.variant;
    j["levels"] = c.levels;
  }
  j["format"] = c.format;
  return j;
}

Json certificate_json(const Certificate& cert) {
  Json numbers = Json::object();
  for (const auto& [k, v] : cert.numbers) numbers[k] = v;
  return {{"numbers", numbers}, {"notes", cert.notes}};
}

Json topology_json(const TopologyReport& t, const CycleCovering& cover) {
  Json j;
  j["n_halflines"] = t.n_halflines;
  j["core_length"] = t.core_length;
  j["has_terminal_edge"] = t.has_terminal_edge;
  j["admits_cycle_covering"] = t.admits_cycle_covering;
  j["blocking_bridge"] = cover.bridge ? Json(*cover.bridge) : Json(nullptr);
  j["is_tree"] = t.is_tree;
  j["n_pendants"] = t.n_pendants;
  j["cut_edges"] = t.cut_edges;
  return j;
}

std::string state_csv(const Grid& grid, const Eigen::VectorXd& u) {
  std::string s = "edge,x,value\n";
  char buf[256];
  for (const auto& eg : grid.edges())
    for (std::size_t k = 0; k < eg.dofs.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s,%.10g,%.17g\n", eg.name.c_str(), static_cast<double>(k) * eg.step,
                    dof_value(grid, u, eg.dofs[k]));
      s += buf;
    }
  return s;
}

Json state_json(const Grid& grid, const Eigen::VectorXd& u) {
  Json edges = Json::array();
  for (const auto& eg : grid.edges()) {
    std::vector<double> values;
    for (std::size_t d : eg.dofs) values.push_back(dof_value(grid, u, d));
    edges.push_back({{"edge", eg.name}, {"half_line", eg.half_line}, {"step", eg.step}, {"values", values}});
  }
  return edges;
}

void dump_laplacian(const RunConfig& cfg, const LaplacianOperators& ops) {
  if (cfg.dump_prefix.empty()) return;
  std::ostringstream s, m;
  write_coordinate(s, ops.stiffness);
  write_coordinate(m, ops.mass);
  write_text(cfg.dump_prefix + "_stiffness.txt", s.str(), std::cout);
  write_text(cfg.dump_prefix + "_mass.txt", m.str(), std::cout);
}

void dump_dirac(const RunConfig& cfg, const DiracOperator& op) {
  if (cfg.dump_prefix.empty()) return;
  std::ostringstream d;
  write_coordinate(d, op.matrix);
  write_text(cfg.dump_prefix + "_dirac.txt", d.str(), std::cout);
}

void validate_common(const RunConfig& cfg) {
  if (!(cfg.h > 0.0)) throw InputError("--h must be positive");
  if (!(cfg.trunc > 0.0)) throw InputError("--trunc must be positive");
  if (!(cfg.tol > 0.0)) throw InputError("--tol must be positive");
  if (cfg.max_iter <= 0) throw InputError("--max-iter must be positive");
  if (!(cfg.p > 2.0) || cfg.p > 6.0) throw InputError("--p must lie in (2, 6]");
  if (cfg.format != "json" && cfg.format != "csv") throw InputError("--format must be json or csv");
}

GroundStateOptions nls_options(const RunConfig& cfg) {
  GroundStateOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  return o;
}

struct Context {
  RunConfig cfg;
  MetricGraph graph;
  std::string hash;
};

Json document(const Context& ctx) {
  Json j;
  j["config"] = config_json(ctx.cfg);
  j["graph_hash"] = ctx.hash;
  return j;
}

int emit(const Context& ctx, const Json& doc, std::ostream& out) {
  write_text(ctx.cfg.out, doc.dump(2) + "\n", out);
  return 0;
}

int cmd_classify(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.cfg;
  const auto& g = ctx.graph;
  Json doc = document(ctx);
  TopologyReport topo = classify_topology(g);
  doc["topology"] = topology_json(topo, admits_cycle_covering(g));
  GnOptions gn{.h = cfg.h, .truncation = cfg.trunc};

  if (cfg.p < 4.0) {
    doc["regime"] = "subcritical p < 4";
    doc["verdict"] = "ExistsByThm";
    doc["note"] = "ground states exist for every mass when p < 4";
  } else if (cfg.p < 6.0) {
    doc["regime"] = "subcritical 4 <= p < 6";
    GnConstants constants = estimate_gn_constants(g, cfg.p, gn);
    doc["gn_constants"] = {{"C_G_p", constants.whole_p}, {"C_G_inf", constants.sup}};
    if (cfg.mass) {
      SubcriticalVerdict v = classify_subcritical(g, *cfg.mass, cfg.p, constants);
      doc["verdict"] = to_string(v.verdict);
      doc["certificate"] = certificate_json(v.certificate);
      Competitor best = best_competitor(g, *cfg.mass, cfg.p);
      doc["competitor"] = {{"kappa", best.kappa}, {"energy", best.energy}};
      NonexistenceFlags flags = nonexistence_check(g, *cfg.mass, cfg.p, constants);
      doc["nonexistence"] = {{"no_nonpositive_lambda", flags.no_nonpositive_lambda},
                             {"no_nonnegative_lambda", flags.no_nonnegative_lambda},
                             {"certificate", certificate_json(flags.certificate)}};
    } else {
      doc["verdict"] = nullptr;
      doc["nonexistence"] = {{"no_nonpositive_lambda", nullptr},
                             {"no_nonnegative_lambda", topo.is_tree && topo.n_pendants <= 1}};
    }
  } else {
    doc["regime"] = "critical p = 6";
    CriticalClassification crit = classify_critical(g, gn);
    doc["critical"] = {{"case", to_string(crit.tag)},
                       {"mu_K", crit.mu_k},
                       {"mu_R", kLineCriticalMass},
                       {"mu_R_plus", kHalfLineCriticalMass},
                       {"ground_states", crit.ground_states},
                       {"window", crit.ground_states ? Json::array({crit.window_lo, crit.window_hi}) : Json(nullptr)},
                       {"summary", crit.summary}};
  }
  return emit(ctx, doc, out);
}

int cmd_ground_state(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.cfg;
  if (!cfg.mass) throw InputError("ground-state requires --mass");
  Grid grid = Grid::build(ctx.graph, cfg.h, cfg.trunc);
  NlsProblem prob = NlsProblem::create(grid, cfg.p, *cfg.mass, cfg.alpha);
  dump_laplacian(cfg, *prob.ops);
  SolverReport rep = ground_state(prob, std::nullopt, nls_options(cfg));

  if (!cfg.state_csv.empty()) write_text(cfg.state_csv, state_csv(grid, rep.state), out);
  if (cfg.format == "csv") {
    write_text(cfg.out, state_csv(grid, rep.state), out);
  } else {
    Json doc = document(ctx);
    doc["energy"] = rep.energy;
    doc["lagrange"] = rep.lagrange;
    doc["residual"] = rep.residual;
    doc["mass"] = field_mass(rep.state, prob);
    doc["iterations"] = rep.iterations;
    doc["newton_iterations"] = rep.newton_iterations;
    doc["converged"] = rep.converged;
    doc["max_abs"] = rep.state.cwiseAbs().maxCoeff();
    doc["state"] = state_json(grid, rep.state);
    emit(ctx, doc, out);
  }
  if (!rep.converged) throw SolverFailure("ground state did not converge within --max-iter");
  return 0;
}

int cmd_gn(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.cfg;
  GnVariant variant;
  if (cfg.variant == "whole") variant = GnVariant::WholeGraph;
  else if (cfg.variant == "core") variant = GnVariant::CoreRestricted;
  else if (cfg.variant == "sup") variant = GnVariant::SupNorm;
  else throw InputError("--variant must be whole, core or sup");
  if (cfg.levels < 1) throw InputError("--levels must be at least 1");
  GnEstimate est = gn_constant(ctx.graph, cfg.p, variant,
                               {.h = cfg.h, .truncation = cfg.trunc, .levels = cfg.levels, .max_iter = cfg.max_iter});
  Json doc = document(ctx);
  doc["variant"] = cfg.variant;
  doc["value"] = est.value;
  if (variant != GnVariant::SupNorm && cfg.p == 6.0) doc["critical_mass"] = critical_mass(est.value);
  Json hist = Json::array();
  for (const auto& [h, v] : est.history) hist.push_back({{"h", h}, {"value", v}});
  doc["history"] = hist;
  if (!cfg.state_csv.empty()) write_text(cfg.state_csv, state_csv(*est.grid, est.maximizer), out);
  return emit(ctx, doc, out);
}

int cmd_bound_state(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.cfg;
  if (!cfg.omega) throw InputError("bound-state requires --omega");
  Grid grid = Grid::build(ctx.graph, cfg.h, cfg.trunc);
  NldeProblem prob = NldeProblem::create(grid, cfg.m, cfg.c, cfg.p);
  dump_dirac(cfg, *prob.op);
  NldeOptions opts;
  opts.tol = cfg.tol;
  opts.max_iter = std::min(cfg.max_iter, 200);
  NldeReport rep = bound_state(prob, *cfg.omega, std::nullopt, opts);
  Json doc = document(ctx);
  doc["omega"] = rep.omega;
  doc["action"] = rep.action;
  doc["residual"] = rep.residual;
  doc["iterations"] = rep.iterations;
  doc["converged"] = rep.converged;
  doc["phi_abs"] = state_json(grid, rep.spinor.phi.cwiseAbs());
  emit(ctx, doc, out);
  if (!rep.converged) throw SolverFailure("bound state did not converge");
  return 0;
}

int cmd_nonrel_limit(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.cfg;
  if (!cfg.lambda) throw InputError("nonrel-limit requires --lambda");
  if (!(*cfg.lambda < 0.0)) throw InputError("nonrel-limit requires --lambda < 0");
  std::vector<double> schedule = cfg.c_schedule.empty() ? std::vector<double>{cfg.c} : cfg.c_schedule;
  Grid grid = Grid::build(ctx.graph, cfg.h, cfg.trunc);
  NldeOptions opts;
  opts.tol = cfg.tol;
  LimitTable table = nonrel_limit(grid, *cfg.lambda, cfg.m, cfg.p, schedule, opts, nls_options(cfg));
  if (cfg.format == "csv") {
    std::ostringstream s;
    write_limit_csv(s, table);
    write_text(cfg.out, s.str(), out);
  } else {
    Json doc = document(ctx);
    Json rows = Json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"c", r.c},
                      {"omega", r.omega},
                      {"chi_l2", r.chi_l2},
                      {"phi_minus_u_h1", r.phi_minus_u_h1},
                      {"nlse_residual", r.nlse_residual}});
    doc["rows"] = rows;
    doc["rate_constant"] = table.rate_constant();
    doc["complete"] = table.complete;
    if (!table.complete) doc["failure"] = table.failure;
    emit(ctx, doc, out);
  }
  if (!table.complete) throw SolverFailure(table.failure);
  return 0;
}

unsigned thread_cap() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRATWAVE_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) n = std::min(n, static_cast<unsigned>(v));
  }
  return n;
}

int cmd_sweep(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.cfg;
  if (cfg.masses.empty()) throw InputError("sweep requires --masses");
  Grid grid = Grid::build(ctx.graph, cfg.h, cfg.trunc);
  NlsProblem base = NlsProblem::create(grid, cfg.p, cfg.masses.front(), cfg.alpha);
  std::vector<Json> results(cfg.masses.size());
  std::vector<int> codes(cfg.masses.size(), 0);
  std::size_t next = 0;
  std::mutex lock;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> g(lock);
        if (next == cfg.masses.size()) return;
        i = next++;
      }
      Json r;
      r["mass"] = cfg.masses[i];
      try {
        SolverReport rep = ground_state(base.with_mass(cfg.masses[i]), std::nullopt, nls_options(cfg));
        r["energy"] = rep.energy;
        r["lagrange"] = rep.lagrange;
        r["residual"] = rep.residual;
        r["converged"] = rep.converged;
        if (!rep.converged) codes[i] = static_cast<int>(ExitCode::SolverFailure);
      } catch (const Error& e) {
        r["error"] = e.what();
        codes[i] = static_cast<int>(e.code());
      }
      results[i] = std::move(r);
    }
  };
  unsigned n_threads = std::min<unsigned>(thread_cap(), static_cast<unsigned>(cfg.masses.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Json doc = document(ctx);
  doc["results"] = results;
  emit(ctx, doc, out);
  int code = 0;
  for (int c : codes) code = std::max(code, c);
  return code;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--graph", cfg.graph_path, "graph description file")->required();
  sub->add_option("--p", cfg.p, "nonlinearity exponent");
  sub->add_option("--alpha", cfg.alpha, "delta coupling strength at vertices");
  sub->add_option("--h", cfg.h, "grid step");
  sub->add_option("--trunc", cfg.trunc, "half-line truncation length");
  sub->add_option("--tol", cfg.tol, "solver tolerance");
  sub->add_option("--max-iter", cfg.max_iter, "iteration limit");
  sub->add_option("--out", cfg.out, "output file (default stdout)");
  sub->add_option("--format", cfg.format, "json or csv");
  sub->add_option("--dump-matrices", cfg.dump_prefix, "write assembled matrices as PREFIX_*.txt");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Standing waves of NLS and Dirac equations on metric graphs", "gratwave"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  auto* classify = app.add_subcommand("classify", "topology and existence verdicts");
  add_common(classify, cfg);
  classify->add_option("--mass", cfg.mass, "mass constraint");

  auto* gs = app.add_subcommand("ground-state", "NLS ground state of prescribed mass");
  add_common(gs, cfg);
  gs->add_option("--mass", cfg.mass, "mass constraint");
  gs->add_option("--state-csv", cfg.state_csv, "also write the state as edge,x,value CSV");

  auto* gn = app.add_subcommand("gn", "Gagliardo-Nirenberg constant estimate");
  add_common(gn, cfg);
  gn->add_option("--variant", cfg.variant, "whole, core or sup");
  gn->add_option("--levels", cfg.levels, "number of nested grids");
  gn->add_option("--state-csv", cfg.state_csv, "also write the maximizer as CSV");

  auto* bs = app.add_subcommand("bound-state", "NLDE bound state at fixed frequency");
  add_common(bs, cfg);
  bs->add_option("--m", cfg.m, "Dirac mass");
  bs->add_option("--c", cfg.c, "speed of light");
  bs->add_option("--omega", cfg.omega, "frequency inside the spectral gap");

  auto* limit = app.add_subcommand("nonrel-limit", "NLDE to NLSE limit table");
  add_common(limit, cfg);
  limit->add_option("--m", cfg.m, "Dirac mass");
  limit->add_option("--c", cfg.c, "single value of c");
  limit->add_option("--c-schedule", cfg.c_schedule, "increasing c values, comma separated")->delimiter(',');
  limit->add_option("--lambda", cfg.lambda, "NLS frequency, negative");

  auto* sweep = app.add_subcommand("sweep", "ground states over a list of masses, in parallel");
  add_common(sweep, cfg);
  sweep->add_option("--masses", cfg.masses, "comma separated masses")->delimiter(',')->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::InputError);
  }
  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  if (cfg.format.empty()) cfg.format = cfg.command == "nonrel-limit" ? "csv" : "json";

  try {
    validate_common(cfg);
    Context ctx{cfg, parse_graph(read_file(cfg.graph_path)), {}};
    ctx.hash = graph_hash(ctx.graph);
    if (cfg.command == "classify") return cmd_classify(ctx, out);
    if (cfg.command == "ground-state") return cmd_ground_state(ctx, out);
    if (cfg.command == "gn") return cmd_gn(ctx, out);
    if (cfg.command == "bound-state") return cmd_bound_state(ctx, out);
    if (cfg.command == "nonrel-limit") return cmd_nonrel_limit(ctx, out);
    return cmd_sweep(ctx, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::SolverFailure);
  }
}

}  // namespace gratwave::cli
