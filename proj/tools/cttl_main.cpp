// Command-line front end: solve caching policies, validate them in
// simulation, and emit plot data for the standard experiment sweeps.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cttl/csv.hpp"
#include "cttl/figures.hpp"
#include "cttl/lp.hpp"
#include "cttl/scenario.hpp"

namespace fs = std::filesystem;
using namespace cttl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGapWarning = 3;
constexpr int kExitInternal = 4;

struct CommonArgs {
  std::string scenario_path;
  std::string output_dir = "out";
  int jobs = 0;
};

Scenario load_scenario_or_defaults(const std::string& path) {
  if (path.empty()) return Scenario::defaults();
  return Scenario::load(path);
}

void apply_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SolveReport run_mode(const std::string& mode, const Scenario& s,
                     const DemandTables& tables, const CoverageDistribution& cov,
                     const Catalog& catalog, const PlannerOptions& popts) {
  if (mode == "greedy")
    return solve_single_cache_greedy(tables, s.costs, catalog,
                                     s.cache_capacity);
  switch (policy_mode_from_string(mode)) {
    case PolicyMode::Sttl:
      return solve_sttl(tables, cov, s.costs, catalog, s.cache_capacity, popts);
    case PolicyMode::Fttl:
      return solve_fttl(tables, cov, s.costs, catalog, s.cache_capacity, popts);
    case PolicyMode::Ttl:
      return solve_ttl(tables, cov, s.costs, catalog, s.cache_capacity, popts);
    case PolicyMode::Static:
      return solve_static(tables, cov, s.costs, catalog, s.cache_capacity,
                          popts);
  }
  throw std::invalid_argument("unknown mode " + mode);
}

int cmd_optimize(const CommonArgs& common, std::string mode_flag,
                 double gap_tol, long node_limit, double time_limit,
                 const std::string& formulation, const std::string& export_lp) {
  const Scenario s = load_scenario_or_defaults(common.scenario_path);
  apply_jobs(common.jobs);
  const Catalog catalog = s.build_catalog();
  const TimeGrid grid = s.build_grid();
  const DemandTables tables = compute_demand_tables(catalog, grid);
  const CoverageDistribution cov = s.build_coverage();

  PlannerOptions popts;
  popts.milp.gap_tol = gap_tol;
  popts.milp.node_limit = node_limit;
  popts.milp.time_limit_s = time_limit;
  if (formulation == "percoverage")
    popts.formulation = Formulation::PerCoverage;
  else if (formulation != "compact")
    throw std::invalid_argument("--formulation must be compact|percoverage");

  std::vector<std::string> modes;
  if (!mode_flag.empty()) {
    modes.push_back(mode_flag);
  } else {
    for (auto m : s.modes) modes.push_back(to_string(m));
  }

  fs::create_directories(common.output_dir);
  bool gap_warning = false;
  for (const std::string& mode : modes) {
    const SolveReport rep = run_mode(mode, s, tables, cov, catalog, popts);

    PolicyFile pf;
    pf.mode = rep.policy.mode;
    pf.grid = grid;
    pf.policy = rep.policy;
    pf.code_params = derive_all_code_params(rep.policy, catalog, cov.n_sbs(),
                                            s.quantize_max_denominator);
    pf.loads = rep.loads;
    pf.status = rep.status;
    pf.gap = rep.gap;
    pf.nodes = rep.nodes;
    pf.iterations = rep.iterations;
    pf.backend = rep.backend;
    pf.scenario_hash = s.hash();
    const std::string path =
        (fs::path(common.output_dir) / ("policy_" + mode + ".json")).string();
    save_policy(pf, path);

    std::cout << mode << ": normalized load " << rep.loads.w_normalized
              << " (MBS fraction "
              << rep.loads.r_mbs / (rep.loads.r_mbs + rep.loads.r_sbs)
              << ", status " << lp::to_string(rep.status);
    if (rep.status == lp::SolveStatus::Feasible) {
      std::cout << ", gap " << rep.gap;
      gap_warning = true;
    }
    std::cout << ") -> " << path << "\n";

    if (!export_lp.empty() && mode != "greedy") {
      const auto prog = build_epigraph_program(
          tables, cov, s.costs, catalog, s.cache_capacity,
          policy_mode_from_string(mode), popts.formulation);
      std::ofstream out(export_lp + "." + mode + ".lp");
      lp::write_lp_format(prog, out);
      std::cout << "  program -> " << export_lp << "." << mode << ".lp\n";
    }
  }
  return gap_warning ? kExitGapWarning : kExitOk;
}

int cmd_simulate(const CommonArgs& common, const std::string& policy_path,
                 const std::string& update_mode_flag, int replications,
                 std::uint64_t seed_flag, double horizon_flag) {
  const Scenario s = load_scenario_or_defaults(common.scenario_path);
  apply_jobs(common.jobs);
  const PolicyFile pf = load_policy(policy_path);

  const Catalog catalog = s.build_catalog();
  const TimeGrid grid = s.build_grid();
  if (pf.policy.n_files != catalog.n_files() ||
      pf.policy.n_slots != grid.n_slots())
    throw std::invalid_argument(
        "policy file dimensions do not match the scenario");

  SimConfig sim;
  sim.catalog = catalog;
  sim.grid = grid;
  sim.coverage = s.build_coverage();
  sim.geometry = s.geometry;
  sim.costs = s.costs;
  sim.policy = pf.policy;
  sim.horizon_hours = horizon_flag > 0 ? horizon_flag : s.sim.horizon_hours;
  sim.warmup_hours = s.sim.warmup_fraction * sim.horizon_hours;
  sim.seed = seed_flag ? seed_flag : s.sim.seed;
  sim.update_mode = update_mode_flag.empty()
                        ? s.sim.update_mode
                        : update_mode_from_string(update_mode_flag);
  sim.coverage_sampling = s.sim.coverage_mode;
  const int reps = replications > 0 ? replications : s.sim.replications;

  if (sim.expected_requests() < 1e4)
    std::cerr << "warning: expected request count " << sim.expected_requests()
              << " < 1e4; widen the horizon\n";

  const auto results = run_replications(sim, reps);
  const auto sum = summarize(results);

  fs::create_directories(common.output_dir);
  const std::string path =
      (fs::path(common.output_dir) / "simulation.csv").string();
  CsvWriter csv(path);
  csv.comment("tool_version", tool_version());
  csv.comment("scenario_hash", hash_hex(s.hash()));
  csv.comment("seed", std::to_string(sim.seed));
  csv.comment("mode", to_string(pf.mode));
  csv.comment("update_mode", to_string(sim.update_mode));
  csv.header({"replication", "w_normalized", "mbs_fraction", "r_sbs", "r_mbs",
              "r_cache", "ci_half_width", "events"});
  for (size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    csv.row_values(static_cast<long>(k), r.loads.w_normalized,
                   r.loads.r_mbs / (r.loads.r_mbs + r.loads.r_sbs),
                   r.loads.r_sbs, r.loads.r_mbs, r.loads.r_cache,
                   r.ci_half_width, static_cast<unsigned long>(r.events));
  }
  csv.row_values("summary", sum.mean_w_normalized, sum.mean_mbs_fraction, 0.0,
                 0.0, 0.0, sum.half_width, 0L);

  std::cout << "simulated " << reps << " replication(s), mean normalized load "
            << sum.mean_w_normalized << " +/- " << sum.half_width << " -> "
            << path << "\n";
  return kExitOk;
}

int cmd_figure(const CommonArgs& common, const std::string& figure_flag,
               double gap_tol, double time_limit) {
  const Scenario s = load_scenario_or_defaults(common.scenario_path);
  const FigureId id = figure_from_string(figure_flag);
  FigureOptions opts;
  opts.gap_tol = gap_tol;
  opts.time_limit_s = time_limit;
  opts.jobs = common.jobs;
  fs::create_directories(common.output_dir);
  const std::string path =
      (fs::path(common.output_dir) / ("figure_" + figure_flag + ".csv"))
          .string();
  write_figure_csv(id, s, path, opts);
  std::cout << "figure data -> " << path << "\n";
  return kExitOk;
}

int cmd_validate(const CommonArgs& common) {
  const Scenario s = load_scenario_or_defaults(common.scenario_path);
  apply_jobs(common.jobs);
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  const Catalog catalog = s.build_catalog();
  const TimeGrid grid = s.build_grid();
  const DemandTables tables = compute_demand_tables(catalog, grid);

  bool sums_ok = true;
  for (int i = 0; i < catalog.n_files(); ++i) {
    double sf = 0.0, sa = 0.0;
    for (int j = 0; j < tables.n_slots(); ++j) {
      sf += tables.request_prob(i, j);
      sa += tables.occupancy(i, j);
    }
    sums_ok = sums_ok && std::abs(sf - 1.0) < 1e-10 &&
              std::abs(sa - 1.0 / catalog.rate(i)) < 1e-8;
  }
  check("demand: request probabilities and occupancies normalize", sums_ok);
  check("demand: hazard rows non-increasing", tables.hazard_nonincreasing());

  const CoverageDistribution cov = s.build_coverage();
  double mass = 0.0;
  for (int b = 0; b <= cov.b_max(); ++b) mass += cov.gamma(b);
  check("coverage: distribution mass", std::abs(1.0 - mass) < 1e-9);

  const auto pwl = utility_breakpoints(cov);
  bool pwl_ok = true;
  for (int t = 0; t <= 100; ++t) {
    const double mu = t / 100.0;
    if (std::abs(pwl.value_at(mu) - utility(cov, mu)) > 1e-12) pwl_ok = false;
  }
  check("coverage: breakpoint description matches the direct sum", pwl_ok);

  bool concave_ok = true;
  for (int t = 1; t < 100; ++t) {
    const double m = t / 100.0;
    const double mid = utility(cov, m);
    const double avg = 0.5 * (utility(cov, m - 0.01) + utility(cov, m + 0.01));
    if (mid + 1e-12 < avg) concave_ok = false;
  }
  check("coverage: utility concave", concave_ok);

  if (cov.source() == CoverageDistribution::Source::PoissonPpp) {
    bool closed_ok = true;
    for (int k = 1; k <= 10; ++k) {
      const double mu = 1.0 / k;
      if (std::abs(utility(cov, mu) -
                   utility_poisson_closed_form(cov.lambda(), mu)) > 1e-9)
        closed_ok = false;
    }
    check("coverage: closed form matches the series", closed_ok);
  }

  const auto q = quantize_policy_row({1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0},
                                     s.quantize_max_denominator);
  const auto cp = derive_code_params(q, 3);
  check("mds: worked example round-trip", cp.k == 3 && cp.n == 9);

  return failures == 0 ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed coded TTL cache planning and simulation"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string mode_flag, update_mode_flag, figure_flag, formulation = "compact";
  std::string policy_path, export_lp;
  double gap_tol = 1e-4, time_limit = 300.0, horizon_flag = 0.0;
  long node_limit = 1000000;
  int replications = 0;
  std::uint64_t seed_flag = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", common.scenario_path,
                    "scenario JSON (defaults to the reference setup)");
    cmd->add_option("--output", common.output_dir, "output directory");
    cmd->add_option("--jobs", common.jobs, "worker threads (0 = default)");
  };

  auto* optimize = app.add_subcommand("optimize", "solve caching policies");
  add_common(optimize);
  optimize->add_option("--mode", mode_flag,
                       "ttl|fttl|sttl|static|greedy (default: scenario modes)");
  optimize->add_option("--gap-tol", gap_tol, "MILP relative gap tolerance");
  optimize->add_option("--node-limit", node_limit, "branch-and-bound nodes");
  optimize->add_option("--time-limit", time_limit, "MILP time limit seconds");
  optimize->add_option("--formulation", formulation, "compact|percoverage");
  optimize->add_option("--export-lp", export_lp,
                       "write the program in LP format to this path prefix");

  auto* simulate = app.add_subcommand(
      "simulate", "replay a policy in the discrete-event simulator");
  add_common(simulate);
  simulate->add_option("--policy", policy_path, "policy JSON from optimize")
      ->required();
  simulate->add_option("--update-mode", update_mode_flag, "sync|async");
  simulate->add_option("--replications", replications, "number of seeds");
  simulate->add_option("--seed", seed_flag, "base seed (0 = scenario seed)");
  simulate->add_option("--horizon", horizon_flag, "hours (0 = scenario)");

  auto* figure = app.add_subcommand("figure", "emit plot data CSV");
  add_common(figure);
  figure->add_option("--figure", figure_flag,
                     "density|shape|updatefreq|updatecost")
      ->required();
  figure->add_option("--gap-tol", gap_tol, "MILP relative gap tolerance");
  figure->add_option("--time-limit", time_limit, "MILP time limit seconds");

  auto* validate = app.add_subcommand(
      "validate", "run the invariant suite on a scenario");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed())
      return cmd_optimize(common, mode_flag, gap_tol, node_limit, time_limit,
                          formulation, export_lp);
    if (simulate->parsed())
      return cmd_simulate(common, policy_path, update_mode_flag, replications,
                          seed_flag, horizon_flag);
    if (figure->parsed())
      return cmd_figure(common, figure_flag, gap_tol, time_limit);
    if (validate->parsed()) return cmd_validate(common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
