#include "cttl/figures.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cttl/csv.hpp"

namespace cttl {

namespace {

struct ModeResult {
  double w_norm = 0.0;
  double mbs_frac = 0.0;
  double gap = 0.0;
};

PlannerOptions planner_options(const FigureOptions& opts) {
  PlannerOptions p;
  p.milp.gap_tol = opts.gap_tol;
  p.milp.node_limit = opts.node_limit;
  p.milp.time_limit_s = opts.time_limit_s;
  return p;
}

ModeResult solve_point(const Scenario& s, PolicyMode mode,
                       const FigureOptions& opts) try {
  const Catalog catalog = s.build_catalog();
  const TimeGrid grid = s.build_grid();
  const DemandTables tables = compute_demand_tables(catalog, grid);
  const CoverageDistribution cov = s.build_coverage();
  const PlannerOptions popts = planner_options(opts);
  SolveReport rep;
  switch (mode) {
    case PolicyMode::Sttl:
      rep = solve_sttl(tables, cov, s.costs, catalog, s.cache_capacity, popts);
      break;
    case PolicyMode::Fttl:
      rep = solve_fttl(tables, cov, s.costs, catalog, s.cache_capacity, popts);
      break;
    case PolicyMode::Ttl:
      rep = solve_ttl(tables, cov, s.costs, catalog, s.cache_capacity, popts);
      break;
    case PolicyMode::Static:
      rep = solve_static(tables, cov, s.costs, catalog, s.cache_capacity, popts);
      break;
  }
  ModeResult r;
  r.w_norm = rep.loads.w_normalized;
  r.mbs_frac = rep.loads.r_mbs / (rep.loads.r_mbs + rep.loads.r_sbs);
  r.gap = rep.gap;
  return r;
} catch (const std::exception&) {
  // Budget exhausted before any feasible solution; the CSV shows the hole.
  ModeResult r;
  r.w_norm = std::numeric_limits<double>::quiet_NaN();
  r.mbs_frac = std::numeric_limits<double>::quiet_NaN();
  r.gap = std::numeric_limits<double>::quiet_NaN();
  return r;
}

struct AsyncResult {
  double sync_mean = 0.0, sync_ci = 0.0;
  double async_mean = 0.0, async_ci = 0.0;
};

AsyncResult simulate_both_update_modes(const Scenario& s, PolicyMode mode,
                                       const FigureOptions& opts) {
  const Catalog catalog = s.build_catalog();
  const TimeGrid grid = s.build_grid();
  const DemandTables tables = compute_demand_tables(catalog, grid);
  const CoverageDistribution cov = s.build_coverage();
  const PlannerOptions popts = planner_options(opts);
  const SolveReport rep =
      mode == PolicyMode::Sttl
          ? solve_sttl(tables, cov, s.costs, catalog, s.cache_capacity, popts)
          : solve_ttl(tables, cov, s.costs, catalog, s.cache_capacity, popts);

  SimConfig sim;
  sim.catalog = catalog;
  sim.grid = grid;
  sim.coverage = cov;
  sim.geometry = s.geometry;
  sim.costs = s.costs;
  sim.policy = rep.policy;
  sim.horizon_hours = s.sim.horizon_hours;
  sim.warmup_hours = s.sim.warmup_hours();
  sim.seed = s.sim.seed;
  sim.coverage_sampling = s.sim.coverage_mode;

  AsyncResult out;
  sim.update_mode = UpdateMode::Synchronous;
  auto reps = run_replications_serial(sim, s.sim.replications);
  auto sum = summarize(reps);
  out.sync_mean = sum.mean_w_normalized;
  out.sync_ci = sum.half_width;
  sim.update_mode = UpdateMode::Asynchronous;
  reps = run_replications_serial(sim, s.sim.replications);
  sum = summarize(reps);
  out.async_mean = sum.mean_w_normalized;
  out.async_ci = sum.half_width;
  return out;
}

using RowFn = std::function<std::vector<std::string>(int)>;

void fill_rows(int n_points, int jobs, std::vector<std::vector<std::string>>& rows,
               const RowFn& fn) {
  rows.assign(static_cast<size_t>(n_points), {});
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < n_points; ++p) rows[static_cast<size_t>(p)] = fn(p);
}

void write_provenance(CsvWriter& csv, const Scenario& s, FigureId id) {
  char hash[32];
  snprintf(hash, sizeof hash, "%016llx",
           static_cast<unsigned long long>(s.hash()));
  csv.comment("tool_version", tool_version());
  csv.comment("figure", to_string(id));
  csv.comment("scenario_hash", hash);
  csv.comment("seed", std::to_string(s.sim.seed));
  csv.comment("modes", "static,ttl,fttl,sttl");
}

}  // namespace

FigureId figure_from_string(const std::string& s) {
  if (s == "density") return FigureId::Density;
  if (s == "shape") return FigureId::Shape;
  if (s == "updatefreq") return FigureId::UpdateFreq;
  if (s == "updatecost") return FigureId::UpdateCost;
  throw std::invalid_argument("unknown figure id: " + s +
                              " (density|shape|updatefreq|updatecost)");
}

const char* to_string(FigureId id) {
  switch (id) {
    case FigureId::Density:
      return "density";
    case FigureId::Shape:
      return "shape";
    case FigureId::UpdateFreq:
      return "updatefreq";
    case FigureId::UpdateCost:
      return "updatecost";
  }
  return "?";
}

void write_figure_csv(FigureId id, const Scenario& base,
                      const std::string& out_path, const FigureOptions& opts) {
  CsvWriter csv(out_path);
  std::vector<std::vector<std::string>> rows;

  switch (id) {
    case FigureId::Density: {
      if (!base.geometry)
        throw std::invalid_argument("density figure needs a geometry");
      const std::vector<int> b_values{13, 25, 50, 100, 151, 201};
      write_provenance(csv, base, id);
      csv.comment("columns",
                  "rho = SBS density per km^2; y columns are the fraction of "
                  "data downloaded from the MBS; *_f0 columns freeze the "
                  "caches (static)");
      csv.header({"rho", "n_sbs", "static", "ttl_f0", "ttl", "fttl", "sttl",
                  "ttl_gap", "fttl_gap"});
      fill_rows(static_cast<int>(b_values.size()), opts.jobs, rows, [&](int p) {
        Scenario s = base;
        s.geometry->n_sbs = b_values[static_cast<size_t>(p)];
        Scenario s0 = s;
        s0.update_freq = 0.0;
        const auto stat = solve_point(s0, PolicyMode::Static, opts);
        const auto ttl0 = solve_point(s0, PolicyMode::Ttl, opts);
        const auto ttl = solve_point(s, PolicyMode::Ttl, opts);
        const auto fttl = solve_point(s, PolicyMode::Fttl, opts);
        const auto sttl = solve_point(s, PolicyMode::Sttl, opts);
        return std::vector<std::string>{
            CsvWriter::format(s.geometry->density_per_km2()),
            CsvWriter::format(s.geometry->n_sbs),
            CsvWriter::format(stat.mbs_frac), CsvWriter::format(ttl0.mbs_frac),
            CsvWriter::format(ttl.mbs_frac), CsvWriter::format(fttl.mbs_frac),
            CsvWriter::format(sttl.mbs_frac), CsvWriter::format(ttl.gap),
            CsvWriter::format(fttl.gap)};
      });
      break;
    }
    case FigureId::Shape: {
      const std::vector<double> shapes{0.1, 0.2, 0.3, 0.4, 0.5,
                                       0.6, 0.7, 0.8, 0.9, 1.0};
      write_provenance(csv, base, id);
      csv.comment("columns",
                  "weibull shape sweep at fixed update frequency; static does "
                  "not depend on the shape");
      csv.header({"shape", "static", "ttl", "fttl", "sttl", "ttl_gap",
                  "fttl_gap"});
      fill_rows(static_cast<int>(shapes.size()), opts.jobs, rows, [&](int p) {
        Scenario s = base;
        s.weibull_shape = shapes[static_cast<size_t>(p)];
        const auto stat = solve_point(s, PolicyMode::Static, opts);
        const auto ttl = solve_point(s, PolicyMode::Ttl, opts);
        const auto fttl = solve_point(s, PolicyMode::Fttl, opts);
        const auto sttl = solve_point(s, PolicyMode::Sttl, opts);
        return std::vector<std::string>{
            CsvWriter::format(s.weibull_shape), CsvWriter::format(stat.mbs_frac),
            CsvWriter::format(ttl.mbs_frac), CsvWriter::format(fttl.mbs_frac),
            CsvWriter::format(sttl.mbs_frac), CsvWriter::format(ttl.gap),
            CsvWriter::format(fttl.gap)};
      });
      break;
    }
    case FigureId::UpdateFreq: {
      const std::vector<double> freqs{0, 1, 2, 3, 4, 6, 8, 12};
      const double cost_hi = 1e-3;
      write_provenance(csv, base, id);
      csv.comment("columns",
                  "normalized network load versus update frequency, at zero "
                  "update cost and at cache cost 0.001");
      csv.header({"freq", "sttl_c0", "fttl_c0", "ttl_c0", "sttl_chi",
                  "fttl_chi", "ttl_chi"});
      fill_rows(static_cast<int>(freqs.size()), opts.jobs, rows, [&](int p) {
        Scenario s = base;
        s.update_freq = freqs[static_cast<size_t>(p)];
        s.costs.cache = 0.0;
        const auto sttl0 = solve_point(s, PolicyMode::Sttl, opts);
        const auto fttl0 = solve_point(s, PolicyMode::Fttl, opts);
        const auto ttl0 = solve_point(s, PolicyMode::Ttl, opts);
        s.costs.cache = cost_hi;
        const auto sttl1 = solve_point(s, PolicyMode::Sttl, opts);
        const auto fttl1 = solve_point(s, PolicyMode::Fttl, opts);
        const auto ttl1 = solve_point(s, PolicyMode::Ttl, opts);
        return std::vector<std::string>{
            CsvWriter::format(s.update_freq), CsvWriter::format(sttl0.w_norm),
            CsvWriter::format(fttl0.w_norm), CsvWriter::format(ttl0.w_norm),
            CsvWriter::format(sttl1.w_norm), CsvWriter::format(fttl1.w_norm),
            CsvWriter::format(ttl1.w_norm)};
      });
      break;
    }
    case FigureId::UpdateCost: {
      const std::vector<double> cache_costs{0,    1e-4, 3e-4, 1e-3,
                                            3e-3, 1e-2, 3e-2, 1e-1};
      write_provenance(csv, base, id);
      csv.comment("columns",
                  "normalized network load versus cache update cost; *_async "
                  "columns simulate the synchronous-optimal policy under "
                  "asynchronous updates (mean and 95% half-width)");
      csv.header({"cache_cost", "static", "ttl", "fttl", "sttl", "ttl_sync_sim",
                  "ttl_sync_ci", "ttl_async_sim", "ttl_async_ci",
                  "sttl_sync_sim", "sttl_sync_ci", "sttl_async_sim",
                  "sttl_async_ci"});
      fill_rows(static_cast<int>(cache_costs.size()), opts.jobs, rows,
                [&](int p) {
                  Scenario s = base;
                  s.costs.cache = cache_costs[static_cast<size_t>(p)];
                  const auto stat = solve_point(s, PolicyMode::Static, opts);
                  const auto ttl = solve_point(s, PolicyMode::Ttl, opts);
                  const auto fttl = solve_point(s, PolicyMode::Fttl, opts);
                  const auto sttl = solve_point(s, PolicyMode::Sttl, opts);
                  const auto ttl_sim =
                      simulate_both_update_modes(s, PolicyMode::Ttl, opts);
                  const auto sttl_sim =
                      simulate_both_update_modes(s, PolicyMode::Sttl, opts);
                  return std::vector<std::string>{
                      CsvWriter::format(s.costs.cache),
                      CsvWriter::format(stat.w_norm),
                      CsvWriter::format(ttl.w_norm),
                      CsvWriter::format(fttl.w_norm),
                      CsvWriter::format(sttl.w_norm),
                      CsvWriter::format(ttl_sim.sync_mean),
                      CsvWriter::format(ttl_sim.sync_ci),
                      CsvWriter::format(ttl_sim.async_mean),
                      CsvWriter::format(ttl_sim.async_ci),
                      CsvWriter::format(sttl_sim.sync_mean),
                      CsvWriter::format(sttl_sim.sync_ci),
                      CsvWriter::format(sttl_sim.async_mean),
                      CsvWriter::format(sttl_sim.async_ci)};
                });
      break;
    }
  }

  for (const auto& row : rows) csv.row(row);
}

}  // namespace cttl
