#include "cttl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cttl {

namespace {

constexpr double kCapacitySlack = 1e-7;
constexpr double kBetaThreshold = 1e-9;

using lp::LinearProgram;
using lp::Sense;

void check_dimensions(const DemandTables& tables, const Catalog& catalog) {
  if (tables.n_files() != catalog.n_files())
    throw std::invalid_argument("planner: tables and catalog disagree on N");
}

}  // namespace

void CostModel::validate() const {
  for (double c : {mbs, sbs, cache}) {
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("costs: entries must be finite and >= 0");
  }
}

const char* to_string(PolicyMode m) {
  switch (m) {
    case PolicyMode::Ttl:
      return "ttl";
    case PolicyMode::Fttl:
      return "fttl";
    case PolicyMode::Sttl:
      return "sttl";
    case PolicyMode::Static:
      return "static";
  }
  return "?";
}

PolicyMode policy_mode_from_string(const std::string& s) {
  if (s == "ttl") return PolicyMode::Ttl;
  if (s == "fttl") return PolicyMode::Fttl;
  if (s == "sttl") return PolicyMode::Sttl;
  if (s == "static") return PolicyMode::Static;
  throw std::invalid_argument("unknown policy mode: " + s);
}

CachingPolicy CachingPolicy::zero(PolicyMode mode, int n_files, int n_slots) {
  CachingPolicy p;
  p.mode = mode;
  p.n_files = n_files;
  p.n_slots = n_slots;
  p.mu.assign(static_cast<size_t>(n_files) * static_cast<size_t>(n_slots), 0.0);
  if (mode == PolicyMode::Ttl || mode == PolicyMode::Fttl) {
    p.nu.assign(static_cast<size_t>(n_files), mode == PolicyMode::Ttl ? 1.0 : 0.0);
    p.beta.assign(p.mu.size(), 0);
  }
  return p;
}

double CachingPolicy::cache_usage(const DemandTables& tables,
                                  const Catalog& catalog) const {
  double usage = 0.0;
  for (int i = 0; i < n_files; ++i) {
    double row = 0.0;
    for (int j = 0; j < n_slots; ++j) row += mu_at(i, j) * tables.occupancy(i, j);
    usage += catalog.rate(i) * catalog.size(i) * row;
  }
  return usage;
}

void CachingPolicy::validate(const DemandTables& tables, const Catalog& catalog,
                             double cache_capacity) const {
  if (n_files != tables.n_files() || n_slots != tables.n_slots())
    throw std::invalid_argument("policy: dimension mismatch with tables");
  for (int i = 0; i < n_files; ++i) {
    double prev = 1.0 + 1e-12;
    for (int j = 0; j < n_slots; ++j) {
      const double m = mu_at(i, j);
      if (!(m >= -1e-12) || !(m <= 1.0 + 1e-12))
        throw std::invalid_argument("policy: mu outside [0, 1]");
      if (m > prev + 1e-9)
        throw std::invalid_argument("policy: mu row not non-increasing");
      prev = m;
    }
  }
  if (mode == PolicyMode::Static) {
    for (int i = 0; i < n_files; ++i)
      for (int j = 1; j < n_slots; ++j)
        if (std::abs(mu_at(i, j) - mu_at(i, 0)) > 1e-9)
          throw std::invalid_argument("policy: static rows must be constant");
  }
  if (mode == PolicyMode::Ttl || mode == PolicyMode::Fttl) {
    if (nu.size() != static_cast<size_t>(n_files) || beta.size() != mu.size())
      throw std::invalid_argument("policy: missing nu/beta for TTL family");
    for (int i = 0; i < n_files; ++i) {
      const double level = nu[static_cast<size_t>(i)];
      if (mode == PolicyMode::Ttl && std::abs(level - 1.0) > 1e-12)
        throw std::invalid_argument("policy: TTL requires nu = 1");
      bool seen_zero = false;
      for (int j = 0; j < n_slots; ++j) {
        const size_t idx = static_cast<size_t>(i) * n_slots + j;
        const bool on = beta[idx] != 0;
        if (on && seen_zero)
          throw std::invalid_argument("policy: step indicators not a prefix");
        if (!on) seen_zero = true;
        const double want = on ? level : 0.0;
        if (std::abs(mu_at(i, j) - want) > 1e-6)
          throw std::invalid_argument("policy: row is not a nu-level step");
      }
    }
  }
  const double usage = cache_usage(tables, catalog);
  if (usage > cache_capacity + kCapacitySlack)
    throw std::invalid_argument("policy: capacity constraint violated");
}

namespace {

LoadBreakdown evaluate_impl(const CachingPolicy& policy,
                            const DemandTables& tables,
                            const CoverageDistribution& cov,
                            const CostModel& costs, const Catalog& catalog,
                            bool parallel) {
  check_dimensions(tables, catalog);
  if (policy.n_files != tables.n_files() || policy.n_slots != tables.n_slots())
    throw std::invalid_argument("evaluate_loads: dimension mismatch");
  costs.validate();

  const int n = policy.n_files;
  const int slots = policy.n_slots;
  const int b_max = cov.b_max();
  const int n_sbs = cov.n_sbs();

  std::vector<double> sbs_part(static_cast<size_t>(n));
  std::vector<double> upd_part(static_cast<size_t>(n));

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    double sbs = 0.0, upd = 0.0;
    const double mu0 = policy.mu_at(i, 0);
    for (int j = 0; j < slots; ++j) {
      const double m = policy.mu_at(i, j);
      double g = 0.0;
      for (int b = 1; b <= b_max; ++b)
        g += cov.gamma(b) * std::min(1.0, b * m);
      const double f = tables.request_prob(i, j);
      sbs += f * g;
      upd += f * (mu0 - m);
    }
    const double traffic = catalog.rate(i) * catalog.size(i);
    sbs_part[static_cast<size_t>(i)] = traffic * sbs;
    upd_part[static_cast<size_t>(i)] = n_sbs * traffic * upd;
  }

  LoadBreakdown out;
  for (int i = 0; i < n; ++i) {
    out.r_sbs += sbs_part[static_cast<size_t>(i)];
    out.r_cache += upd_part[static_cast<size_t>(i)];
  }
  out.r_mbs = catalog.total_traffic() - out.r_sbs;
  out.w = costs.mbs * out.r_mbs + costs.sbs * out.r_sbs +
          costs.cache * out.r_cache;
  out.w_normalized = out.w / catalog.aggregate_rate;
  return out;
}

}  // namespace

LoadBreakdown evaluate_loads(const CachingPolicy& policy,
                             const DemandTables& tables,
                             const CoverageDistribution& cov,
                             const CostModel& costs, const Catalog& catalog) {
  return evaluate_impl(policy, tables, cov, costs, catalog, true);
}

LoadBreakdown evaluate_loads_serial(const CachingPolicy& policy,
                                    const DemandTables& tables,
                                    const CoverageDistribution& cov,
                                    const CostModel& costs,
                                    const Catalog& catalog) {
  return evaluate_impl(policy, tables, cov, costs, catalog, false);
}

namespace {

struct VarLayout {
  int n = 0, slots = 0;
  int mu(int i, int j) const { return i * slots + j; }
};

}  // namespace

lp::LinearProgram build_epigraph_program(const DemandTables& tables,
                                         const CoverageDistribution& cov,
                                         const CostModel& costs,
                                         const Catalog& catalog,
                                         double cache_capacity, PolicyMode mode,
                                         Formulation formulation) {
  check_dimensions(tables, catalog);
  costs.validate();
  if (!(cache_capacity >= 0.0))
    throw std::invalid_argument("planner: cache capacity must be >= 0");

  const int n = tables.n_files();
  const int slots = tables.n_slots();
  const double dc = costs.delta();
  const int n_sbs = cov.n_sbs();
  const VarLayout L{n, slots};

  LinearProgram prog;

  // mu variables with the cache-update part of the objective:
  // R_C = B sum_i w_i s_i (mu_{i,0} - sum_j mu_{i,j} F_{i,j}).
  for (int i = 0; i < n; ++i) {
    const double traffic = catalog.rate(i) * catalog.size(i);
    for (int j = 0; j < slots; ++j) {
      double c = -costs.cache * n_sbs * traffic * tables.request_prob(i, j);
      if (j == 0) c += costs.cache * n_sbs * traffic;
      prog.add_variable(0.0, 1.0, c,
                        "mu_" + std::to_string(i) + "_" + std::to_string(j));
    }
  }

  // Capacity and monotonicity.
  {
    std::vector<LinearProgram::Term> terms;
    for (int i = 0; i < n; ++i) {
      const double traffic = catalog.rate(i) * catalog.size(i);
      for (int j = 0; j < slots; ++j)
        terms.push_back({L.mu(i, j), traffic * tables.occupancy(i, j)});
    }
    prog.add_row(std::move(terms), Sense::Le, cache_capacity, "capacity");
  }
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < slots; ++j)
      prog.add_row({{L.mu(i, j), 1.0}, {L.mu(i, j - 1), -1.0}}, Sense::Le, 0.0,
                   "mono_" + std::to_string(i) + "_" + std::to_string(j));

  // Download side of the objective via the chosen linearization.
  if (formulation == Formulation::PerCoverage) {
    for (int i = 0; i < n; ++i) {
      const double traffic = catalog.rate(i) * catalog.size(i);
      for (int j = 0; j < slots; ++j) {
        for (int b = 0; b <= cov.b_max(); ++b) {
          const double c = -dc * cov.gamma(b) * traffic * tables.request_prob(i, j);
          const int xi = prog.add_variable(
              0.0, 1.0, c,
              "xi_" + std::to_string(b) + "_" + std::to_string(i) + "_" +
                  std::to_string(j));
          std::vector<LinearProgram::Term> terms{{xi, 1.0}};
          if (b > 0) terms.push_back({L.mu(i, j), -static_cast<double>(b)});
          prog.add_row(std::move(terms), Sense::Le, 0.0,
                       "lin_" + std::to_string(b) + "_" + std::to_string(i) +
                           "_" + std::to_string(j));
        }
      }
    }
  } else {
    const PiecewiseLinearUtility pwl = utility_breakpoints(cov);
    for (int i = 0; i < n; ++i) {
      const double traffic = catalog.rate(i) * catalog.size(i);
      for (int j = 0; j < slots; ++j) {
        const double c = -dc * traffic * tables.request_prob(i, j);
        const int eta = prog.add_variable(
            0.0, 1.0, c, "g_" + std::to_string(i) + "_" + std::to_string(j));
        for (int r = 0; r < pwl.n_segments(); ++r) {
          const double slope = pwl.slopes[static_cast<size_t>(r)];
          const double tau = pwl.values[static_cast<size_t>(r)] -
                             slope * pwl.breakpoints[static_cast<size_t>(r)];
          std::vector<LinearProgram::Term> terms{{eta, 1.0}};
          if (slope != 0.0) terms.push_back({L.mu(i, j), -slope});
          prog.add_row(std::move(terms), Sense::Le, tau,
                       "tan_" + std::to_string(i) + "_" + std::to_string(j) +
                           "_" + std::to_string(r));
        }
      }
    }
  }

  // Step-policy coupling for the TTL family (kept in the paper's big-M
  // style; TTL folds nu = 1 into the right-hand sides).
  if (mode == PolicyMode::Fttl || mode == PolicyMode::Ttl) {
    std::vector<int> nu_var(static_cast<size_t>(n), -1);
    if (mode == PolicyMode::Fttl)
      for (int i = 0; i < n; ++i)
        nu_var[static_cast<size_t>(i)] =
            prog.add_variable(0.0, 1.0, 0.0, "nu_" + std::to_string(i));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < slots; ++j) {
        const std::string tag = std::to_string(i) + "_" + std::to_string(j);
        const int beta =
            prog.add_variable(0.0, 1.0, 0.0, "beta_" + tag, /*integer=*/true);
        prog.add_row({{L.mu(i, j), 1.0}, {beta, -1.0}}, Sense::Le, 0.0,
                     "step_lo_" + tag);
        prog.add_row({{L.mu(i, j), -1.0}, {beta, -1.0}}, Sense::Le, 0.0,
                     "step_hi_" + tag);
        if (mode == PolicyMode::Fttl) {
          const int nu = nu_var[static_cast<size_t>(i)];
          prog.add_row({{L.mu(i, j), 1.0}, {nu, -1.0}, {beta, 1.0}}, Sense::Le,
                       1.0, "level_lo_" + tag);
          prog.add_row({{L.mu(i, j), -1.0}, {nu, 1.0}, {beta, 1.0}}, Sense::Le,
                       1.0, "level_hi_" + tag);
        } else {
          prog.add_row({{L.mu(i, j), 1.0}, {beta, 1.0}}, Sense::Le, 2.0,
                       "level_lo_" + tag);
          prog.add_row({{L.mu(i, j), -1.0}, {beta, 1.0}}, Sense::Le, 0.0,
                       "level_hi_" + tag);
        }
      }
    }
  }

  return prog;
}

namespace {

CachingPolicy policy_from_solution(PolicyMode mode, const std::vector<double>& x,
                                   int n, int slots) {
  CachingPolicy p = CachingPolicy::zero(mode, n, slots);
  const VarLayout L{n, slots};
  for (int i = 0; i < n; ++i) {
    double prev = 1.0;
    for (int j = 0; j < slots; ++j) {
      double m = std::clamp(x[static_cast<size_t>(L.mu(i, j))], 0.0, 1.0);
      m = std::min(m, prev);  // shave numerical monotonicity dust
      if (m < kBetaThreshold) m = 0.0;
      p.mu_at(i, j) = m;
      prev = m;
    }
  }
  if (mode == PolicyMode::Ttl || mode == PolicyMode::Fttl) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < slots; ++j) {
        const size_t idx = static_cast<size_t>(i) * slots + j;
        p.beta[idx] = p.mu_at(i, j) > 0.0 ? 1 : 0;
      }
      p.nu[static_cast<size_t>(i)] =
          mode == PolicyMode::Ttl ? 1.0 : p.mu_at(i, 0);
      // FTTL rows must sit exactly at the level; snap residual solver noise.
      if (mode == PolicyMode::Fttl) {
        const double level = p.nu[static_cast<size_t>(i)];
        for (int j = 0; j < slots; ++j)
          if (p.beta[static_cast<size_t>(i) * slots + j] != 0)
            p.mu_at(i, j) = level;
      } else {
        for (int j = 0; j < slots; ++j)
          if (p.beta[static_cast<size_t>(i) * slots + j] != 0)
            p.mu_at(i, j) = 1.0;
      }
    }
  }
  return p;
}

SolveReport finish_report(SolveReport rep, const DemandTables& tables,
                          const CoverageDistribution& cov,
                          const CostModel& costs, const Catalog& catalog,
                          double cache_capacity, double lp_objective) {
  rep.policy.validate(tables, catalog, cache_capacity);
  rep.loads = evaluate_loads(rep.policy, tables, cov, costs, catalog);
  rep.objective_value = rep.loads.w;
  // The LP objective omits the constant c_mbs * traffic; tightness of the
  // epigraph makes the two routes agree.
  const double w_via_lp = lp_objective + costs.mbs * catalog.total_traffic();
  if (std::abs(w_via_lp - rep.loads.w) >
      1e-6 * std::max(1.0, std::abs(rep.loads.w)))
    rep.certified = false;
  return rep;
}

SolveReport trivial_zero_report(PolicyMode mode, const DemandTables& tables,
                                const CoverageDistribution& cov,
                                const CostModel& costs, const Catalog& catalog,
                                double cache_capacity) {
  SolveReport rep;
  rep.policy = CachingPolicy::zero(mode, tables.n_files(), tables.n_slots());
  rep.status = lp::SolveStatus::Optimal;
  rep.certified = true;
  rep.backend = "trivial";
  return finish_report(std::move(rep), tables, cov, costs, catalog,
                       cache_capacity, 0.0);
}

SolveReport solve_lp_mode(PolicyMode mode, const DemandTables& tables,
                          const CoverageDistribution& cov,
                          const CostModel& costs, const Catalog& catalog,
                          double cache_capacity, const PlannerOptions& opts) {
  const lp::LpBackend& backend =
      opts.backend ? *opts.backend : lp::default_backend();
  const auto prog = build_epigraph_program(tables, cov, costs, catalog,
                                           cache_capacity, mode,
                                           opts.formulation);
  const lp::LpSolution sol = backend.solve(prog);
  if (sol.status != lp::SolveStatus::Optimal)
    throw std::runtime_error(std::string("planner: LP solve ended with status ") +
                             lp::to_string(sol.status));
  SolveReport rep;
  rep.status = sol.status;
  rep.iterations = sol.iterations;
  rep.certified = sol.certified;
  rep.backend = backend.name();
  rep.policy =
      policy_from_solution(mode, sol.x, tables.n_files(), tables.n_slots());
  return finish_report(std::move(rep), tables, cov, costs, catalog,
                       cache_capacity, sol.objective);
}

SolveReport solve_milp_mode(PolicyMode mode, const DemandTables& tables,
                            const CoverageDistribution& cov,
                            const CostModel& costs, const Catalog& catalog,
                            double cache_capacity, const PlannerOptions& opts) {
  const lp::LpBackend& backend =
      opts.backend ? *opts.backend : lp::default_backend();
  const auto prog = build_epigraph_program(tables, cov, costs, catalog,
                                           cache_capacity, mode,
                                           opts.formulation);
  const lp::MilpResult res = backend.solve_milp(prog, opts.milp);
  if (res.status != lp::SolveStatus::Optimal &&
      res.status != lp::SolveStatus::Feasible)
    throw std::runtime_error(
        std::string("planner: MILP solve ended with status ") +
        lp::to_string(res.status));
  SolveReport rep;
  rep.status = res.status;
  rep.gap = res.gap;
  rep.nodes = res.nodes;
  rep.iterations = res.lp_iterations;
  rep.certified = res.status == lp::SolveStatus::Optimal;
  rep.backend = backend.name();
  rep.policy =
      policy_from_solution(mode, res.x, tables.n_files(), tables.n_slots());
  return finish_report(std::move(rep), tables, cov, costs, catalog,
                       cache_capacity, res.objective);
}

}  // namespace

SolveReport solve_sttl(const DemandTables& tables,
                       const CoverageDistribution& cov, const CostModel& costs,
                       const Catalog& catalog, double cache_capacity,
                       const PlannerOptions& opts) {
  costs.validate();
  if (costs.delta() <= 0.0)
    return trivial_zero_report(PolicyMode::Sttl, tables, cov, costs, catalog,
                               cache_capacity);
  return solve_lp_mode(PolicyMode::Sttl, tables, cov, costs, catalog,
                       cache_capacity, opts);
}

SolveReport solve_fttl(const DemandTables& tables,
                       const CoverageDistribution& cov, const CostModel& costs,
                       const Catalog& catalog, double cache_capacity,
                       const PlannerOptions& opts) {
  costs.validate();
  if (costs.delta() <= 0.0)
    return trivial_zero_report(PolicyMode::Fttl, tables, cov, costs, catalog,
                               cache_capacity);
  return solve_milp_mode(PolicyMode::Fttl, tables, cov, costs, catalog,
                         cache_capacity, opts);
}

SolveReport solve_ttl(const DemandTables& tables,
                      const CoverageDistribution& cov, const CostModel& costs,
                      const Catalog& catalog, double cache_capacity,
                      const PlannerOptions& opts) {
  costs.validate();
  if (costs.delta() <= 0.0)
    return trivial_zero_report(PolicyMode::Ttl, tables, cov, costs, catalog,
                               cache_capacity);
  return solve_milp_mode(PolicyMode::Ttl, tables, cov, costs, catalog,
                         cache_capacity, opts);
}

SolveReport solve_static(const DemandTables& tables,
                         const CoverageDistribution& cov,
                         const CostModel& costs, const Catalog& catalog,
                         double cache_capacity, const PlannerOptions& opts) {
  costs.validate();
  check_dimensions(tables, catalog);
  const int n = tables.n_files();
  const int slots = tables.n_slots();

  // Static caching is the K = 0 instance: one slot, request probability 1,
  // occupancy equal to the mean inter-request time.
  DemandTables flat(n, 1);
  for (int i = 0; i < n; ++i) {
    flat.request_prob(i, 0) = 1.0;
    flat.occupancy(i, 0) = 1.0 / catalog.rate(i);
    flat.hazard(i, 0) = catalog.rate(i);
  }

  SolveReport rep;
  if (costs.delta() <= 0.0) {
    rep = trivial_zero_report(PolicyMode::Static, flat, cov, costs, catalog,
                              cache_capacity);
  } else {
    rep = solve_lp_mode(PolicyMode::Static, flat, cov, costs, catalog,
                        cache_capacity, opts);
  }

  // Expand the single column onto the caller's grid.
  CachingPolicy wide = CachingPolicy::zero(PolicyMode::Static, n, slots);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < slots; ++j) wide.mu_at(i, j) = rep.policy.mu_at(i, 0);
  rep.policy = std::move(wide);
  rep.policy.validate(tables, catalog, cache_capacity);
  rep.loads = evaluate_loads(rep.policy, tables, cov, costs, catalog);
  rep.objective_value = rep.loads.w;
  return rep;
}

SolveReport solve_single_cache_greedy(const DemandTables& tables,
                                      const CostModel& costs,
                                      const Catalog& catalog,
                                      double cache_capacity) {
  costs.validate();
  check_dimensions(tables, catalog);
  if (costs.cache != 0.0)
    throw std::invalid_argument(
        "greedy: requires zero cache-update cost; use the LP path");
  if (!(costs.delta() > 0.0))
    throw std::invalid_argument(
        "greedy: requires c_mbs > c_sbs; use the LP path");
  if (!tables.hazard_nonincreasing())
    throw std::invalid_argument(
        "greedy: hazard rows not non-increasing; use the LP path");

  const int n = tables.n_files();
  const int slots = tables.n_slots();

  struct Item {
    int i, j;
    double ratio;
  };
  std::vector<Item> items;
  items.reserve(static_cast<size_t>(n) * static_cast<size_t>(slots));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < slots; ++j) items.push_back({i, j, tables.hazard(i, j)});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  CachingPolicy policy = CachingPolicy::zero(PolicyMode::Sttl, n, slots);
  double left = cache_capacity;
  for (const Item& it : items) {
    const double weight =
        catalog.rate(it.i) * catalog.size(it.i) * tables.occupancy(it.i, it.j);
    if (weight <= left * (1.0 + 1e-15)) {
      policy.mu_at(it.i, it.j) = 1.0;
      left = std::max(0.0, left - weight);
    } else {
      if (left > 0.0) policy.mu_at(it.i, it.j) = left / weight;
      left = 0.0;
      break;
    }
  }

  const auto cov = CoverageDistribution::explicit_dist({0.0, 1.0}, 1);
  SolveReport rep;
  rep.policy = std::move(policy);
  rep.status = lp::SolveStatus::Optimal;
  rep.certified = true;
  rep.backend = "greedy";
  rep.policy.validate(tables, catalog, cache_capacity);
  rep.loads = evaluate_loads(rep.policy, tables, cov, costs, catalog);
  rep.objective_value = rep.loads.w;
  return rep;
}

}  // namespace cttl
