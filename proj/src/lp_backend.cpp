#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "lp_internal.hpp"

namespace cttl::lp {

int LinearProgram::add_variable(double lo, double up, double obj_cost,
                                std::string name, bool integer) {
  const int id = n_vars();
  lower.push_back(lo);
  upper.push_back(up);
  cost.push_back(obj_cost);
  is_integer.push_back(integer ? 1 : 0);
  var_names.push_back(name.empty() ? "x" + std::to_string(id) : std::move(name));
  return id;
}

int LinearProgram::add_row(std::vector<Term> terms, Sense sense, double rhs,
                           std::string name) {
  const int id = n_rows();
  rows.push_back({std::move(terms), sense, rhs,
                  name.empty() ? "r" + std::to_string(id) : std::move(name)});
  return id;
}

int LinearProgram::n_integer() const {
  int k = 0;
  for (char c : is_integer) k += c != 0;
  return k;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int v = 0; v < n_vars(); ++v) {
    worst = std::max(worst, lower[static_cast<size_t>(v)] - x[static_cast<size_t>(v)]);
    worst = std::max(worst, x[static_cast<size_t>(v)] - upper[static_cast<size_t>(v)]);
  }
  for (const auto& row : rows) {
    double act = 0.0;
    for (const auto& t : row.terms)
      act += t.coef * x[static_cast<size_t>(t.var)];
    switch (row.sense) {
      case Sense::Le:
        worst = std::max(worst, act - row.rhs);
        break;
      case Sense::Ge:
        worst = std::max(worst, row.rhs - act);
        break;
      case Sense::Eq:
        worst = std::max(worst, std::abs(act - row.rhs));
        break;
    }
  }
  return worst;
}

double LinearProgram::objective_value(const std::vector<double>& x) const {
  double obj = objective_offset;
  for (int v = 0; v < n_vars(); ++v)
    obj += cost[static_cast<size_t>(v)] * x[static_cast<size_t>(v)];
  return obj;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Feasible:
      return "feasible";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::Limit:
      return "limit";
  }
  return "?";
}

namespace detail {

namespace {

Simplex::Options simplex_options(const SimplexBackend::Options& o) {
  Simplex::Options so;
  so.iteration_limit = o.iteration_limit;
  so.feas_tol = o.feasibility_tol;
  so.opt_tol = o.optimality_tol;
  return so;
}

LpSolution finish_direct(const LinearProgram& lp, Simplex& spx,
                         SolveStatus st) {
  LpSolution sol;
  sol.status = st;
  sol.iterations = spx.iterations();
  if (st != SolveStatus::Optimal && st != SolveStatus::Feasible) return sol;
  sol.x = spx.structural_x();
  sol.objective = lp.objective_value(sol.x);
  sol.duals = spx.row_duals();
  auto rc = spx.reduced_cost_vector();
  rc.resize(static_cast<size_t>(lp.n_vars()));
  sol.reduced_costs = std::move(rc);
  const auto cert = spx.certify();
  sol.primal_residual = cert.primal;
  sol.dual_residual = cert.dual;
  sol.complementarity = cert.complementarity;
  sol.certified = st == SolveStatus::Optimal && cert.primal < 1e-6 &&
                  cert.dual < 1e-6;
  return sol;
}

}  // namespace

MilpResult branch_and_bound(const LinearProgram& lp, const MilpOptions& opts,
                            const SimplexBackend::Options& sopts) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  std::vector<int> ints;
  for (int v = 0; v < lp.n_vars(); ++v)
    if (lp.is_integer[static_cast<size_t>(v)]) ints.push_back(v);

  Simplex spx(CompForm::from_program(lp), simplex_options(sopts));
  if (std::isfinite(opts.time_limit_s))
    spx.set_deadline(t0 + std::chrono::duration_cast<clock::duration>(
                              std::chrono::duration<double>(opts.time_limit_s)));
  MilpResult res;

  SolveStatus st = spx.solve_primal();
  res.nodes = 1;
  if (st == SolveStatus::Infeasible || st == SolveStatus::Unbounded) {
    res.status = st;
    return res;
  }
  if (st == SolveStatus::Limit) {
    res.status = SolveStatus::Limit;
    return res;
  }

  struct Fix {
    int var;
    double lo, up;
  };
  struct Node {
    double bound;
    int depth;
    std::vector<Fix> fixes;
  };
  auto cmp = [](const Node& a, const Node& b) {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-bound first
    return a.depth < b.depth;                          // then dive deep
  };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> queue(cmp);

  double incumbent_obj = kInf;
  std::vector<double> incumbent_x;
  bool have_incumbent = false;
  bool hit_limit = false;

  auto prune_eps = [&] {
    if (!have_incumbent) return 0.0;
    const double exact = 1e-9 * (1.0 + std::abs(incumbent_obj));
    return std::max(exact, opts.gap_tol * std::abs(incumbent_obj));
  };

  auto apply_and_solve = [&](const std::vector<Fix>& fixes) {
    spx.reset_bounds();
    for (const auto& f : fixes) spx.set_bounds(f.var, f.lo, f.up);
    return spx.solve_dual();
  };

  auto fractional_var = [&](const std::vector<double>& x) {
    int pick = -1;
    double most = opts.integrality_tol;
    for (int v : ints) {
      const double xv = x[static_cast<size_t>(v)];
      const double frac = std::abs(xv - std::round(xv));
      if (frac > most) {
        most = frac;
        pick = v;
      }
    }
    return pick;
  };

  auto try_incumbent = [&](double val, const std::vector<double>& x) {
    if (val < incumbent_obj - 1e-12) {
      incumbent_obj = val;
      incumbent_x = x;
      have_incumbent = true;
    }
  };

  queue.push({spx.objective(), 0, {}});
  double best_open_bound = spx.objective();

  while (!queue.empty()) {
    if (res.nodes >= opts.node_limit || elapsed() > opts.time_limit_s) {
      hit_limit = true;
      break;
    }
    Node node = queue.top();
    queue.pop();
    best_open_bound = node.bound;
    if (have_incumbent && node.bound >= incumbent_obj - prune_eps()) {
      // Best-first: every remaining node is at least as bad.
      break;
    }

    st = apply_and_solve(node.fixes);
    ++res.nodes;
    res.lp_iterations = spx.iterations();
    if (st == SolveStatus::Infeasible) continue;
    if (st == SolveStatus::Limit || st == SolveStatus::Unbounded) {
      hit_limit = true;
      break;
    }
    const double val = spx.objective();
    if (have_incumbent && val >= incumbent_obj - prune_eps()) continue;
    const std::vector<double> x = spx.structural_x();

    const int frac = fractional_var(x);
    if (frac < 0) {
      try_incumbent(val, x);
      continue;
    }
    // Branch bounds must come from the node itself, before any heuristic
    // re-solve disturbs the solver state.
    const double branch_lo = spx.lower(frac);
    const double branch_up = spx.upper(frac);

    // Rounding dive: fix every integer to the nearest value and let the
    // continuous variables re-optimize. Cheap source of incumbents.
    if (node.depth == 0 || res.nodes % 32 == 0) {
      std::vector<Fix> fixes = node.fixes;
      for (int v : ints) {
        const double r = std::round(x[static_cast<size_t>(v)]);
        fixes.push_back({v, r, r});
      }
      if (apply_and_solve(fixes) == SolveStatus::Optimal) {
        const auto hx = spx.structural_x();
        if (fractional_var(hx) < 0) try_incumbent(spx.objective(), hx);
      }
    }

    const double xf = x[static_cast<size_t>(frac)];
    Node down{val, node.depth + 1, node.fixes};
    down.fixes.push_back({frac, branch_lo, std::floor(xf)});
    Node up{val, node.depth + 1, node.fixes};
    up.fixes.push_back({frac, std::ceil(xf), branch_up});
    queue.push(std::move(down));
    queue.push(std::move(up));
  }

  if (queue.empty() && !hit_limit) {
    res.best_bound = have_incumbent ? incumbent_obj : kInf;
  } else {
    res.best_bound = best_open_bound;
    while (!queue.empty()) {
      res.best_bound = std::min(res.best_bound, queue.top().bound);
      queue.pop();
    }
  }

  if (have_incumbent) {
    res.objective = incumbent_obj;
    res.x = std::move(incumbent_x);
    res.gap = std::max(0.0, (incumbent_obj - res.best_bound) /
                                std::max(1.0, std::abs(incumbent_obj)));
    res.status = res.gap <= 1e-9 ? SolveStatus::Optimal : SolveStatus::Feasible;
  } else {
    res.status = hit_limit ? SolveStatus::Limit : SolveStatus::Infeasible;
  }
  return res;
}

}  // namespace detail

LpSolution SimplexBackend::solve(const LinearProgram& lp) const {
  using namespace detail;
  if (opts_.presolve_hypographs) {
    HypographPresolve pre = presolve_hypographs(lp);
    if (pre.applied) {
      Simplex spx(CompForm::from_program(pre.reduced), simplex_options(opts_));
      const SolveStatus st = spx.solve_primal();
      LpSolution sol;
      sol.status = st;
      sol.iterations = spx.iterations();
      if (st != SolveStatus::Optimal) return sol;
      const auto red_x = spx.structural_x();
      sol.x = pre.recover_x(red_x, lp);
      sol.objective = lp.objective_value(sol.x);
      // Duals of surviving rows; eliminated tangent rows carry NaN.
      const auto red_duals = spx.row_duals();
      sol.duals.assign(static_cast<size_t>(lp.n_rows()),
                       std::numeric_limits<double>::quiet_NaN());
      for (int r = 0; r < lp.n_rows(); ++r) {
        const int mapped = pre.row_map[static_cast<size_t>(r)];
        if (mapped >= 0)
          sol.duals[static_cast<size_t>(r)] =
              red_duals[static_cast<size_t>(mapped)];
      }
      const auto cert = spx.certify();
      sol.primal_residual = std::max(cert.primal, lp.max_violation(sol.x));
      sol.dual_residual = cert.dual;
      sol.complementarity = cert.complementarity;
      // The reduced optimum must agree with the recovered full objective.
      const double drift =
          std::abs(spx.objective() - sol.objective) /
          std::max(1.0, std::abs(sol.objective));
      sol.certified = sol.primal_residual < 1e-6 && sol.dual_residual < 1e-6 &&
                      drift < 1e-7;
      return sol;
    }
  }
  Simplex spx(detail::CompForm::from_program(lp), simplex_options(opts_));
  const SolveStatus st = spx.solve_primal();
  return finish_direct(lp, spx, st);
}

MilpResult SimplexBackend::solve_milp(const LinearProgram& lp,
                                      const MilpOptions& opts) const {
  using namespace detail;
  if (lp.n_integer() == 0) {
    const LpSolution sol = solve(lp);
    MilpResult res;
    res.status = sol.status;
    res.objective = sol.objective;
    res.best_bound = sol.objective;
    res.gap = sol.status == SolveStatus::Optimal ? 0.0 : kInf;
    res.x = sol.x;
    res.nodes = 1;
    res.lp_iterations = sol.iterations;
    return res;
  }
  if (opts_.presolve_hypographs) {
    HypographPresolve pre = presolve_hypographs(lp);
    if (pre.applied) {
      MilpResult res = branch_and_bound(pre.reduced, opts, opts_);
      if (!res.x.empty()) {
        res.x = pre.recover_x(res.x, lp);
        res.objective = lp.objective_value(res.x);
      }
      return res;
    }
  }
  return branch_and_bound(lp, opts, opts_);
}

const LpBackend& default_backend() {
  static const SimplexBackend backend;
  return backend;
}

}  // namespace cttl::lp
