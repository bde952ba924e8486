#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lp_internal.hpp"

namespace cttl::lp::detail {

namespace {
constexpr double kTiny = 1e-11;
}

CompForm CompForm::from_program(const LinearProgram& lp) {
  CompForm f;
  f.n = lp.n_vars();
  f.m = lp.n_rows();
  f.offset = lp.objective_offset;
  f.cost.assign(static_cast<size_t>(f.n + f.m), 0.0);
  f.lo.assign(static_cast<size_t>(f.n + f.m), 0.0);
  f.up.assign(static_cast<size_t>(f.n + f.m), 0.0);
  f.cols.assign(static_cast<size_t>(f.n), {});
  f.rhs.resize(static_cast<size_t>(f.m));

  for (int v = 0; v < f.n; ++v) {
    f.cost[v] = lp.cost[v];
    f.lo[v] = lp.lower[v];
    f.up[v] = lp.upper[v];
    if (f.lo[v] > f.up[v])
      throw std::invalid_argument("lp: variable with lower > upper");
  }
  for (int r = 0; r < f.m; ++r) {
    const auto& row = lp.rows[static_cast<size_t>(r)];
    f.rhs[r] = row.rhs;
    for (const auto& t : row.terms)
      f.cols[static_cast<size_t>(t.var)].push_back({r, t.coef});
    const int s = f.n + r;
    switch (row.sense) {
      case Sense::Le:
        f.lo[s] = 0.0;
        f.up[s] = kInf;
        break;
      case Sense::Ge:
        f.lo[s] = -kInf;
        f.up[s] = 0.0;
        break;
      case Sense::Eq:
        f.lo[s] = 0.0;
        f.up[s] = 0.0;
        break;
    }
  }
  return f;
}

Simplex::Simplex(CompForm form, Options opts)
    : f_(std::move(form)), opts_(opts) {
  lo_ = f_.lo;
  up_ = f_.up;
  set_initial_basis();
}

void Simplex::reset_bounds() {
  lo_ = f_.lo;
  up_ = f_.up;
}

void Simplex::set_bounds(int var, double lo, double up) {
  lo_[static_cast<size_t>(var)] = lo;
  up_[static_cast<size_t>(var)] = up;
}

void Simplex::set_initial_basis() {
  const int total = f_.total_vars();
  stat_.assign(static_cast<size_t>(total), VStat::AtLower);
  basic_.resize(static_cast<size_t>(f_.m));
  basic_pos_.assign(static_cast<size_t>(total), -1);
  xn_.assign(static_cast<size_t>(total), 0.0);

  for (int v = 0; v < f_.n; ++v) {
    const double lo = lo_[v], up = up_[v];
    if (std::isfinite(lo) && (!std::isfinite(up) || std::abs(lo) <= std::abs(up))) {
      stat_[v] = VStat::AtLower;
      xn_[v] = lo;
    } else if (std::isfinite(up)) {
      stat_[v] = VStat::AtUpper;
      xn_[v] = up;
    } else {
      stat_[v] = VStat::Free;
      xn_[v] = 0.0;
    }
  }
  for (int r = 0; r < f_.m; ++r) {
    const int s = f_.n + r;
    stat_[s] = VStat::Basic;
    basic_[r] = s;
    basic_pos_[s] = r;
  }
  refactor();
}

Eigen::VectorXd Simplex::column_dense(int var) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(f_.m);
  if (var < f_.n) {
    for (const auto& [r, c] : f_.cols[static_cast<size_t>(var)]) a[r] = c;
  } else {
    a[var - f_.n] = 1.0;
  }
  return a;
}

void Simplex::refactor() {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(f_.m, f_.m);
  for (int p = 0; p < f_.m; ++p) {
    const int v = basic_[p];
    if (v < f_.n) {
      for (const auto& [r, c] : f_.cols[static_cast<size_t>(v)]) b(r, p) = c;
    } else {
      b(v - f_.n, p) = 1.0;
    }
  }
  lu_.compute(b);
  etas_.clear();
  compute_basic_values();
}

void Simplex::ftran(Eigen::VectorXd& v) const {
  v = lu_.solve(v);
  for (const auto& [r, w] : etas_) {
    const double t = v[r] / w[r];
    v -= t * w;
    v[r] = t;
  }
}

void Simplex::btran(Eigen::VectorXd& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const auto& [r, w] = *it;
    double dot = 0.0;
    for (int i = 0; i < f_.m; ++i)
      if (i != r) dot += w[i] * v[i];
    v[r] = (v[r] - dot) / w[r];
  }
  v = lu_.transpose().solve(v);
}

void Simplex::compute_basic_values() {
  Eigen::VectorXd r = Eigen::VectorXd::Map(f_.rhs.data(), f_.m);
  for (int v = 0; v < f_.total_vars(); ++v) {
    if (stat_[v] == VStat::Basic) continue;
    const double x = xn_[v];
    if (x == 0.0) continue;
    if (v < f_.n) {
      for (const auto& [row, c] : f_.cols[static_cast<size_t>(v)])
        r[row] -= c * x;
    } else {
      r[v - f_.n] -= x;
    }
  }
  ftran(r);
  xb_ = r;
}

Eigen::VectorXd Simplex::duals_for(const std::vector<double>& costs) const {
  Eigen::VectorXd cb(f_.m);
  for (int p = 0; p < f_.m; ++p) cb[p] = costs[static_cast<size_t>(basic_[p])];
  btran(cb);
  return cb;
}

double Simplex::reduced_cost(int var, const Eigen::VectorXd& y) const {
  double d = f_.cost[static_cast<size_t>(var)];
  if (var < f_.n) {
    for (const auto& [r, c] : f_.cols[static_cast<size_t>(var)]) d -= y[r] * c;
  } else {
    d -= y[var - f_.n];
  }
  return d;
}

double Simplex::infeasibility() const {
  double sum = 0.0;
  for (int p = 0; p < f_.m; ++p) {
    const int v = basic_[p];
    if (xb_[p] < lo_[v]) sum += lo_[v] - xb_[p];
    if (xb_[p] > up_[v]) sum += xb_[p] - up_[v];
  }
  return sum;
}

SolveStatus Simplex::primal_loop(bool phase_one) {
  const double feas = opts_.feas_tol;
  int clean_rounds = 0;

  for (;;) {
    if (++iterations_ > opts_.iteration_limit) return SolveStatus::Limit;
    if (past_deadline()) return SolveStatus::Limit;

    // Effective costs: phase 1 prices infeasibility, phase 2 the objective.
    std::vector<double> cost;
    const std::vector<double>* cptr = &f_.cost;
    if (phase_one) {
      cost.assign(static_cast<size_t>(f_.total_vars()), 0.0);
      for (int p = 0; p < f_.m; ++p) {
        const int v = basic_[p];
        if (xb_[p] < lo_[v] - feas)
          cost[static_cast<size_t>(v)] = -1.0;
        else if (xb_[p] > up_[v] + feas)
          cost[static_cast<size_t>(v)] = 1.0;
      }
      cptr = &cost;
    }
    const Eigen::VectorXd y = duals_for(*cptr);

    // Pricing.
    int enter = -1;
    double best = 0.0;
    bool increase = true;
    for (int v = 0; v < f_.total_vars(); ++v) {
      const VStat st = stat_[v];
      if (st == VStat::Basic) continue;
      double d = (*cptr)[static_cast<size_t>(v)];
      if (v < f_.n) {
        for (const auto& [r, c] : f_.cols[static_cast<size_t>(v)])
          d -= y[r] * c;
      } else {
        d -= y[v - f_.n];
      }
      bool ok = false;
      bool inc = true;
      if (st == VStat::AtLower && d < -opts_.opt_tol) {
        ok = true;
        inc = true;
      } else if (st == VStat::AtUpper && d > opts_.opt_tol) {
        ok = true;
        inc = false;
      } else if (st == VStat::Free && std::abs(d) > opts_.opt_tol) {
        ok = true;
        inc = d < 0.0;
      }
      if (!ok) continue;
      if (bland_) {
        enter = v;
        increase = inc;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        enter = v;
        increase = inc;
      }
    }

    if (enter < 0) {
      if (phase_one) return SolveStatus::Optimal;  // caller checks residuals
      // Claimed optimal: refresh the factorization once and re-verify, the
      // eta file accumulates drift on long runs.
      if (clean_rounds < 2 && !etas_.empty()) {
        ++clean_rounds;
        refactor();
        continue;
      }
      return SolveStatus::Optimal;
    }

    const double s = increase ? 1.0 : -1.0;
    Eigen::VectorXd w = column_dense(enter);
    ftran(w);

    // Harris-style two-pass ratio test: pass 1 finds the step allowed when
    // every bound is relaxed by the feasibility tolerance, pass 2 picks the
    // largest pivot among the candidates within that step. Infeasible basics
    // (phase 1) block at the bound they are approaching.
    struct Candidate {
      int pos;
      double t;  // strict ratio
      double wp;
      bool to_upper;
    };
    std::vector<Candidate> cands;
    cands.reserve(16);
    double t_relax = kInf;
    for (int p = 0; p < f_.m; ++p) {
      const double wp = w[p];
      if (std::abs(wp) <= opts_.pivot_tol) continue;
      const int v = basic_[p];
      const double delta = -s * wp;  // dx_basic / dt
      const double xv = xb_[p];
      double bound = 0.0;
      bool to_upper = false;
      bool blocks = false;
      if (phase_one && xv < lo_[v] - feas) {
        if (delta > 0) {
          bound = lo_[v];
          to_upper = false;
          blocks = true;
        }
      } else if (phase_one && xv > up_[v] + feas) {
        if (delta < 0) {
          bound = up_[v];
          to_upper = true;
          blocks = true;
        }
      } else if (delta > 0) {
        if (std::isfinite(up_[v])) {
          bound = up_[v];
          to_upper = true;
          blocks = true;
        }
      } else {
        if (std::isfinite(lo_[v])) {
          bound = lo_[v];
          to_upper = false;
          blocks = true;
        }
      }
      if (!blocks) continue;
      double t = (bound - xv) / delta;
      t = std::max(t, 0.0);
      const double t_loose =
          t + feas * (1.0 + std::abs(bound)) / std::abs(delta);
      t_relax = std::min(t_relax, t_loose);
      cands.push_back({p, t, wp, to_upper});
    }

    double t_flip = kInf;
    if (stat_[enter] != VStat::Free && std::isfinite(lo_[enter]) &&
        std::isfinite(up_[enter]))
      t_flip = up_[enter] - lo_[enter];

    double t_best = kInf;
    int leave_pos = -1;
    bool leave_to_upper = false;
    double leave_w = 0.0;
    for (const Candidate& c : cands) {
      if (c.t > t_relax) continue;
      if (std::abs(c.wp) > std::abs(leave_w)) {
        t_best = c.t;
        leave_pos = c.pos;
        leave_to_upper = c.to_upper;
        leave_w = c.wp;
      }
    }

    if (t_best == kInf && t_flip == kInf)
      return phase_one ? SolveStatus::Infeasible : SolveStatus::Unbounded;

    if (t_flip <= t_best) {
      // Bound flip: no basis change.
      xb_ -= (s * t_flip) * w;
      stat_[enter] =
          stat_[enter] == VStat::AtLower ? VStat::AtUpper : VStat::AtLower;
      xn_[enter] = stat_[enter] == VStat::AtLower ? lo_[enter] : up_[enter];
      continue;
    }

    // A tiny pivot element after many updates is often factorization drift;
    // rebuild and re-derive the direction before committing to it.
    if (std::abs(leave_w) < 1e-7 && !etas_.empty()) {
      refactor();
      continue;
    }

    // Pivot.
    const int leave_var = basic_[leave_pos];
    const double enter_new = xn_[enter] + s * t_best;
    xb_ -= (s * t_best) * w;
    xb_[leave_pos] = enter_new;
    stat_[leave_var] = leave_to_upper ? VStat::AtUpper : VStat::AtLower;
    xn_[leave_var] = leave_to_upper ? up_[leave_var] : lo_[leave_var];
    basic_pos_[leave_var] = -1;
    stat_[enter] = VStat::Basic;
    basic_[leave_pos] = enter;
    basic_pos_[enter] = leave_pos;

    etas_.push_back({leave_pos, w});
    if (static_cast<int>(etas_.size()) >= opts_.refactor_every) refactor();

    if (t_best <= kTiny) {
      if (++degenerate_streak_ > 500) bland_ = true;
    } else {
      degenerate_streak_ = 0;
      bland_ = false;
    }
  }
}

SolveStatus Simplex::solve_primal() {
  compute_basic_values();
  if (infeasibility() > opts_.feas_tol * (1.0 + f_.m)) {
    const SolveStatus s1 = primal_loop(true);
    if (s1 == SolveStatus::Limit) return s1;
    if (infeasibility() > 1e-7 * (1.0 + f_.m)) return SolveStatus::Infeasible;
  }
  return primal_loop(false);
}

bool Simplex::dual_feasible_now() {
  const Eigen::VectorXd y = duals_for(f_.cost);
  for (int v = 0; v < f_.total_vars(); ++v) {
    const VStat st = stat_[v];
    if (st == VStat::Basic) continue;
    const double d = reduced_cost(v, y);
    if (st == VStat::AtLower && d < -1e-7) return false;
    if (st == VStat::AtUpper && d > 1e-7) return false;
    if (st == VStat::Free && std::abs(d) > 1e-7) return false;
  }
  return true;
}

SolveStatus Simplex::solve_dual() {
  // Nonbasic values may be stale after bound changes.
  for (int v = 0; v < f_.total_vars(); ++v) {
    if (stat_[v] == VStat::AtLower)
      xn_[v] = lo_[v];
    else if (stat_[v] == VStat::AtUpper)
      xn_[v] = up_[v];
  }
  compute_basic_values();
  if (!dual_feasible_now()) {
    set_initial_basis();
    return solve_primal();
  }

  long dual_iters = 0;
  for (;;) {
    if (++iterations_ > opts_.iteration_limit) return SolveStatus::Limit;
    if (past_deadline()) return SolveStatus::Limit;
    if (++dual_iters > 4 * (f_.m + 1000)) {
      // Stalled; restart with the primal from scratch.
      set_initial_basis();
      return solve_primal();
    }

    int leave_pos = -1;
    double worst = opts_.feas_tol;
    bool below = true;
    for (int p = 0; p < f_.m; ++p) {
      const int v = basic_[p];
      const double under = lo_[v] - xb_[p];
      const double over = xb_[p] - up_[v];
      if (under > worst) {
        worst = under;
        leave_pos = p;
        below = true;
      }
      if (over > worst) {
        worst = over;
        leave_pos = p;
        below = false;
      }
    }
    if (leave_pos < 0) return primal_loop(false);  // polish + certify

    Eigen::VectorXd rho = Eigen::VectorXd::Zero(f_.m);
    rho[leave_pos] = 1.0;
    btran(rho);
    const Eigen::VectorXd y = duals_for(f_.cost);

    // Two-pass dual ratio test over admissible entering candidates: the
    // relaxed pass sets the allowable ratio, the second maximizes the pivot.
    struct DualCand {
      int var;
      double ratio;
      double alpha;
    };
    std::vector<DualCand> cands;
    cands.reserve(16);
    double ratio_relax = kInf;
    for (int v = 0; v < f_.total_vars(); ++v) {
      const VStat st = stat_[v];
      if (st == VStat::Basic) continue;
      double alpha;
      if (v < f_.n) {
        alpha = 0.0;
        for (const auto& [r, c] : f_.cols[static_cast<size_t>(v)])
          alpha += rho[r] * c;
      } else {
        alpha = rho[v - f_.n];
      }
      if (std::abs(alpha) <= opts_.pivot_tol) continue;
      // Admissibility: moving v must raise (below) or lower (above) the
      // leaving basic. x_b changes by -alpha * dv.
      bool ok = false;
      if (below) {
        if (st == VStat::AtLower && alpha < 0) ok = true;
        if (st == VStat::AtUpper && alpha > 0) ok = true;
        if (st == VStat::Free) ok = true;
      } else {
        if (st == VStat::AtLower && alpha > 0) ok = true;
        if (st == VStat::AtUpper && alpha < 0) ok = true;
        if (st == VStat::Free) ok = true;
      }
      if (!ok) continue;
      const double d = reduced_cost(v, y);
      const double ratio = std::abs(d) / std::abs(alpha);
      ratio_relax = std::min(
          ratio_relax, (std::abs(d) + opts_.opt_tol) / std::abs(alpha));
      cands.push_back({v, ratio, alpha});
    }
    int enter = -1;
    double best_alpha = 0.0;
    for (const DualCand& c : cands) {
      if (c.ratio > ratio_relax) continue;
      if (std::abs(c.alpha) > std::abs(best_alpha)) {
        best_alpha = c.alpha;
        enter = c.var;
      }
    }
    if (enter < 0) return SolveStatus::Infeasible;

    Eigen::VectorXd w = column_dense(enter);
    ftran(w);
    if (std::abs(w[leave_pos]) <= opts_.pivot_tol) {
      // Numerically unusable pivot; refactor and retry once, else restart.
      if (!etas_.empty()) {
        refactor();
        continue;
      }
      set_initial_basis();
      return solve_primal();
    }

    const int leave_var = basic_[leave_pos];
    stat_[leave_var] = below ? VStat::AtLower : VStat::AtUpper;
    xn_[leave_var] = below ? lo_[leave_var] : up_[leave_var];
    basic_pos_[leave_var] = -1;
    stat_[enter] = VStat::Basic;
    basic_[leave_pos] = enter;
    basic_pos_[enter] = leave_pos;

    etas_.push_back({leave_pos, w});
    if (static_cast<int>(etas_.size()) >= opts_.refactor_every)
      refactor();
    else
      compute_basic_values();
  }
}

double Simplex::objective() const {
  double obj = f_.offset;
  for (int v = 0; v < f_.total_vars(); ++v) {
    const double c = f_.cost[static_cast<size_t>(v)];
    if (c == 0.0) continue;
    obj += c * (stat_[v] == VStat::Basic ? xb_[basic_pos_[v]] : xn_[v]);
  }
  return obj;
}

std::vector<double> Simplex::structural_x() const {
  std::vector<double> x(static_cast<size_t>(f_.n));
  for (int v = 0; v < f_.n; ++v)
    x[static_cast<size_t>(v)] =
        stat_[v] == VStat::Basic ? xb_[basic_pos_[v]] : xn_[v];
  return x;
}

std::vector<double> Simplex::row_duals() {
  const Eigen::VectorXd y = duals_for(f_.cost);
  return {y.data(), y.data() + f_.m};
}

std::vector<double> Simplex::reduced_cost_vector() {
  const Eigen::VectorXd y = duals_for(f_.cost);
  std::vector<double> d(static_cast<size_t>(f_.total_vars()));
  for (int v = 0; v < f_.total_vars(); ++v)
    d[static_cast<size_t>(v)] = reduced_cost(v, y);
  return d;
}

Simplex::Certificate Simplex::certify() {
  Certificate cert;
  // Primal: recompute row activities from the reported x.
  std::vector<double> x(static_cast<size_t>(f_.total_vars()));
  for (int v = 0; v < f_.total_vars(); ++v)
    x[static_cast<size_t>(v)] =
        stat_[v] == VStat::Basic ? xb_[basic_pos_[v]] : xn_[v];
  std::vector<double> act(static_cast<size_t>(f_.m), 0.0);
  for (int v = 0; v < f_.n; ++v)
    for (const auto& [r, c] : f_.cols[static_cast<size_t>(v)])
      act[static_cast<size_t>(r)] += c * x[static_cast<size_t>(v)];
  for (int r = 0; r < f_.m; ++r)
    cert.primal = std::max(
        cert.primal, std::abs(act[static_cast<size_t>(r)] +
                              x[static_cast<size_t>(f_.n + r)] - f_.rhs[r]));
  for (int v = 0; v < f_.total_vars(); ++v) {
    cert.primal = std::max(cert.primal, lo_[v] - x[static_cast<size_t>(v)]);
    cert.primal = std::max(cert.primal, x[static_cast<size_t>(v)] - up_[v]);
  }
  // Dual: sign conditions of reduced costs against variable status.
  const Eigen::VectorXd y = duals_for(f_.cost);
  for (int v = 0; v < f_.total_vars(); ++v) {
    const double d = reduced_cost(v, y);
    switch (stat_[v]) {
      case VStat::Basic:
        cert.dual = std::max(cert.dual, std::abs(d));
        break;
      case VStat::AtLower:
        cert.dual = std::max(cert.dual, -d);
        break;
      case VStat::AtUpper:
        cert.dual = std::max(cert.dual, d);
        break;
      case VStat::Free:
        cert.dual = std::max(cert.dual, std::abs(d));
        break;
    }
    const double gap_lo = std::abs(x[static_cast<size_t>(v)] - lo_[v]);
    const double gap_up = std::abs(up_[v] - x[static_cast<size_t>(v)]);
    const double dist = std::min(std::isfinite(lo_[v]) ? gap_lo : kInf,
                                 std::isfinite(up_[v]) ? gap_up : kInf);
    if (stat_[v] != VStat::Basic && dist < kInf)
      cert.complementarity =
          std::max(cert.complementarity, std::min(std::abs(d), dist));
  }
  return cert;
}

}  // namespace cttl::lp::detail
