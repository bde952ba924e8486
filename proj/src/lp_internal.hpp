#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <utility>
#include <vector>

#include "cttl/lp.hpp"

namespace cttl::lp::detail {

/// Computational form: min c'x, Ax + s = rhs with one slack per row.
/// Variables 0..n-1 are structural with sparse columns; n..n+m-1 are slacks
/// (implicit unit columns) whose bounds encode the row sense.
struct CompForm {
  int n = 0;  // structural variables
  int m = 0;  // rows
  double offset = 0.0;
  std::vector<double> cost;                                // size n + m
  std::vector<double> lo, up;                              // size n + m
  std::vector<std::vector<std::pair<int, double>>> cols;   // structural only
  std::vector<double> rhs;                                 // size m

  int total_vars() const { return n + m; }
  static CompForm from_program(const LinearProgram& lp);
};

enum class VStat : std::uint8_t { Basic, AtLower, AtUpper, Free };

/// Bounded-variable revised simplex over a CompForm. The basis is kept as a
/// dense LU factor with product-form eta updates and periodic refactoring.
class Simplex {
 public:
  struct Options {
    long iteration_limit = 2000000;
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    double pivot_tol = 1e-9;
    int refactor_every = 64;
  };

  Simplex(CompForm form, Options opts);

  /// Restores the original bounds of every variable.
  void reset_bounds();
  void set_bounds(int var, double lo, double up);
  /// Wall-clock cutoff for subsequent solves; loops return Limit past it.
  void set_deadline(std::chrono::steady_clock::time_point t) { deadline_ = t; }
  double lower(int var) const { return lo_[var]; }
  double upper(int var) const { return up_[var]; }

  /// Full solve from the current basis: phase 1 if needed, then phase 2.
  SolveStatus solve_primal();
  /// Re-solve after bound changes, starting from the current (dual-feasible)
  /// basis. Falls back to the primal if dual feasibility does not hold.
  SolveStatus solve_dual();

  double objective() const;
  std::vector<double> structural_x() const;
  std::vector<double> row_duals();           // y, size m
  std::vector<double> reduced_cost_vector(); // size n + m
  long iterations() const { return iterations_; }

  /// Residuals of the final basic solution (for certificates).
  struct Certificate {
    double primal = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;
  };
  Certificate certify();

 private:
  void set_initial_basis();
  void refactor();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  void compute_basic_values();
  double reduced_cost(int var, const Eigen::VectorXd& y) const;
  Eigen::VectorXd duals_for(const std::vector<double>& costs) const;
  Eigen::VectorXd column_dense(int var) const;
  double infeasibility() const;
  SolveStatus primal_loop(bool phase_one);
  bool dual_feasible_now();

  CompForm f_;
  Options opts_;
  std::vector<double> lo_, up_;      // active bounds (B&B overrides)
  std::vector<VStat> stat_;
  std::vector<int> basic_;           // position -> var
  std::vector<int> basic_pos_;       // var -> position or -1
  Eigen::VectorXd xb_;               // basic values by position
  std::vector<double> xn_;           // value of every nonbasic var
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<std::pair<int, Eigen::VectorXd>> etas_;
  long iterations_ = 0;
  bool bland_ = false;
  long degenerate_streak_ = 0;
  std::chrono::steady_clock::time_point deadline_ =
      std::chrono::steady_clock::time_point::max();

  bool past_deadline() const {
    return (iterations_ & 31) == 0 &&
           std::chrono::steady_clock::now() > deadline_;
  }
};

/// Concave-hypograph presolve: replaces (eta, mu) pairs whose only coupling
/// rows are eta <= slope*mu + offset with bounded segment variables. Exact
/// when the eta objective coefficient is <= 0 (minimization).
struct HypographPresolve {
  LinearProgram reduced;
  bool applied = false;

  // Mapping back to the original program.
  struct Block {
    int eta = -1;                 // original var
    int mu = -1;                  // original var
    std::vector<int> delta;      // reduced-program vars
    std::vector<double> slopes;  // per segment
    double base = 0.0;           // envelope value at mu = 0
  };
  std::vector<Block> blocks;
  std::vector<int> var_map;  // original var -> reduced var (-1 if replaced)
  std::vector<int> row_map;  // original row -> reduced row (-1 if dropped)

  std::vector<double> recover_x(const std::vector<double>& reduced_x,
                                const LinearProgram& original) const;
};

HypographPresolve presolve_hypographs(const LinearProgram& lp);

MilpResult branch_and_bound(const LinearProgram& lp, const MilpOptions& opts,
                            const SimplexBackend::Options& sopts);

}  // namespace cttl::lp::detail
