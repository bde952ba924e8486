#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace cttl::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense : char { Le = 'L', Ge = 'G', Eq = 'E' };

/// Backend-neutral linear / mixed-integer program: boxed variables, sparse
/// rows, optional integrality marks. Minimization by convention.
struct LinearProgram {
  struct Term {
    int var;
    double coef;
  };
  struct Row {
    std::vector<Term> terms;
    Sense sense = Sense::Le;
    double rhs = 0.0;
    std::string name;
  };

  double objective_offset = 0.0;
  std::vector<double> cost;
  std::vector<double> lower, upper;
  std::vector<char> is_integer;
  std::vector<std::string> var_names;
  std::vector<Row> rows;

  int add_variable(double lo, double up, double obj_cost,
                   std::string name = {}, bool integer = false);
  int add_row(std::vector<Term> terms, Sense sense, double rhs,
              std::string name = {});
  int n_vars() const { return static_cast<int>(cost.size()); }
  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_integer() const;

  /// Largest violation of rows and bounds at the point x.
  double max_violation(const std::vector<double>& x) const;
  double objective_value(const std::vector<double>& x) const;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, Limit };

const char* to_string(SolveStatus s);

struct LpSolution {
  SolveStatus status = SolveStatus::Limit;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;
  /// Row duals. Rows eliminated by presolve carry NaN.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  long iterations = 0;
  /// Certificate residuals evaluated on the program that was solved.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  bool certified = false;
};

struct MilpOptions {
  double gap_tol = 1e-4;  // relative; 0 demands a proven optimum
  long node_limit = 1000000;
  double time_limit_s = kInf;
  double integrality_tol = 1e-6;
};

struct MilpResult {
  SolveStatus status = SolveStatus::Limit;
  double objective = std::numeric_limits<double>::quiet_NaN();  // incumbent
  double best_bound = -kInf;
  double gap = kInf;  // relative
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
};

/// Solver interface: a backend must solve LPs exactly (simplex-grade
/// accuracy) and MILPs by branch and bound with proven bounds. Instances are
/// stateless; concurrent solves on distinct programs are safe.
class LpBackend {
 public:
  virtual ~LpBackend() = default;
  virtual LpSolution solve(const LinearProgram& lp) const = 0;
  virtual MilpResult solve_milp(const LinearProgram& lp,
                                const MilpOptions& opts = {}) const = 0;
  virtual std::string name() const = 0;
};

/// Bundled backend: bounded-variable revised primal/dual simplex with a
/// dense LU basis and product-form updates, plus best-first branch and
/// bound on the integer variables. A presolve pass collapses concave
/// piecewise-linear hypograph blocks (eta <= slope*mu + offset families)
/// into bounded segment columns, which keeps the basis small on programs
/// whose row count is dominated by utility tangents.
class SimplexBackend final : public LpBackend {
 public:
  struct Options {
    bool presolve_hypographs = true;
    long iteration_limit = 2000000;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
  };

  SimplexBackend() = default;
  explicit SimplexBackend(Options opts) : opts_(opts) {}

  LpSolution solve(const LinearProgram& lp) const override;
  MilpResult solve_milp(const LinearProgram& lp,
                        const MilpOptions& opts = {}) const override;
  std::string name() const override { return "bundled-simplex"; }

 private:
  Options opts_;
};

const LpBackend& default_backend();

/// Writes the program in free-form LP file format (CPLEX dialect) for
/// cross-validation with external solvers.
void write_lp_format(const LinearProgram& lp, std::ostream& os);

}  // namespace cttl::lp
