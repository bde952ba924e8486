#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cttl/coverage.hpp"
#include "cttl/demand.hpp"
#include "cttl/lp.hpp"

namespace cttl {

/// Per-bit transfer costs: downloading from the macro station, downloading
/// from a small cell, and pushing data into the caches on an update.
struct CostModel {
  double mbs = 1.0;
  double sbs = 0.0;
  double cache = 0.0;

  double delta() const { return mbs - sbs; }
  void validate() const;
};

enum class PolicyMode { Ttl, Fttl, Sttl, Static };

const char* to_string(PolicyMode m);
PolicyMode policy_mode_from_string(const std::string& s);

/// Cached-fraction schedule: mu(i, j) is the fraction of file i each SBS
/// holds during the j-th slot after the file's last request. Rows are
/// non-increasing. TTL/FTTL policies additionally carry the per-file level
/// nu and the step indicators beta (canonicalized to mu > 1e-9).
struct CachingPolicy {
  PolicyMode mode = PolicyMode::Sttl;
  int n_files = 0;
  int n_slots = 0;
  std::vector<double> mu;       // row-major n_files x n_slots
  std::vector<double> nu;       // per file; TTL/FTTL only
  std::vector<uint8_t> beta;    // row-major; TTL/FTTL only

  static CachingPolicy zero(PolicyMode mode, int n_files, int n_slots);

  double mu_at(int i, int j) const {
    return mu[static_cast<size_t>(i) * static_cast<size_t>(n_slots) +
              static_cast<size_t>(j)];
  }
  double& mu_at(int i, int j) {
    return mu[static_cast<size_t>(i) * static_cast<size_t>(n_slots) +
              static_cast<size_t>(j)];
  }

  /// Long-term average cache occupancy sum_i rate_i size_i sum_j mu A.
  double cache_usage(const DemandTables& tables, const Catalog& catalog) const;

  /// Checks every structural invariant (monotone rows, mode shape, capacity
  /// within 1e-7); throws std::invalid_argument on violation.
  void validate(const DemandTables& tables, const Catalog& catalog,
                double cache_capacity) const;
};

/// Network rates in size-units per hour plus the cost-weighted load.
struct LoadBreakdown {
  double r_sbs = 0.0;
  double r_mbs = 0.0;
  double r_cache = 0.0;
  double w = 0.0;
  double w_normalized = 0.0;  // w / aggregate request rate
};

LoadBreakdown evaluate_loads(const CachingPolicy& policy,
                             const DemandTables& tables,
                             const CoverageDistribution& cov,
                             const CostModel& costs, const Catalog& catalog);

/// Serial reference; bit-identical to evaluate_loads.
LoadBreakdown evaluate_loads_serial(const CachingPolicy& policy,
                                    const DemandTables& tables,
                                    const CoverageDistribution& cov,
                                    const CostModel& costs,
                                    const Catalog& catalog);

/// Epigraph linearizations of min{1, b mu}:
///  - PerCoverage: one xi variable per (coverage count, file, slot) with
///    xi <= 1 (bound) and xi <= b mu (row).
///  - Compact: one variable per (file, slot) bounded by the tangents of the
///    concave piecewise-linear coverage utility.
enum class Formulation { PerCoverage, Compact };

/// Builds the network-load minimization as an LP (STTL) or MILP (FTTL/TTL,
/// binary step indicators). Variables 0..N*S-1 are the mu entries in
/// (file-major, slot-minor) order; the objective is
/// c_cache * R_C - (c_mbs - c_sbs) * R~_SBS, so the network load equals the
/// objective plus c_mbs * total traffic whenever the epigraph is tight.
lp::LinearProgram build_epigraph_program(const DemandTables& tables,
                                         const CoverageDistribution& cov,
                                         const CostModel& costs,
                                         const Catalog& catalog,
                                         double cache_capacity, PolicyMode mode,
                                         Formulation formulation =
                                             Formulation::Compact);

struct SolveReport {
  CachingPolicy policy;
  LoadBreakdown loads;
  double objective_value = 0.0;  // network load W of the returned policy
  lp::SolveStatus status = lp::SolveStatus::Limit;
  double gap = 0.0;              // proven relative gap (MILP)
  long nodes = 0;
  long iterations = 0;
  bool certified = false;
  std::string backend;
};

struct PlannerOptions {
  Formulation formulation = Formulation::Compact;
  const lp::LpBackend* backend = nullptr;  // null = bundled simplex
  lp::MilpOptions milp;
};

/// STTL: linear program, globally optimal.
SolveReport solve_sttl(const DemandTables& tables,
                       const CoverageDistribution& cov, const CostModel& costs,
                       const Catalog& catalog, double cache_capacity,
                       const PlannerOptions& opts = {});

/// FTTL: MILP over step policies with a free per-file level.
SolveReport solve_fttl(const DemandTables& tables,
                       const CoverageDistribution& cov, const CostModel& costs,
                       const Catalog& catalog, double cache_capacity,
                       const PlannerOptions& opts = {});

/// TTL: FTTL with the level fixed to 1 (whole files).
SolveReport solve_ttl(const DemandTables& tables,
                      const CoverageDistribution& cov, const CostModel& costs,
                      const Catalog& catalog, double cache_capacity,
                      const PlannerOptions& opts = {});

/// Static caching: slot-constant policy, update rate identically zero.
SolveReport solve_static(const DemandTables& tables,
                         const CoverageDistribution& cov,
                         const CostModel& costs, const Catalog& catalog,
                         double cache_capacity,
                         const PlannerOptions& opts = {});

/// Single-cache fractional-knapsack solution: fill (file, slot) cells to
/// mu = 1 by descending hazard until capacity binds; at most one fractional
/// cell. Requires a single-cache scenario (gamma_1 = 1), zero update cost,
/// c_mbs > c_sbs, and non-increasing hazard rows.
SolveReport solve_single_cache_greedy(const DemandTables& tables,
                                      const CostModel& costs,
                                      const Catalog& catalog,
                                      double cache_capacity);

}  // namespace cttl
