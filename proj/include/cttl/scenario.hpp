#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cttl/coverage.hpp"
#include "cttl/demand.hpp"
#include "cttl/mds.hpp"
#include "cttl/planner.hpp"
#include "cttl/simulator.hpp"

namespace cttl {

struct SimulationSettings {
  double horizon_hours = 2000.0;
  double warmup_fraction = 0.1;  // share of the horizon discarded
  std::uint64_t seed = 1;
  int replications = 20;
  UpdateMode update_mode = UpdateMode::Synchronous;
  CoverageSampling coverage_mode = CoverageSampling::Analytical;

  double warmup_hours() const { return warmup_fraction * horizon_hours; }
};

struct SweepSpec {
  std::string parameter;  // one of the scalar scenario fields
  std::vector<double> values;
};

/// Scenario document: every knob of an experiment, JSON-serializable.
/// Defaults are the reference small-cell setup (100 files, Zipf 0.7, Weibull
/// shape 0.6, 100 SBSs in an 800 m macro cell, capacity for 10 files,
/// hourly update window at 6 updates per hour).
struct Scenario {
  int n_files = 100;
  double file_size = 1.0;
  double zipf_alpha = 0.7;
  double aggregate_rate = 100.0;  // requests per hour
  double weibull_shape = 0.6;

  std::optional<NetworkGeometry> geometry = NetworkGeometry{100, 100.0, 800.0};
  std::optional<std::vector<double>> explicit_gamma;
  int explicit_n_sbs = -1;

  double update_freq = 6.0;  // per hour; 0 = static caching
  double window_hours = 1.0;

  CostModel costs{1.0, 0.0, 0.0};
  double cache_capacity = 10.0;
  std::vector<PolicyMode> modes{PolicyMode::Sttl};
  long long quantize_max_denominator = 64;

  SimulationSettings sim;
  std::optional<SweepSpec> sweep;

  static Scenario defaults() { return {}; }
  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);
  nlohmann::json to_json() const;
  std::uint64_t hash() const;

  Catalog build_catalog() const;
  TimeGrid build_grid() const;
  CoverageDistribution build_coverage() const;
  void validate() const;
};

/// Everything cmd_optimize writes for one solve; round-trips through JSON.
struct PolicyFile {
  PolicyMode mode = PolicyMode::Sttl;
  TimeGrid grid;
  CachingPolicy policy;
  std::vector<CodeParams> code_params;
  LoadBreakdown loads;
  lp::SolveStatus status = lp::SolveStatus::Optimal;
  double gap = 0.0;
  long nodes = 0;
  long iterations = 0;
  std::string backend;
  std::uint64_t scenario_hash = 0;

  nlohmann::json to_json() const;
  static PolicyFile from_json(const nlohmann::json& j);
};

void save_policy(const PolicyFile& file, const std::string& path);
PolicyFile load_policy(const std::string& path);

/// Per-file code parameters for a whole policy (quantized rows).
std::vector<CodeParams> derive_all_code_params(const CachingPolicy& policy,
                                               const Catalog& catalog,
                                               int n_sbs,
                                               long long max_denominator);

std::string tool_version();

}  // namespace cttl
