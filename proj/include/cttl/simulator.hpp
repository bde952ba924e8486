#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cttl/coverage.hpp"
#include "cttl/demand.hpp"
#include "cttl/planner.hpp"

namespace cttl {

/// Synchronous: every SBS refills a file on any request for it anywhere in
/// the area. Asynchronous: only the SBSs within range of the requesting user
/// refill, each running its own per-file timer.
enum class UpdateMode { Synchronous, Asynchronous };
enum class CoverageSampling { Analytical, Geometric };

const char* to_string(UpdateMode m);
UpdateMode update_mode_from_string(const std::string& s);

struct SimConfig {
  Catalog catalog;
  TimeGrid grid;
  CoverageDistribution coverage = CoverageDistribution::explicit_dist({1.0});
  std::optional<NetworkGeometry> geometry;  // required for Geometric sampling
  CostModel costs;
  CachingPolicy policy;
  double horizon_hours = 1000.0;
  double warmup_hours = 100.0;
  std::uint64_t seed = 1;
  UpdateMode update_mode = UpdateMode::Synchronous;
  CoverageSampling coverage_sampling = CoverageSampling::Analytical;
  int batches = 20;  // batch-means segments for the confidence interval

  void validate() const;
  double expected_requests() const {
    return catalog.aggregate_rate * (horizon_hours - warmup_hours);
  }
};

struct SimResult {
  LoadBreakdown loads;  // empirical rates over the measured window
  std::vector<std::uint64_t> request_counts;
  double ci_half_width = 0.0;  // 95% batch-means, on w_normalized
  std::uint64_t events = 0;    // post-warmup requests
  double measured_hours = 0.0;
  bool low_sample_warning = false;
};

/// Discrete-event renewal simulation of the full system. Deterministic for
/// a given config and seed.
SimResult run(const SimConfig& config);

/// Replications with per-replication seeds derived from config.seed.
/// Results are ordered by replication index; the parallel and serial
/// variants are bit-identical.
std::vector<SimResult> run_replications(const SimConfig& config, int n);
std::vector<SimResult> run_replications_serial(const SimConfig& config, int n);

/// One draw of the number of SBSs within range of a uniformly placed user,
/// with a fresh Poisson point pattern of SBSs (guard band r_mbs + r_sbs
/// avoids edge deficit).
int sample_user_coverage(const NetworkGeometry& geom, std::mt19937_64& rng);

/// Mean and 95% half-width aggregated across replications.
struct ReplicationSummary {
  double mean_w_normalized = 0.0;
  double half_width = 0.0;
  double mean_mbs_fraction = 0.0;
};
ReplicationSummary summarize(const std::vector<SimResult>& reps);

}  // namespace cttl
