#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cttl {

/// Inter-request time distribution of a single file's renewal process.
/// Times are in hours. The Weibull scale is derived from the request rate so
/// that the mean inter-request time is exactly 1/rate; an exponential process
/// is the shape == 1 special case and shares the same code paths.
class InterRequestDistribution {
 public:
  enum class Kind { Exponential, Weibull };

  static InterRequestDistribution exponential(double rate);

  /// Shape must lie in (0, 1] so the hazard is non-increasing, unless
  /// `allow_increasing_hazard` is set (diagnostics only; solvers that rely on
  /// a decreasing hazard refuse such catalogs).
  static InterRequestDistribution weibull(double shape, double rate,
                                          bool allow_increasing_hazard = false);

  double cdf(double t) const;       // Pr(X <= t), throws for t < 0
  double survival(double t) const;  // 1 - cdf(t)
  double quantile(double u) const;  // inverse CDF, u in [0, 1)

  Kind kind() const { return kind_; }
  double shape() const { return shape_; }
  double rate() const { return rate_; }
  double scale() const { return scale_; }
  double mean() const { return 1.0 / rate_; }
  bool decreasing_hazard() const { return shape_ <= 1.0; }

 private:
  InterRequestDistribution(Kind kind, double shape, double rate);

  Kind kind_;
  double shape_;
  double rate_;
  double scale_;
};

/// Draws one inter-request time. The uniform variate is produced from the
/// top 53 bits of the engine output, so results are identical across
/// platforms for a given seed.
double sample_interarrival(const InterRequestDistribution& dist,
                           std::mt19937_64& rng);

/// File library with Zipf popularity and per-file renewal processes.
struct Catalog {
  std::vector<double> sizes;
  std::vector<InterRequestDistribution> files;
  double zipf_alpha = 0.0;
  double aggregate_rate = 0.0;

  /// Builds the standard library: p_i ~ 1/i^alpha (normalized), rate_i =
  /// p_i * aggregate_rate, common Weibull shape for every file.
  static Catalog zipf(int n_files, double alpha, double aggregate_rate,
                      double weibull_shape, double file_size = 1.0,
                      bool allow_increasing_hazard = false);

  /// Catalog from explicit per-file processes; the aggregate rate is the
  /// sum of the per-file rates.
  static Catalog from_files(std::vector<double> sizes,
                            std::vector<InterRequestDistribution> files);

  int n_files() const { return static_cast<int>(files.size()); }
  double rate(int i) const { return files[static_cast<size_t>(i)].rate(); }
  double size(int i) const { return sizes[static_cast<size_t>(i)]; }
  double total_traffic() const;  // sum_i rate_i * size_i
  bool decreasing_hazard() const;
};

/// Eviction schedule: K potential updates with period T after each request.
/// K == 0 is static caching (content never changes after placement).
struct TimeGrid {
  double period = 1.0;  // T, hours
  int n_updates = 0;    // K

  static TimeGrid from_frequency(double updates_per_hour, double window_hours);
  static TimeGrid static_grid() { return {1.0, 0}; }

  int n_slots() const { return n_updates + 1; }
  double frequency() const { return n_updates == 0 ? 0.0 : 1.0 / period; }
  double window() const { return period * n_updates; }
  void validate() const;
};

/// Per-file, per-slot request probabilities and expected occupancy times.
/// Row i holds: request_prob(i,j) = Pr(next request for file i lands in slot
/// j), occupancy(i,j) = expected time the inter-request interval spends in
/// slot j (hours). hazard(i,j) = request_prob / occupancy approximates the
/// renewal hazard at jT.
class DemandTables {
 public:
  DemandTables(int n_files, int n_slots);

  int n_files() const { return n_files_; }
  int n_slots() const { return n_slots_; }

  double request_prob(int i, int j) const { return f_[idx(i, j)]; }
  double occupancy(int i, int j) const { return a_[idx(i, j)]; }
  double hazard(int i, int j) const { return h_[idx(i, j)]; }

  double& request_prob(int i, int j) { return f_[idx(i, j)]; }
  double& occupancy(int i, int j) { return a_[idx(i, j)]; }
  double& hazard(int i, int j) { return h_[idx(i, j)]; }

  /// True when hazard(i, .) is non-increasing for every file (precondition
  /// for the greedy single-cache solver).
  bool hazard_nonincreasing() const { return hazard_nonincreasing_; }
  void set_hazard_nonincreasing(bool v) { hazard_nonincreasing_ = v; }

 private:
  size_t idx(int i, int j) const {
    return static_cast<size_t>(i) * static_cast<size_t>(n_slots_) +
           static_cast<size_t>(j);
  }

  int n_files_;
  int n_slots_;
  std::vector<double> f_, a_, h_;
  bool hazard_nonincreasing_ = true;
};

/// Fills the demand tables for every file on the grid. Exponential rows use
/// closed forms; Weibull occupancies integrate the survival function with
/// adaptive quadrature (absolute tolerance 1e-10 per cell) and assign the
/// tail cell as mean minus the finite-interval sum.
DemandTables compute_demand_tables(const Catalog& catalog,
                                   const TimeGrid& grid);

/// Serial reference for compute_demand_tables; produces bit-identical
/// tables (the parallel version distributes whole rows).
DemandTables compute_demand_tables_serial(const Catalog& catalog,
                                          const TimeGrid& grid);

}  // namespace cttl
