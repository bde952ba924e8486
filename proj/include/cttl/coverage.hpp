#pragma once

#include <vector>

namespace cttl {

/// Physical deployment: B small base stations inside the macro cell.
/// Distances are in meters. lambda() is the mean number of SBSs within a
/// user's communication range when SBS positions form a Poisson point
/// process of the matching density.
struct NetworkGeometry {
  int n_sbs = 0;
  double r_sbs_m = 0.0;
  double r_mbs_m = 0.0;

  double lambda() const;
  double density_per_km2() const;  // B / (pi * r_mbs^2)
  void validate() const;
};

/// Distribution of the number of SBSs within a user's range.
/// gamma[b] = Pr(user sees exactly b SBSs), b = 0..b_max. n_sbs is the count
/// of physical SBSs paying cache-update traffic (the B factor in the update
/// rate); for explicit distributions it defaults to b_max.
class CoverageDistribution {
 public:
  enum class Source { Explicit, PoissonPpp };

  static CoverageDistribution explicit_dist(std::vector<double> gamma,
                                            int n_sbs = -1);

  /// Truncated Poisson pmf. The dropped tail mass must be below 1e-9 or
  /// construction fails naming the required truncation.
  static CoverageDistribution poisson(double lambda, int truncation,
                                      int n_sbs = -1);

  const std::vector<double>& gamma() const { return gamma_; }
  double gamma(int b) const { return gamma_[static_cast<size_t>(b)]; }
  int b_max() const { return static_cast<int>(gamma_.size()) - 1; }
  int n_sbs() const { return n_sbs_; }
  Source source() const { return source_; }
  double lambda() const { return lambda_; }
  double mean() const;

 private:
  CoverageDistribution() = default;

  std::vector<double> gamma_;
  int n_sbs_ = 0;
  Source source_ = Source::Explicit;
  double lambda_ = 0.0;
};

/// Poisson coverage probabilities for the given deployment. The default
/// truncation max(B, ceil(lambda + 12 sqrt(lambda) + 30)) keeps the dropped
/// tail mass below 1e-9 with a wide margin.
CoverageDistribution coverage_from_geometry(const NetworkGeometry& geom,
                                            int truncation = -1);

/// g(mu) = E[min{1, mu Y}] = sum_b gamma_b min{1, b mu}: the expected
/// fraction of a file recoverable from caches holding fraction mu each.
/// Increasing and concave in mu. Throws for mu outside [0, 1].
double utility(const CoverageDistribution& cov, double mu);

/// Closed form of g under an untruncated Poisson(lambda) coverage count:
///   1 + (lambda mu - 1) Q(ceil(1/mu), lambda)
///     - e^{-lambda} lambda^{ceil(1/mu)} mu / Gamma(ceil(1/mu)).
/// mu == 0 returns 0 by continuity.
double utility_poisson_closed_form(double lambda, double mu);

/// Q(k, lambda): upper regularized gamma function at integer k >= 1,
/// equal to the Poisson(lambda) CDF at k-1. Computed by the pmf recursion.
double regularized_gamma_q(int k, double lambda);

/// Piecewise-linear description of g: segment r covers
/// [breakpoints[r-1], breakpoints[r]] (with an implicit 0 on the left) and
/// has slope slopes[r]; slopes are non-increasing. Breakpoints sit at 1/b
/// for every b with gamma_b > 0.
struct PiecewiseLinearUtility {
  std::vector<double> breakpoints;  // ascending, last == 1.0
  std::vector<double> slopes;       // per segment, non-increasing
  std::vector<double> values;       // g at each breakpoint

  double value_at(double mu) const;
  int n_segments() const { return static_cast<int>(slopes.size()); }
};

PiecewiseLinearUtility utility_breakpoints(const CoverageDistribution& cov);

}  // namespace cttl
