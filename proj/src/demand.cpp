#include "cttl/demand.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cttl/quadrature.hpp"

namespace cttl {

namespace {
constexpr double kOccupancyTol = 1e-10;
}

InterRequestDistribution::InterRequestDistribution(Kind kind, double shape,
                                                   double rate)
    : kind_(kind), shape_(shape), rate_(rate) {
  scale_ = 1.0 / (rate_ * std::tgamma(1.0 + 1.0 / shape_));
}

InterRequestDistribution InterRequestDistribution::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("exponential: rate must be positive");
  return InterRequestDistribution(Kind::Exponential, 1.0, rate);
}

InterRequestDistribution InterRequestDistribution::weibull(
    double shape, double rate, bool allow_increasing_hazard) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("weibull: rate must be positive");
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw std::invalid_argument("weibull: shape must be positive");
  if (shape > 1.0 && !allow_increasing_hazard)
    throw std::invalid_argument(
        "weibull: shape " + std::to_string(shape) +
        " > 1 gives an increasing hazard; pass allow_increasing_hazard to "
        "construct anyway (greedy solver unavailable)");
  return InterRequestDistribution(Kind::Weibull, shape, rate);
}

double InterRequestDistribution::cdf(double t) const {
  if (t < 0.0) throw std::domain_error("cdf: negative time");
  return -std::expm1(-std::pow(t / scale_, shape_));
}

double InterRequestDistribution::survival(double t) const {
  if (t < 0.0) throw std::domain_error("survival: negative time");
  return std::exp(-std::pow(t / scale_, shape_));
}

double InterRequestDistribution::quantile(double u) const {
  if (!(u >= 0.0) || u >= 1.0)
    throw std::domain_error("quantile: u must lie in [0, 1)");
  return scale_ * std::pow(-std::log1p(-u), 1.0 / shape_);
}

double sample_interarrival(const InterRequestDistribution& dist,
                           std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return dist.quantile(u);
}

Catalog Catalog::zipf(int n_files, double alpha, double aggregate_rate,
                      double weibull_shape, double file_size,
                      bool allow_increasing_hazard) {
  if (n_files <= 0) throw std::invalid_argument("catalog: n_files must be > 0");
  if (alpha < 0.0) throw std::invalid_argument("catalog: zipf alpha must be >= 0");
  if (!(aggregate_rate > 0.0))
    throw std::invalid_argument("catalog: aggregate rate must be positive");
  if (!(file_size > 0.0))
    throw std::invalid_argument("catalog: file size must be positive");

  double norm = 0.0;
  for (int i = 1; i <= n_files; ++i) norm += std::pow(i, -alpha);

  Catalog cat;
  cat.zipf_alpha = alpha;
  cat.aggregate_rate = aggregate_rate;
  cat.sizes.assign(static_cast<size_t>(n_files), file_size);
  cat.files.reserve(static_cast<size_t>(n_files));
  for (int i = 1; i <= n_files; ++i) {
    const double p = std::pow(i, -alpha) / norm;
    cat.files.push_back(InterRequestDistribution::weibull(
        weibull_shape, p * aggregate_rate, allow_increasing_hazard));
  }
  return cat;
}

Catalog Catalog::from_files(std::vector<double> sizes,
                            std::vector<InterRequestDistribution> files) {
  if (sizes.size() != files.size() || files.empty())
    throw std::invalid_argument("catalog: sizes and files must match");
  for (double s : sizes)
    if (!(s > 0.0)) throw std::invalid_argument("catalog: sizes must be > 0");
  Catalog cat;
  cat.sizes = std::move(sizes);
  cat.files = std::move(files);
  for (const auto& f : cat.files) cat.aggregate_rate += f.rate();
  return cat;
}

double Catalog::total_traffic() const {
  double sum = 0.0;
  for (int i = 0; i < n_files(); ++i) sum += rate(i) * size(i);
  return sum;
}

bool Catalog::decreasing_hazard() const {
  for (const auto& f : files)
    if (!f.decreasing_hazard()) return false;
  return true;
}

TimeGrid TimeGrid::from_frequency(double updates_per_hour,
                                  double window_hours) {
  if (updates_per_hour < 0.0)
    throw std::invalid_argument("grid: update frequency must be >= 0");
  if (updates_per_hour == 0.0) return static_grid();
  if (!(window_hours > 0.0))
    throw std::invalid_argument("grid: window must be positive");
  const double k_real = updates_per_hour * window_hours;
  const int k = static_cast<int>(std::lround(k_real));
  if (std::abs(k_real - k) > 1e-9)
    throw std::invalid_argument(
        "grid: update frequency times window must be an integer number of "
        "slots");
  return {1.0 / updates_per_hour, k};
}

void TimeGrid::validate() const {
  if (!(period > 0.0) || !std::isfinite(period))
    throw std::invalid_argument("grid: period must be positive");
  if (n_updates < 0)
    throw std::invalid_argument("grid: n_updates must be >= 0");
}

DemandTables::DemandTables(int n_files, int n_slots)
    : n_files_(n_files),
      n_slots_(n_slots),
      f_(static_cast<size_t>(n_files) * static_cast<size_t>(n_slots), 0.0),
      a_(f_.size(), 0.0),
      h_(f_.size(), 0.0) {}

namespace {

void fill_row(const InterRequestDistribution& dist, const TimeGrid& grid,
              DemandTables& out, int i) {
  const int k = grid.n_updates;
  const double t_step = grid.period;
  const double mean = dist.mean();

  if (k == 0) {
    out.request_prob(i, 0) = 1.0;
    out.occupancy(i, 0) = mean;
    out.hazard(i, 0) = 1.0 / mean;
    return;
  }

  // Request probabilities from survival differences; the survival form
  // avoids cancellation for slots deep in the tail.
  double survival_lo = 1.0;
  for (int j = 0; j < k; ++j) {
    const double survival_hi = dist.survival((j + 1) * t_step);
    out.request_prob(i, j) = survival_lo - survival_hi;
    survival_lo = survival_hi;
  }
  out.request_prob(i, k) = survival_lo;

  double finite_sum = 0.0;
  if (dist.shape() == 1.0) {
    const double rate = dist.rate();
    for (int j = 0; j < k; ++j) {
      out.occupancy(i, j) = out.request_prob(i, j) / rate;
      finite_sum += out.occupancy(i, j);
    }
  } else {
    for (int j = 0; j < k; ++j) {
      const double cell = detail::integrate_adaptive(
          [&](double t) { return dist.survival(t); }, j * t_step,
          (j + 1) * t_step, kOccupancyTol);
      out.occupancy(i, j) = cell;
      finite_sum += cell;
    }
  }
  // Tail cell: mean minus the finite part (the improper integral of the
  // survival function over [0, inf) equals the mean).
  out.occupancy(i, k) = std::max(mean - finite_sum, 1e-300);

  for (int j = 0; j <= k; ++j)
    out.hazard(i, j) = out.request_prob(i, j) / out.occupancy(i, j);
}

DemandTables compute_tables_impl(const Catalog& catalog, const TimeGrid& grid,
                                 bool parallel) {
  grid.validate();
  const int n = catalog.n_files();
  DemandTables out(n, grid.n_slots());

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i)
    fill_row(catalog.files[static_cast<size_t>(i)], grid, out, i);

  bool nonincreasing = true;
  for (int i = 0; i < n && nonincreasing; ++i)
    for (int j = 0; j + 1 < grid.n_slots(); ++j)
      if (out.hazard(i, j + 1) > out.hazard(i, j) * (1.0 + 1e-12) + 1e-15) {
        nonincreasing = false;
        break;
      }
  out.set_hazard_nonincreasing(nonincreasing);
  return out;
}

}  // namespace

DemandTables compute_demand_tables(const Catalog& catalog,
                                   const TimeGrid& grid) {
  return compute_tables_impl(catalog, grid, true);
}

DemandTables compute_demand_tables_serial(const Catalog& catalog,
                                          const TimeGrid& grid) {
  return compute_tables_impl(catalog, grid, false);
}

}  // namespace cttl
