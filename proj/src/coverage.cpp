#include "cttl/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cttl {

namespace {
constexpr double kTailMassLimit = 1e-9;

double poisson_pmf(int b, double lambda) {
  if (lambda == 0.0) return b == 0 ? 1.0 : 0.0;
  return std::exp(-lambda + b * std::log(lambda) - std::lgamma(b + 1.0));
}
}  // namespace

double NetworkGeometry::lambda() const {
  const double ratio = r_sbs_m / r_mbs_m;
  return n_sbs * ratio * ratio;
}

double NetworkGeometry::density_per_km2() const {
  const double r_km = r_mbs_m / 1000.0;
  return n_sbs / (M_PI * r_km * r_km);
}

void NetworkGeometry::validate() const {
  if (n_sbs <= 0) throw std::invalid_argument("geometry: n_sbs must be > 0");
  if (!(r_sbs_m > 0.0) || !(r_mbs_m > 0.0))
    throw std::invalid_argument("geometry: radii must be positive");
  if (!(r_sbs_m < r_mbs_m))
    throw std::invalid_argument("geometry: r_sbs must be smaller than r_mbs");
}

CoverageDistribution CoverageDistribution::explicit_dist(
    std::vector<double> gamma, int n_sbs) {
  if (gamma.empty())
    throw std::invalid_argument("coverage: gamma must be non-empty");
  double sum = 0.0;
  for (double g : gamma) {
    if (g < 0.0) throw std::invalid_argument("coverage: gamma_b must be >= 0");
    sum += g;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("coverage: gamma must sum to 1 (got " +
                                std::to_string(sum) + ")");
  CoverageDistribution cov;
  cov.gamma_ = std::move(gamma);
  cov.n_sbs_ = n_sbs >= 0 ? n_sbs : cov.b_max();
  cov.source_ = Source::Explicit;
  return cov;
}

CoverageDistribution CoverageDistribution::poisson(double lambda,
                                                   int truncation, int n_sbs) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("coverage: lambda must be positive");
  if (truncation < 0)
    throw std::invalid_argument("coverage: truncation must be >= 0");

  std::vector<double> gamma(static_cast<size_t>(truncation) + 1);
  double sum = 0.0;
  double term = std::exp(-lambda);
  for (int b = 0; b <= truncation; ++b) {
    gamma[static_cast<size_t>(b)] = term;
    sum += term;
    term *= lambda / (b + 1);
  }
  const double tail = 1.0 - sum;
  if (tail >= kTailMassLimit) {
    // Find the truncation that would satisfy the guard, for the message.
    int need = truncation;
    double s = sum, t = term;
    while (1.0 - s >= kTailMassLimit && need < 100000) {
      ++need;
      s += t;
      t *= lambda / (need + 1);
    }
    throw std::invalid_argument(
        "coverage: truncated Poisson tail mass " + std::to_string(tail) +
        " >= 1e-9; increase truncation to at least " + std::to_string(need));
  }

  CoverageDistribution cov;
  cov.gamma_ = std::move(gamma);
  cov.n_sbs_ = n_sbs >= 0 ? n_sbs : truncation;
  cov.source_ = Source::PoissonPpp;
  cov.lambda_ = lambda;
  return cov;
}

double CoverageDistribution::mean() const {
  double m = 0.0;
  for (int b = 0; b <= b_max(); ++b) m += b * gamma(b);
  return m;
}

CoverageDistribution coverage_from_geometry(const NetworkGeometry& geom,
                                            int truncation) {
  geom.validate();
  const double lambda = geom.lambda();
  if (truncation < 0) {
    truncation = std::max(
        geom.n_sbs,
        static_cast<int>(std::ceil(lambda + 12.0 * std::sqrt(lambda) + 30.0)));
  }
  return CoverageDistribution::poisson(lambda, truncation, geom.n_sbs);
}

double utility(const CoverageDistribution& cov, double mu) {
  if (!(mu >= 0.0) || !(mu <= 1.0))
    throw std::domain_error("utility: mu must lie in [0, 1]");
  double g = 0.0;
  for (int b = 1; b <= cov.b_max(); ++b)
    g += cov.gamma(b) * std::min(1.0, b * mu);
  return g;
}

double regularized_gamma_q(int k, double lambda) {
  if (k < 1) throw std::invalid_argument("regularized_gamma_q: k must be >= 1");
  if (lambda < 0.0)
    throw std::invalid_argument("regularized_gamma_q: lambda must be >= 0");
  if (lambda == 0.0) return 1.0;
  // Q(k, lambda) = sum_{i=0}^{k-1} pmf(i); stop once terms vanish past the
  // mode of the pmf.
  double term = std::exp(-lambda);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) {
    sum += term;
    if (term < 1e-300 && i > lambda) break;
    term *= lambda / (i + 1);
  }
  return std::min(sum, 1.0);
}

double utility_poisson_closed_form(double lambda, double mu) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("utility_poisson_closed_form: lambda > 0");
  if (mu < 0.0 || mu > 1.0)
    throw std::domain_error("utility_poisson_closed_form: mu must be in [0,1]");
  if (mu == 0.0) return 0.0;  // continuity limit; ceil(1/mu) is undefined here

  const double inv = 1.0 / mu;
  const double k = std::ceil(inv);
  const int ki = static_cast<int>(k);
  const double q = regularized_gamma_q(ki, lambda);
  // e^{-lambda} lambda^k / Gamma(k) == lambda * pmf(k - 1).
  const double last = lambda * poisson_pmf(ki - 1, lambda) * mu;
  return 1.0 + (lambda * mu - 1.0) * q - last;
}

double PiecewiseLinearUtility::value_at(double mu) const {
  if (!(mu >= 0.0) || !(mu <= 1.0))
    throw std::domain_error("pwl utility: mu must lie in [0, 1]");
  double lo = 0.0, v = 0.0;
  for (size_t r = 0; r < slopes.size(); ++r) {
    const double hi = breakpoints[r];
    if (mu <= hi) return v + slopes[r] * (mu - lo);
    v = values[r];
    lo = hi;
  }
  return v;
}

PiecewiseLinearUtility utility_breakpoints(const CoverageDistribution& cov) {
  PiecewiseLinearUtility pwl;
  // Segment ending at 1/b has slope sum_{b' <= b} gamma_{b'} b'; walk b
  // downward accumulating the prefix of the mean.
  std::vector<int> bs;
  for (int b = cov.b_max(); b >= 1; --b)
    if (cov.gamma(b) > 0.0) bs.push_back(b);
  if (bs.empty()) {
    // Degenerate: all mass at b = 0, utility identically zero.
    pwl.breakpoints = {1.0};
    pwl.slopes = {0.0};
    pwl.values = {0.0};
    return pwl;
  }

  double lo = 0.0, v = 0.0;
  for (size_t r = 0; r < bs.size(); ++r) {
    const int b = bs[r];
    double slope = 0.0;
    for (int bp = 1; bp <= b; ++bp) slope += cov.gamma(bp) * bp;
    const double hi = 1.0 / b;
    v += slope * (hi - lo);
    pwl.breakpoints.push_back(hi);
    pwl.slopes.push_back(slope);
    pwl.values.push_back(v);
    lo = hi;
  }
  if (pwl.breakpoints.back() < 1.0) {
    // gamma_1 == 0: g is flat between 1/b_min and 1.
    pwl.breakpoints.push_back(1.0);
    pwl.slopes.push_back(0.0);
    pwl.values.push_back(v);
  }
  return pwl;
}

}  // namespace cttl
