#include "cttl/mds.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cttl {

Rational best_rational(double x, long long max_denominator) {
  if (max_denominator < 1)
    throw std::invalid_argument("best_rational: max_denominator must be >= 1");
  if (!(x >= 0.0) || !(x <= 1.0))
    throw std::invalid_argument("best_rational: x must lie in [0, 1]");
  if (x == 0.0) return {0, 1};
  if (x == 1.0) return {1, 1};

  // Continued-fraction convergents h/k; when the next convergent exceeds the
  // denominator budget, the answer is either the last convergent or the best
  // semiconvergent that still fits.
  long long h0 = 0, k0 = 1;  // convergent n-2
  long long h1 = 1, k1 = 0;  // convergent n-1
  double v = x;
  while (true) {
    const long long a = static_cast<long long>(std::floor(v));
    const long long h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > max_denominator) {
      const long long steps = (max_denominator - k0) / k1;
      const long long hs = steps * h1 + h0, ks = steps * k1 + k0;
      const double d_conv = std::abs(x - static_cast<double>(h1) / k1);
      const double d_semi = std::abs(x - static_cast<double>(hs) / ks);
      if (d_semi <= d_conv && steps >= 1) return {hs, ks};
      return {h1, k1};
    }
    h0 = h1;
    k0 = k1;
    h1 = h2;
    k1 = k2;
    const double r = v - static_cast<double>(a);
    if (r < 1e-12) break;  // expansion is exact at this convergent
    v = 1.0 / r;
    if (!std::isfinite(v)) break;
  }
  return {h1, k1};
}

std::vector<Rational> quantize_policy_row(const std::vector<double>& mu_row,
                                          long long max_denominator) {
  std::vector<Rational> out;
  out.reserve(mu_row.size());
  for (double mu : mu_row) {
    if (!(mu >= -1e-12) || !(mu <= 1.0 + 1e-12))
      throw std::invalid_argument("quantize: mu entries must lie in [0, 1]");
    const double clamped = std::min(1.0, std::max(0.0, mu));
    out.push_back(clamped == 0.0 ? Rational{0, 1}
                                 : best_rational(clamped, max_denominator));
  }
  // Rounding can break monotonicity; repair by rounding down so cache
  // occupancy never grows past the preceding slot.
  for (size_t j = 1; j < out.size(); ++j) {
    const auto& prev = out[j - 1];
    auto& cur = out[j];
    if (cur.num * prev.den > prev.num * cur.den) cur = prev;
  }
  return out;
}

CodeParams derive_code_params(const std::vector<Rational>& mu_row, int n_sbs,
                              double file_size) {
  if (n_sbs <= 0)
    throw std::invalid_argument("derive_code_params: n_sbs must be > 0");
  if (mu_row.empty())
    throw std::invalid_argument("derive_code_params: empty policy row");

  CodeParams cp;
  cp.per_slot_counts.assign(mu_row.size(), 0);

  long long k = 1;
  bool any = false;
  for (const Rational& r : mu_row) {
    if (r.num == 0) continue;
    any = true;
    const unsigned __int128 l =
        static_cast<unsigned __int128>(k) / std::gcd(k, r.den) *
        static_cast<unsigned __int128>(r.den);
    if (l > 1000000000000000LL)
      throw std::overflow_error(
          "derive_code_params: code length overflow; reduce max_denominator");
    k = static_cast<long long>(l);
  }
  if (!any) return cp;  // not cached: k = 0, n = 0

  cp.k = k;
  for (size_t j = 0; j < mu_row.size(); ++j)
    cp.per_slot_counts[j] = k / mu_row[j].den * mu_row[j].num;
  cp.n = static_cast<long long>(n_sbs) * cp.per_slot_counts[0];
  cp.packet_size = file_size / static_cast<double>(k);
  return cp;
}

}  // namespace cttl
