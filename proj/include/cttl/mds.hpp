#pragma once

#include <cstdint>
#include <vector>

namespace cttl {

/// Rational number in lowest terms, den >= 1.
struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / den; }
  bool operator==(const Rational&) const = default;
};

/// Best rational approximation of x in [0, 1] with denominator bounded by
/// max_denominator (continued-fraction convergents and semiconvergents).
Rational best_rational(double x, long long max_denominator);

/// Quantizes a monotone policy row to rationals with bounded denominators.
/// Exact zeros stay zero; monotonicity violations introduced by rounding are
/// repaired downward so the quantized row never exceeds the cached mass of
/// the input ordering.
std::vector<Rational> quantize_policy_row(const std::vector<double>& mu_row,
                                          long long max_denominator = 64);

/// MDS code parameters for one file: k source packets, n coded packets
/// spread over the SBSs, and the per-slot cached packet counts m_j = k mu_j.
/// A user within range of b SBSs in slot j decodes iff b * m_j >= k.
struct CodeParams {
  long long k = 0;
  long long n = 0;
  std::vector<long long> per_slot_counts;
  double packet_size = 0.0;

  bool cached() const { return n > 0; }
};

/// Derives (k, n) from a quantized, monotone policy row: k is the least
/// common multiple of the denominators of the nonzero entries (the smallest
/// integer with k mu_j integral for all j), n = B k mu_0. An all-zero row
/// yields the designated "not cached" value (k = 0, n = 0).
CodeParams derive_code_params(const std::vector<Rational>& mu_row, int n_sbs,
                              double file_size = 1.0);

}  // namespace cttl
