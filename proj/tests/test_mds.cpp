#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cttl/mds.hpp"

using namespace cttl;

TEST_CASE("best rational approximation") {
  CHECK(best_rational(0.5, 64) == Rational{1, 2});
  CHECK(best_rational(0.0, 64) == Rational{0, 1});
  CHECK(best_rational(1.0, 64) == Rational{1, 1});
  CHECK(best_rational(1.0 / 3.0, 64) == Rational{1, 3});
  CHECK(best_rational(0.6667, 3) == Rational{2, 3});
  CHECK(best_rational(0.3333, 3) == Rational{1, 3});
  CHECK(best_rational(0.142857142857, 64) == Rational{1, 7});
  // Golden-ratio-ish: worst case for approximation.
  const Rational r = best_rational(0.6180339887498949, 64);
  CHECK(r.den <= 64);
  CHECK(std::abs(r.value() - 0.6180339887498949) < 1.0 / (55.0 * 64.0));
}

TEST_CASE("quantize policy row") {
  const auto q = quantize_policy_row({1.0, 0.6667, 0.3333, 0.0}, 3);
  REQUIRE(q.size() == 4);
  CHECK(q[0] == Rational{1, 1});
  CHECK(q[1] == Rational{2, 3});
  CHECK(q[2] == Rational{1, 3});
  CHECK(q[3] == Rational{0, 1});

  const auto zeros = quantize_policy_row({0.0, 0.0}, 64);
  CHECK(zeros[0] == Rational{0, 1});
  CHECK(zeros[1] == Rational{0, 1});

  CHECK(quantize_policy_row({0.5}, 64)[0] == Rational{1, 2});

  // Monotonicity repair rounds down.
  const auto rep = quantize_policy_row({0.334, 0.333}, 3);
  CHECK(rep[0] == Rational{1, 3});
  CHECK(rep[1].value() <= rep[0].value());
}

TEST_CASE("code parameters: worked example") {
  const std::vector<Rational> row{{1, 1}, {2, 3}, {2, 3}, {2, 3},
                                  {2, 3}, {1, 3}, {0, 1}};
  const auto cp = derive_code_params(row, 3);
  CHECK(cp.k == 3);
  CHECK(cp.n == 9);
  REQUIRE(cp.per_slot_counts.size() == 7);
  const std::vector<long long> want{3, 2, 2, 2, 2, 1, 0};
  for (size_t j = 0; j < want.size(); ++j)
    CHECK(cp.per_slot_counts[j] == want[j]);
}

TEST_CASE("code parameters: small cases") {
  const auto half = derive_code_params({{1, 2}}, 2);
  CHECK(half.k == 2);
  CHECK(half.n == 2);
  CHECK(half.per_slot_counts[0] == 1);

  const auto whole = derive_code_params({{1, 1}}, 1);
  CHECK(whole.k == 1);
  CHECK(whole.n == 1);

  const auto none = derive_code_params({{0, 1}, {0, 1}}, 4);
  CHECK(!none.cached());
  CHECK(none.n == 0);
  CHECK(none.k == 0);
}

TEST_CASE("reconstruction and decodability properties") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int slots = 1 + static_cast<int>(rng() % 7);
    const int b_sbs = 1 + static_cast<int>(rng() % 6);
    std::vector<double> row(static_cast<size_t>(slots));
    double prev = 1.0;
    for (auto& m : row) {
      prev *= static_cast<double>(rng() % 1000) / 1000.0;
      m = prev;
    }
    const auto q = quantize_policy_row(row, 64);
    const auto cp = derive_code_params(q, b_sbs);
    if (!cp.cached()) continue;
    CHECK(cp.n == b_sbs * cp.per_slot_counts[0]);
    CHECK(cp.n <= b_sbs * cp.k);
    CHECK(cp.per_slot_counts[0] <= cp.k);
    for (size_t j = 0; j < q.size(); ++j) {
      // counts / k reproduces the quantized row exactly.
      CHECK(cp.per_slot_counts[j] * q[j].den ==
            static_cast<long long>(cp.k) * q[j].num);
      if (j > 0) CHECK(cp.per_slot_counts[j] <= cp.per_slot_counts[j - 1]);
      // Decodability: b m_j >= k iff b mu_j >= 1.
      for (int b = 1; b <= b_sbs; ++b) {
        const bool packets = b * cp.per_slot_counts[j] >= cp.k;
        const bool fraction = static_cast<long long>(b) * q[j].num >= q[j].den;
        CHECK(packets == fraction);
      }
    }
  }
}
