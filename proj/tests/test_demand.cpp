#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cttl/demand.hpp"
#include "oracles.hpp"

using namespace cttl;

namespace {
constexpr double kExpm1 = 0.63212055882855768;  // 1 - e^{-1}
}

TEST_CASE("cdf basics") {
  const auto exp1 = InterRequestDistribution::exponential(1.0);
  CHECK(exp1.cdf(0.0) == 0.0);

  // Weibull with shape 1 and rate 2 has scale 1/2; cdf(0.5) = 1 - e^{-1}.
  const auto w = InterRequestDistribution::weibull(1.0, 2.0);
  CHECK(w.cdf(0.5) == doctest::Approx(kExpm1).epsilon(1e-14));

  const auto heavy = InterRequestDistribution::weibull(0.6, 1.0);
  CHECK(heavy.cdf(1e9) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)exp1.cdf(-0.1), std::domain_error);

  // Monotone non-decreasing in t.
  double prev = 0.0;
  for (double t = 0.0; t < 5.0; t += 0.1) {
    const double v = heavy.cdf(t);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("exponential equals weibull shape 1") {
  const auto e = InterRequestDistribution::exponential(0.7);
  const auto w = InterRequestDistribution::weibull(1.0, 0.7);
  for (double t : {0.0, 0.3, 1.0, 2.5, 10.0})
    CHECK(std::abs(e.cdf(t) - w.cdf(t)) < 1e-12);
}

TEST_CASE("shape restriction") {
  CHECK_THROWS_AS(InterRequestDistribution::weibull(1.2, 1.0),
                  std::invalid_argument);
  const auto d = InterRequestDistribution::weibull(1.2, 1.0, true);
  CHECK(!d.decreasing_hazard());
}

TEST_CASE("demand tables: exponential closed form") {
  auto cat = Catalog::from_files({1.0}, {InterRequestDistribution::exponential(1.0)});
  const TimeGrid grid{1.0, 1};
  const auto t = compute_demand_tables(cat, grid);
  const double e1 = std::exp(-1.0);
  CHECK(t.request_prob(0, 0) == doctest::Approx(1.0 - e1).epsilon(1e-14));
  CHECK(t.request_prob(0, 1) == doctest::Approx(e1).epsilon(1e-14));
  CHECK(t.occupancy(0, 0) == doctest::Approx(1.0 - e1).epsilon(1e-12));
  CHECK(t.occupancy(0, 1) == doctest::Approx(e1).epsilon(1e-12));
}

TEST_CASE("demand tables: static grid") {
  auto cat = Catalog::zipf(4, 0.7, 10.0, 0.6);
  const auto t = compute_demand_tables(cat, TimeGrid::static_grid());
  for (int i = 0; i < 4; ++i) {
    CHECK(t.request_prob(i, 0) == 1.0);
    CHECK(t.occupancy(i, 0) ==
          doctest::Approx(1.0 / cat.rate(i)).epsilon(1e-9));
  }
}

TEST_CASE("demand tables: normalization identities") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> shape_d(0.2, 1.0), rate_d(0.05, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    std::vector<double> sizes;
    std::vector<InterRequestDistribution> files;
    for (int i = 0; i < n; ++i) {
      sizes.push_back(1.0);
      files.push_back(
          InterRequestDistribution::weibull(shape_d(rng), rate_d(rng)));
    }
    auto cat = Catalog::from_files(sizes, files);
    const TimeGrid grid{0.125 + 0.25 * (trial % 4), static_cast<int>(rng() % 7)};
    const auto t = compute_demand_tables(cat, grid);
    for (int i = 0; i < n; ++i) {
      double sf = 0.0, sa = 0.0;
      for (int j = 0; j < t.n_slots(); ++j) {
        CHECK(t.request_prob(i, j) >= 0.0);
        CHECK(t.request_prob(i, j) <= 1.0);
        CHECK(t.occupancy(i, j) > 0.0);
        sf += t.request_prob(i, j);
        sa += t.occupancy(i, j);
      }
      CHECK(std::abs(sf - 1.0) < 1e-10);
      CHECK(std::abs(sa - 1.0 / cat.rate(i)) < 1e-8);
    }
    CHECK(t.hazard_nonincreasing());
  }
}

TEST_CASE("weibull occupancy cells match the incomplete-gamma closed form") {
  const double shape = 0.6, rate = 1.0;
  auto cat = Catalog::from_files(
      {1.0}, {InterRequestDistribution::weibull(shape, rate)});
  const TimeGrid grid{1.0 / 6.0, 6};
  const auto t = compute_demand_tables(cat, grid);
  const double scale = cat.files[0].scale();
  for (int j = 0; j < 6; ++j) {
    const double ref = oracle::weibull_occupancy(shape, scale, j * grid.period,
                                                 (j + 1) * grid.period);
    CHECK(t.occupancy(0, j) == doctest::Approx(ref).epsilon(1e-8));
  }
  const double tail = oracle::weibull_occupancy(
      shape, scale, 6 * grid.period, std::numeric_limits<double>::infinity());
  CHECK(t.occupancy(0, 6) == doctest::Approx(tail).epsilon(1e-7));
}

TEST_CASE("very bursty shapes stay normalized") {
  auto cat = Catalog::zipf(6, 0.7, 100.0, 0.1);
  const auto t = compute_demand_tables(cat, TimeGrid{1.0 / 6.0, 6});
  for (int i = 0; i < 6; ++i) {
    double sa = 0.0;
    for (int j = 0; j <= 6; ++j) sa += t.occupancy(i, j);
    CHECK(std::abs(sa - 1.0 / cat.rate(i)) < 1e-8);
    CHECK(t.request_prob(i, 0) > 0.9);  // most requests land in slot 0
  }
}

TEST_CASE("hazard ratio: constant for exponential, decreasing for weibull") {
  auto cat = Catalog::from_files(
      {1.0, 1.0}, {InterRequestDistribution::exponential(2.0),
                   InterRequestDistribution::weibull(0.5, 2.0)});
  const auto t = compute_demand_tables(cat, TimeGrid{1e-3, 5});
  for (int j = 0; j <= 5; ++j)
    CHECK(t.hazard(0, j) == doctest::Approx(2.0).epsilon(1e-6));
  for (int j = 0; j < 5; ++j) CHECK(t.hazard(1, j + 1) <= t.hazard(1, j));

  // Increasing-hazard shapes are flagged so the greedy refuses them.
  auto inc = Catalog::from_files(
      {1.0}, {InterRequestDistribution::weibull(1.6, 1.0, true)});
  const auto ti = compute_demand_tables(inc, TimeGrid{0.25, 4});
  CHECK(!ti.hazard_nonincreasing());
}

TEST_CASE("weibull shape 1 tables equal exponential tables") {
  auto ce = Catalog::from_files({1.0}, {InterRequestDistribution::exponential(3.0)});
  auto cw = Catalog::from_files({1.0}, {InterRequestDistribution::weibull(1.0, 3.0)});
  const TimeGrid grid{0.2, 4};
  const auto te = compute_demand_tables(ce, grid);
  const auto tw = compute_demand_tables(cw, grid);
  for (int j = 0; j <= 4; ++j) {
    CHECK(std::abs(te.request_prob(0, j) - tw.request_prob(0, j)) < 1e-10);
    CHECK(std::abs(te.occupancy(0, j) - tw.occupancy(0, j)) < 1e-10);
  }
}

TEST_CASE("parallel tables match the serial reference bitwise") {
  auto cat = Catalog::zipf(64, 0.7, 100.0, 0.6);
  const TimeGrid grid{1.0 / 6.0, 6};
  const auto a = compute_demand_tables(cat, grid);
  const auto b = compute_demand_tables_serial(cat, grid);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j <= 6; ++j) {
      CHECK(a.request_prob(i, j) == b.request_prob(i, j));
      CHECK(a.occupancy(i, j) == b.occupancy(i, j));
    }
}

TEST_CASE("interarrival sampling") {
  const auto d = InterRequestDistribution::weibull(1.0, 1.0);
  CHECK(d.quantile(kExpm1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.quantile(0.0) == 0.0);

  const auto bursty = InterRequestDistribution::weibull(0.6, 2.0);
  std::mt19937_64 rng(7);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += sample_interarrival(bursty, rng);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));

  // Same seed, same stream.
  std::mt19937_64 r1(99), r2(99);
  for (int i = 0; i < 10; ++i)
    CHECK(sample_interarrival(bursty, r1) == sample_interarrival(bursty, r2));
}

TEST_CASE("zipf catalog invariants") {
  auto cat = Catalog::zipf(100, 0.7, 100.0, 0.6);
  double sum_rate = 0.0;
  for (int i = 0; i < 100; ++i) sum_rate += cat.rate(i);
  CHECK(std::abs(sum_rate - 100.0) < 1e-9);
  CHECK(cat.rate(0) > cat.rate(99));
  // Popularity masses normalize.
  double mass = 0.0;
  for (int i = 0; i < 100; ++i) mass += cat.rate(i) / cat.aggregate_rate;
  CHECK(std::abs(mass - 1.0) < 1e-12);
}

TEST_CASE("grid construction") {
  const auto g = TimeGrid::from_frequency(6.0, 1.0);
  CHECK(g.n_updates == 6);
  CHECK(g.period == doctest::Approx(1.0 / 6.0));
  CHECK(TimeGrid::from_frequency(0.0, 1.0).n_updates == 0);
  CHECK_THROWS_AS(TimeGrid::from_frequency(2.5, 1.0), std::invalid_argument);
}
