#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cttl/coverage.hpp"
#include "cttl/demand.hpp"
#include "cttl/planner.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace cttl;
using testkit::Instance;
using testkit::random_instance;
using testkit::solve_w;

namespace {

Instance toy_instance() {
  Instance in;
  in.catalog = Catalog::from_files(
      {1.0, 2.0}, {InterRequestDistribution::exponential(1.0),
                   InterRequestDistribution::exponential(0.5)});
  in.grid = TimeGrid{1.0, 1};
  in.tables = compute_demand_tables(in.catalog, in.grid);
  in.cov = CoverageDistribution::explicit_dist({0.2, 0.5, 0.3}, 2);
  in.costs = CostModel{1.0, 0.2, 0.05};
  in.capacity = 0.8;
  return in;
}

// Network load of an arbitrary mu matrix, straight from the rate formulas.
double direct_w(const Instance& in, const std::vector<double>& mu) {
  CachingPolicy p = CachingPolicy::zero(PolicyMode::Sttl, in.tables.n_files(),
                                        in.tables.n_slots());
  p.mu = mu;
  const auto l = oracle::triple_sum_loads(p, in.tables, in.cov.gamma(),
                                          in.cov.n_sbs(), in.costs, in.catalog);
  return l.w;
}

double row_capacity(const Instance& in, int i, double m0, double m1) {
  return in.catalog.rate(i) * in.catalog.size(i) *
         (m0 * in.tables.occupancy(i, 0) + m1 * in.tables.occupancy(i, 1));
}

}  // namespace

TEST_CASE("evaluate_loads: zero policy fetches everything from the MBS") {
  auto in = toy_instance();
  const auto p = CachingPolicy::zero(PolicyMode::Sttl, 2, 2);
  const auto l = evaluate_loads(p, in.tables, in.cov, in.costs, in.catalog);
  CHECK(l.r_sbs == 0.0);
  CHECK(l.r_cache == 0.0);
  CHECK(l.w == doctest::Approx(in.costs.mbs * in.catalog.total_traffic())
                   .epsilon(1e-12));
}

TEST_CASE("evaluate_loads: single cache holding everything") {
  auto in = toy_instance();
  in.cov = CoverageDistribution::explicit_dist({0.0, 1.0}, 1);
  in.costs = CostModel{1.0, 0.2, 0.0};
  CachingPolicy p = CachingPolicy::zero(PolicyMode::Sttl, 2, 2);
  std::fill(p.mu.begin(), p.mu.end(), 1.0);
  const auto l = evaluate_loads(p, in.tables, in.cov, in.costs, in.catalog);
  CHECK(l.r_mbs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(l.w == doctest::Approx(in.costs.sbs * in.catalog.total_traffic())
                   .epsilon(1e-12));
}

TEST_CASE("evaluate_loads: frozen fixture and triple-sum oracle") {
  auto in = toy_instance();
  // Fixed request probabilities so the fixture stays hand-checkable.
  in.tables.request_prob(0, 0) = 0.6;
  in.tables.request_prob(0, 1) = 0.4;
  in.tables.request_prob(1, 0) = 0.3;
  in.tables.request_prob(1, 1) = 0.7;
  CachingPolicy p = CachingPolicy::zero(PolicyMode::Sttl, 2, 2);
  p.mu = {0.8, 0.2, 0.5, 0.5};
  const auto l = evaluate_loads(p, in.tables, in.cov, in.costs, in.catalog);
  CHECK(l.r_sbs == doctest::Approx(1.058).epsilon(1e-12));
  CHECK(l.r_mbs == doctest::Approx(0.942).epsilon(1e-12));
  CHECK(l.r_cache == doctest::Approx(0.48).epsilon(1e-12));
  CHECK(l.w == doctest::Approx(1.1776).epsilon(1e-12));

  const auto o = oracle::triple_sum_loads(p, in.tables, in.cov.gamma(),
                                          in.cov.n_sbs(), in.costs, in.catalog);
  CHECK(l.r_sbs == doctest::Approx(o.r_sbs).epsilon(1e-12));
  CHECK(l.r_mbs == doctest::Approx(o.r_mbs).epsilon(1e-12));
  CHECK(l.r_cache == doctest::Approx(o.r_cache).epsilon(1e-12));
  CHECK(l.r_mbs + l.r_sbs ==
        doctest::Approx(in.catalog.total_traffic()).epsilon(1e-8));
}

TEST_CASE("evaluate_loads: parallel equals serial bitwise") {
  std::mt19937_64 rng(8);
  auto cat = Catalog::zipf(40, 0.7, 50.0, 0.6);
  const auto tables = compute_demand_tables(cat, TimeGrid{0.25, 4});
  const auto cov = CoverageDistribution::poisson(1.5625, 30, 20);
  CachingPolicy p = CachingPolicy::zero(PolicyMode::Sttl, 40, 5);
  for (int i = 0; i < 40; ++i) {
    double prev = 1.0;
    for (int j = 0; j < 5; ++j) {
      prev *= static_cast<double>(rng() % 1000) / 1000.0;
      p.mu_at(i, j) = prev;
    }
  }
  const CostModel costs{1.0, 0.1, 0.003};
  const auto a = evaluate_loads(p, tables, cov, costs, cat);
  const auto b = evaluate_loads_serial(p, tables, cov, costs, cat);
  CHECK(a.r_sbs == b.r_sbs);
  CHECK(a.r_mbs == b.r_mbs);
  CHECK(a.r_cache == b.r_cache);
  CHECK(a.w == b.w);
}

TEST_CASE("epigraph program: variable and row counts, per-coverage form") {
  auto in = toy_instance();
  const auto prog = build_epigraph_program(in.tables, in.cov, in.costs,
                                           in.catalog, in.capacity,
                                           PolicyMode::Sttl,
                                           Formulation::PerCoverage);
  // 2*2 mu + 3*2*2 xi variables; capacity + 2 monotonicity + 12 linearization
  // rows (xi <= 1 sits in the bounds).
  CHECK(prog.n_vars() == 4 + 12);
  CHECK(prog.n_rows() == 1 + 2 + 12);
  CHECK(prog.n_integer() == 0);
  CHECK(prog.var_names[0] == "mu_0_0");
  CHECK(prog.var_names[3] == "mu_1_1");
}

TEST_CASE("epigraph tightness at the optimum") {
  auto in = toy_instance();
  const auto prog = build_epigraph_program(in.tables, in.cov, in.costs,
                                           in.catalog, in.capacity,
                                           PolicyMode::Sttl,
                                           Formulation::PerCoverage);
  lp::SimplexBackend backend;
  const auto sol = backend.solve(prog);
  REQUIRE(sol.status == lp::SolveStatus::Optimal);
  // xi_{b,i,j} = min{1, b mu_{i,j}} wherever c_mbs > c_sbs.
  int xi = 4;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int b = 0; b <= 2; ++b) {
        const double mu = sol.x[static_cast<size_t>(2 * i + j)];
        CHECK(sol.x[static_cast<size_t>(xi)] ==
              doctest::Approx(std::min(1.0, b * mu)).epsilon(1e-8));
        ++xi;
      }
}

TEST_CASE("sttl: trivial cost regime") {
  auto in = toy_instance();
  in.costs = CostModel{0.5, 0.5, 0.0};
  auto rep = solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity);
  CHECK(rep.status == lp::SolveStatus::Optimal);
  for (double m : rep.policy.mu) CHECK(m == 0.0);
  CHECK(rep.objective_value ==
        doctest::Approx(0.5 * in.catalog.total_traffic()).epsilon(1e-12));

  in.costs = CostModel{0.3, 0.5, 0.01};
  rep = solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity);
  for (double m : rep.policy.mu) CHECK(m == 0.0);
}

TEST_CASE("sttl vs exhaustive grid search on the toy instance") {
  const auto in = toy_instance();
  const auto rep =
      solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity);
  REQUIRE(rep.status == lp::SolveStatus::Optimal);
  CHECK(rep.certified);

  // Brute force over a 0.01 lattice of monotone rows.
  struct Option {
    double m0, m1, cost, w_term;
  };
  std::vector<std::vector<Option>> opts(2);
  for (int i = 0; i < 2; ++i) {
    for (int a = 0; a <= 100; ++a) {
      for (int b = 0; b <= a; ++b) {
        const double m0 = a / 100.0, m1 = b / 100.0;
        std::vector<double> mu{0, 0, 0, 0};
        mu[static_cast<size_t>(2 * i)] = m0;
        mu[static_cast<size_t>(2 * i + 1)] = m1;
        // Isolate file i's contribution: W(mu_i only) - W(zero).
        Instance one = in;
        const double base =
            in.costs.mbs * in.catalog.total_traffic();
        opts[static_cast<size_t>(i)].push_back(
            {m0, m1, row_capacity(in, i, m0, m1), direct_w(one, mu) - base});
      }
    }
  }
  double best = lp::kInf;
  for (const auto& o1 : opts[0])
    for (const auto& o2 : opts[1]) {
      if (o1.cost + o2.cost > in.capacity + 1e-12) continue;
      const double w =
          in.costs.mbs * in.catalog.total_traffic() + o1.w_term + o2.w_term;
      best = std::min(best, w);
    }
  CHECK(rep.objective_value <= best + 1e-9);
  CHECK(best - rep.objective_value <= 0.06);
}

TEST_CASE("ttl matches exhaustive step enumeration on the toy instance") {
  auto in = toy_instance();
  in.capacity = 1.0;
  PlannerOptions popts;
  popts.milp.gap_tol = 0.0;
  const auto rep =
      solve_ttl(in.tables, in.cov, in.costs, in.catalog, in.capacity, popts);
  REQUIRE(rep.status == lp::SolveStatus::Optimal);

  // Whole-file policies: per file keep for L slots, L in {off, 0, 1}.
  const std::vector<std::pair<double, double>> rows{{0, 0}, {1, 0}, {1, 1}};
  double best = lp::kInf;
  for (const auto& r1 : rows)
    for (const auto& r2 : rows) {
      if (row_capacity(in, 0, r1.first, r1.second) +
              row_capacity(in, 1, r2.first, r2.second) >
          in.capacity + 1e-12)
        continue;
      best = std::min(best, direct_w(in, {r1.first, r1.second, r2.first,
                                          r2.second}));
    }
  CHECK(rep.objective_value == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("fttl matches exhaustive level enumeration on the toy instance") {
  auto in = toy_instance();
  in.capacity = 1.0;
  PlannerOptions popts;
  popts.milp.gap_tol = 0.0;
  const auto rep =
      solve_fttl(in.tables, in.cov, in.costs, in.catalog, in.capacity, popts);
  REQUIRE(rep.status == lp::SolveStatus::Optimal);

  double best = lp::kInf;
  for (int l1 = 0; l1 <= 1; ++l1)
    for (int n1 = 0; n1 <= 100; ++n1)
      for (int l2 = 0; l2 <= 1; ++l2)
        for (int n2 = 0; n2 <= 100; ++n2) {
          const double v1 = n1 / 100.0, v2 = n2 / 100.0;
          const double m1b = l1 == 1 ? v1 : 0.0;
          const double m2b = l2 == 1 ? v2 : 0.0;
          if (row_capacity(in, 0, v1, m1b) + row_capacity(in, 1, v2, m2b) >
              in.capacity + 1e-12)
            continue;
          best = std::min(best, direct_w(in, {v1, m1b, v2, m2b}));
        }
  CHECK(rep.objective_value <= best + 1e-9);
  CHECK(best - rep.objective_value <= 0.03);
  // The returned policy is a valid step policy (validated inside solve);
  // double-check the step verification tolerance explicitly.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double want = rep.policy.beta[static_cast<size_t>(2 * i + j)] != 0
                              ? rep.policy.nu[static_cast<size_t>(i)]
                              : 0.0;
      CHECK(std::abs(rep.policy.mu_at(i, j) - want) <= 1e-6);
    }
}

TEST_CASE("ttl with unconstrained capacity caches whole files") {
  auto in = toy_instance();
  in.costs = CostModel{1.0, 0.0, 0.0};
  in.capacity = 10.0;  // above total size 3
  PlannerOptions popts;
  popts.milp.gap_tol = 0.0;
  const auto rep =
      solve_ttl(in.tables, in.cov, in.costs, in.catalog, in.capacity, popts);
  REQUIRE(rep.status == lp::SolveStatus::Optimal);
  for (double m : rep.policy.mu) CHECK(m == 1.0);
}

TEST_CASE("large update costs push every mode back to static caching") {
  auto in = toy_instance();
  in.costs = CostModel{1.0, 0.0, 50.0};
  PlannerOptions popts;
  popts.milp.gap_tol = 0.0;
  const double w_static = solve_w(in, PolicyMode::Static);
  for (PolicyMode mode :
       {PolicyMode::Sttl, PolicyMode::Fttl, PolicyMode::Ttl}) {
    const double w = solve_w(in, mode);
    CHECK(w >= w_static - 1e-9);  // static is feasible in every mode
    if (mode != PolicyMode::Ttl)
      CHECK(std::abs(w - w_static) <= 1e-6 * w_static);
  }
}

TEST_CASE("optimal load does not increase with SBS density") {
  double prev = lp::kInf;
  for (int b_sbs : {4, 8, 16}) {
    auto in = toy_instance();
    const NetworkGeometry geom{b_sbs, 100.0, 800.0};
    in.cov = coverage_from_geometry(geom);
    const double w = solve_w(in, PolicyMode::Sttl);
    CHECK(w <= prev + 1e-9);
    prev = w;
  }
}

TEST_CASE("fttl equals sttl under static caching (K = 0)") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 3; ++t) {
    auto in = random_instance(rng, 5, 0, 5, false);
    PlannerOptions popts;
    popts.milp.gap_tol = 0.0;
    const double w_sttl = solve_w(in, PolicyMode::Sttl);
    const auto fttl = solve_fttl(in.tables, in.cov, in.costs, in.catalog,
                                 in.capacity, popts);
    REQUIRE(fttl.status == lp::SolveStatus::Optimal);
    CHECK(std::abs(fttl.objective_value - w_sttl) <=
          1e-7 * std::max(1.0, std::abs(w_sttl)));
  }
}

TEST_CASE("formulations agree") {
  std::mt19937_64 rng(64);
  for (int t = 0; t < 5; ++t) {
    auto in = random_instance(rng, 5, 3, 5, false);
    PlannerOptions compact, percov;
    compact.formulation = Formulation::Compact;
    percov.formulation = Formulation::PerCoverage;
    const auto a =
        solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity, compact);
    const auto b =
        solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity, percov);
    CHECK(std::abs(a.objective_value - b.objective_value) <=
          1e-7 * std::max(1.0, std::abs(a.objective_value)));
  }
}

TEST_CASE("static caching: full replication when capacity allows") {
  auto in = toy_instance();
  in.costs = CostModel{1.0, 0.0, 0.0};
  in.capacity = 3.5;  // >= total size
  const auto rep =
      solve_static(in.tables, in.cov, in.costs, in.catalog, in.capacity);
  for (double m : rep.policy.mu) CHECK(m == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.loads.r_cache == 0.0);
}

TEST_CASE("static caching: single-cache greedy fill matches the LP") {
  auto in = toy_instance();
  in.cov = CoverageDistribution::explicit_dist({0.0, 1.0}, 1);
  in.costs = CostModel{1.0, 0.0, 0.0};
  in.capacity = 1.7;
  const auto rep =
      solve_static(in.tables, in.cov, in.costs, in.catalog, in.capacity);
  // Fill by traffic per unit of capacity (rate_i here), fractional remainder.
  struct F {
    double rate, size;
  };
  std::vector<F> files{{1.0, 1.0}, {0.5, 2.0}};
  std::vector<size_t> order{0, 1};  // rate 1.0 > 0.5
  double cap = in.capacity, gain = 0.0;
  for (size_t i : order) {
    const double mu = std::min(1.0, cap / files[i].size);
    gain += mu * files[i].rate * files[i].size;
    cap -= mu * files[i].size;
    if (cap <= 0) break;
  }
  const double w_greedy = in.catalog.total_traffic() - gain;
  CHECK(rep.objective_value == doctest::Approx(w_greedy).epsilon(1e-9));
  // Static rows stay constant across slots and pay no update traffic.
  for (int i = 0; i < 2; ++i)
    CHECK(rep.policy.mu_at(i, 0) == rep.policy.mu_at(i, 1));
  CHECK(rep.loads.r_cache == 0.0);
}

TEST_CASE("single-cache greedy: basics and preconditions") {
  auto in = toy_instance();
  in.costs = CostModel{1.0, 0.2, 0.0};

  // Everything fits: all mu = 1.
  auto rep = solve_single_cache_greedy(in.tables, in.costs, in.catalog, 3.0);
  for (double m : rep.policy.mu) CHECK(m == 1.0);

  // Exponential demand has constant hazard rate_i, so cells fill in
  // popularity order: file 0 (rate 1.0) first.
  rep = solve_single_cache_greedy(in.tables, in.costs, in.catalog, 1.0);
  CHECK(rep.policy.mu_at(0, 0) == 1.0);
  CHECK(rep.policy.mu_at(0, 1) == 1.0);

  CHECK_THROWS_AS(solve_single_cache_greedy(in.tables, CostModel{1.0, 0.2, 0.1},
                                            in.catalog, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_single_cache_greedy(in.tables, CostModel{0.2, 1.0, 0.0},
                                            in.catalog, 1.0),
                  std::invalid_argument);
}

TEST_CASE("theorem: greedy equals the LP on single-cache instances") {
  std::mt19937_64 rng(404);
  const auto single = CoverageDistribution::explicit_dist({0.0, 1.0}, 1);
  for (int t = 0; t < 10; ++t) {
    auto in = random_instance(rng, 8, 5, 2, false);
    in.cov = single;
    in.costs.cache = 0.0;
    const auto greedy =
        solve_single_cache_greedy(in.tables, in.costs, in.catalog, in.capacity);
    const auto lp_rep =
        solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity);
    CHECK(std::abs(greedy.objective_value - lp_rep.objective_value) <= 1e-8);
    // Monotone rows by construction.
    for (int i = 0; i < in.tables.n_files(); ++i)
      for (int j = 1; j < in.tables.n_slots(); ++j)
        CHECK(greedy.policy.mu_at(i, j) <= greedy.policy.mu_at(i, j - 1));
  }
}

TEST_CASE("theorem: single-cache equivalence of the TTL family") {
  // Capacity equal to a prefix of the greedy fill, so the optimum needs no
  // fractional cell and all three modes coincide exactly.
  auto in = toy_instance();
  in.cov = CoverageDistribution::explicit_dist({0.0, 1.0}, 1);
  in.costs = CostModel{1.0, 0.0, 0.0};
  in.capacity = in.tables.occupancy(0, 0) * 1.0 * 1.0 +
                in.tables.occupancy(0, 1) * 1.0 * 1.0;  // file 0 fully cached
  PlannerOptions popts;
  popts.milp.gap_tol = 0.0;
  const auto greedy =
      solve_single_cache_greedy(in.tables, in.costs, in.catalog, in.capacity);
  const auto fttl =
      solve_fttl(in.tables, in.cov, in.costs, in.catalog, in.capacity, popts);
  const auto ttl =
      solve_ttl(in.tables, in.cov, in.costs, in.catalog, in.capacity, popts);
  CHECK(std::abs(fttl.objective_value - greedy.objective_value) <= 1e-8);
  CHECK(std::abs(ttl.objective_value - greedy.objective_value) <= 1e-8);
}

TEST_CASE("theorem: static caching is optimal under Poisson requests") {
  std::mt19937_64 rng(777);
  for (int t = 0; t < 5; ++t) {
    auto in = random_instance(rng, 6, 4, 6, true);
    const double w_sttl = solve_w(in, PolicyMode::Sttl);
    const double w_static = solve_w(in, PolicyMode::Static);
    CHECK(std::abs(w_sttl - w_static) <=
          1e-6 * std::max(1.0, std::abs(w_static)));
  }
}

TEST_CASE("mode ordering") {
  std::mt19937_64 rng(555);
  for (int t = 0; t < 6; ++t) {
    auto in = random_instance(rng, 4, 3, 4, false);
    const double w_sttl = solve_w(in, PolicyMode::Sttl);
    const double w_fttl = solve_w(in, PolicyMode::Fttl);
    const double w_ttl = solve_w(in, PolicyMode::Ttl);
    const double tol = 1e-6 * std::max(1.0, std::abs(w_ttl));
    CHECK(w_sttl <= w_fttl + tol);
    CHECK(w_fttl <= w_ttl + tol);
  }
}

TEST_CASE("cost scaling leaves the policy unchanged") {
  const auto in = toy_instance();
  const auto base =
      solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity);
  for (double kappa : {2.0, 0.5, 3.0}) {
    Instance scaled = in;
    scaled.costs = CostModel{in.costs.mbs * kappa, in.costs.sbs * kappa,
                             in.costs.cache * kappa};
    const auto rep = solve_sttl(scaled.tables, scaled.cov, scaled.costs,
                                scaled.catalog, scaled.capacity);
    for (size_t idx = 0; idx < base.policy.mu.size(); ++idx)
      CHECK(std::abs(rep.policy.mu[idx] - base.policy.mu[idx]) <= 1e-9);
    CHECK(rep.objective_value ==
          doctest::Approx(kappa * base.objective_value).epsilon(1e-9));
  }
}

TEST_CASE("returned policies satisfy every invariant") {
  std::mt19937_64 rng(909);
  for (int t = 0; t < 4; ++t) {
    auto in = random_instance(rng, 5, 3, 5, false);
    for (PolicyMode mode : {PolicyMode::Sttl, PolicyMode::Static,
                            PolicyMode::Fttl, PolicyMode::Ttl}) {
      PlannerOptions popts;
      popts.milp.gap_tol = 1e-6;
      SolveReport rep;
      switch (mode) {
        case PolicyMode::Sttl:
          rep = solve_sttl(in.tables, in.cov, in.costs, in.catalog, in.capacity,
                           popts);
          break;
        case PolicyMode::Static:
          rep = solve_static(in.tables, in.cov, in.costs, in.catalog,
                             in.capacity, popts);
          break;
        case PolicyMode::Fttl:
          rep = solve_fttl(in.tables, in.cov, in.costs, in.catalog, in.capacity,
                           popts);
          break;
        case PolicyMode::Ttl:
          rep = solve_ttl(in.tables, in.cov, in.costs, in.catalog, in.capacity,
                          popts);
          break;
      }
      // validate() ran inside the solver; run it once more from the outside.
      rep.policy.validate(in.tables, in.catalog, in.capacity);
      CHECK(rep.policy.cache_usage(in.tables, in.catalog) <=
            in.capacity + 1e-7);
    }
  }
}
