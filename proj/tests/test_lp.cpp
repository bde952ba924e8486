#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cttl/coverage.hpp"
#include "cttl/demand.hpp"
#include "cttl/lp.hpp"
#include "cttl/planner.hpp"

using namespace cttl;
using namespace cttl::lp;

namespace {

LinearProgram knapsack_lp(const std::vector<double>& value,
                          const std::vector<double>& weight, double cap) {
  LinearProgram prog;
  std::vector<LinearProgram::Term> terms;
  for (size_t i = 0; i < value.size(); ++i) {
    const int v = prog.add_variable(0.0, 1.0, -value[i]);
    terms.push_back({v, weight[i]});
  }
  prog.add_row(terms, Sense::Le, cap);
  return prog;
}

double fractional_knapsack_best(std::vector<double> value,
                                std::vector<double> weight, double cap) {
  std::vector<size_t> order(value.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return value[a] / weight[a] > value[b] / weight[b];
  });
  double total = 0.0;
  for (size_t i : order) {
    const double take = std::min(1.0, cap / weight[i]);
    total += take * value[i];
    cap -= take * weight[i];
    if (cap <= 0.0) break;
  }
  return total;
}

}  // namespace

TEST_CASE("simplex: tiny boxed LP") {
  LinearProgram prog;
  const int x = prog.add_variable(0.0, 1.0, -1.0, "x");
  const int y = prog.add_variable(0.0, 1.0, -1.0, "y");
  prog.add_row({{x, 1.0}, {y, 1.0}}, Sense::Le, 1.0);
  const auto sol = default_backend().solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(sol.certified);
  CHECK(sol.x[static_cast<size_t>(x)] + sol.x[static_cast<size_t>(y)] ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("simplex: pure bound flips") {
  LinearProgram prog;
  prog.add_variable(-2.0, 3.0, -1.0, "a");
  prog.add_variable(-2.0, 3.0, 1.0, "b");
  prog.add_row({{0, 1.0}, {1, 1.0}}, Sense::Le, 100.0);
  const auto sol = default_backend().solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.x[1] == doctest::Approx(-2.0));
}

TEST_CASE("simplex: equality and >= rows need phase 1") {
  LinearProgram prog;
  const int x = prog.add_variable(0.0, 10.0, 2.0, "x");
  const int y = prog.add_variable(0.0, 10.0, 3.0, "y");
  prog.add_row({{x, 1.0}, {y, 1.0}}, Sense::Eq, 4.0);
  prog.add_row({{x, 1.0}}, Sense::Ge, 1.0);
  const auto sol = default_backend().solve(prog);
  REQUIRE(sol.status == SolveStatus::Optimal);
  // Cheapest way to reach the equality is all x.
  CHECK(sol.objective == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(sol.x[static_cast<size_t>(x)] == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("simplex: infeasible and unbounded") {
  LinearProgram bad;
  const int x = bad.add_variable(0.0, 1.0, 1.0, "x");
  bad.add_row({{x, 1.0}}, Sense::Ge, 2.0);
  CHECK(default_backend().solve(bad).status == SolveStatus::Infeasible);

  LinearProgram unb;
  unb.add_variable(0.0, kInf, -1.0, "x");
  CHECK(default_backend().solve(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("simplex vs fractional-knapsack oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    std::vector<double> value, weight;
    double tot = 0.0;
    for (int i = 0; i < n; ++i) {
      value.push_back(u(rng));
      weight.push_back(u(rng));
      tot += weight.back();
    }
    const double cap = tot * u(rng);
    const auto sol = default_backend().solve(knapsack_lp(value, weight, cap));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.certified);
    CHECK(-sol.objective ==
          doctest::Approx(fractional_knapsack_best(value, weight, cap))
              .epsilon(1e-9));
  }
}

TEST_CASE("hypograph presolve agrees with the literal solve") {
  // Compact-formulation programs carry one tangent family per (file, slot);
  // the presolve must not change the optimum.
  auto cat = Catalog::zipf(6, 0.7, 20.0, 0.6);
  const auto tables = compute_demand_tables(cat, TimeGrid{0.25, 3});
  const auto cov = CoverageDistribution::poisson(1.5625, 40, 8);
  const CostModel costs{1.0, 0.1, 0.002};
  const auto prog = build_epigraph_program(tables, cov, costs, cat, 1.5,
                                           PolicyMode::Sttl);

  SimplexBackend with_presolve;
  SimplexBackend without{SimplexBackend::Options{.presolve_hypographs = false}};
  const auto a = with_presolve.solve(prog);
  const auto b = without.solve(prog);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
  CHECK(a.certified);
  CHECK(b.certified);
  CHECK(prog.max_violation(a.x) < 1e-7);
  CHECK(prog.max_violation(b.x) < 1e-7);
}

TEST_CASE("branch and bound vs knapsack enumeration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 11);
    std::vector<double> value, weight;
    double tot = 0.0;
    for (int i = 0; i < n; ++i) {
      value.push_back(u(rng));
      weight.push_back(u(rng));
      tot += weight.back();
    }
    const double cap = tot * u(rng);

    LinearProgram prog;
    std::vector<LinearProgram::Term> terms;
    for (int i = 0; i < n; ++i) {
      const int v = prog.add_variable(0.0, 1.0, -value[static_cast<size_t>(i)],
                                      "z" + std::to_string(i), true);
      terms.push_back({v, weight[static_cast<size_t>(i)]});
    }
    prog.add_row(terms, Sense::Le, cap);

    MilpOptions opts;
    opts.gap_tol = 0.0;
    const auto res = default_backend().solve_milp(prog, opts);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.gap <= 1e-9);

    double best = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      double v = 0.0, w = 0.0;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) {
          v += value[static_cast<size_t>(i)];
          w += weight[static_cast<size_t>(i)];
        }
      if (w <= cap + 1e-12) best = std::max(best, v);
    }
    CHECK(-res.objective == doctest::Approx(best).epsilon(1e-9));

    // The incumbent must be integral and feasible.
    for (int i = 0; i < n; ++i) {
      const double xi = res.x[static_cast<size_t>(i)];
      CHECK(std::abs(xi - std::round(xi)) < 1e-6);
    }
    CHECK(prog.max_violation(res.x) < 1e-7);
  }
}

TEST_CASE("branch and bound respects the node budget") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.4, 0.6);
  LinearProgram prog;
  std::vector<LinearProgram::Term> terms;
  const int n = 18;
  for (int i = 0; i < n; ++i) {
    const int v = prog.add_variable(0.0, 1.0, -u(rng), "z" + std::to_string(i),
                                    true);
    terms.push_back({v, u(rng)});
  }
  prog.add_row(terms, Sense::Le, 2.5);
  MilpOptions opts;
  opts.gap_tol = 0.0;
  opts.node_limit = 3;
  const auto res = default_backend().solve_milp(prog, opts);
  // With almost no nodes we still expect an incumbent from the dive, with
  // an honest positive gap.
  if (res.status == SolveStatus::Feasible) CHECK(res.gap > 0.0);
  CHECK(res.nodes <= 4);
}

TEST_CASE("lp file export") {
  LinearProgram prog;
  const int x = prog.add_variable(0.0, 1.0, -1.5, "alpha");
  const int y = prog.add_variable(0.0, kInf, 2.0, "beta 2");
  const int z = prog.add_variable(0.0, 1.0, 0.0, "gate", true);
  prog.add_row({{x, 1.0}, {y, -2.0}}, Sense::Le, 3.0, "cap");
  prog.add_row({{x, 1.0}, {z, 1.0}}, Sense::Ge, 0.5, "floor");
  std::ostringstream os;
  write_lp_format(prog, os);
  const std::string text = os.str();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("Generals") != std::string::npos);
  CHECK(text.find("beta_2") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
