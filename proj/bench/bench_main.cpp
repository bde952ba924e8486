// Times the OpenMP kernels against their serial reference implementations
// and verifies the outputs match bit for bit.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cttl/coverage.hpp"
#include "cttl/demand.hpp"
#include "cttl/planner.hpp"
#include "cttl/simulator.hpp"

using namespace cttl;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  using clock = std::chrono::steady_clock;
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = clock::now();
    fn();
    const auto t1 = clock::now();
    best = std::min(best,
                    std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms,
            bool identical) {
  printf("%-28s %10.2f ms %10.2f ms %7.2fx   %s\n", name, serial_ms,
         parallel_ms, serial_ms / parallel_ms,
         identical ? "outputs identical" : "OUTPUTS DIFFER");
}

}  // namespace

int main() {
#ifdef _OPENMP
  printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  printf("built without OpenMP; parallel timings equal serial\n");
#endif
  printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    const auto cat = Catalog::zipf(2000, 0.7, 100.0, 0.6);
    const TimeGrid grid{1.0 / 6.0, 6};
    DemandTables serial_tables(1, 1), parallel_tables(1, 1);
    const double ts =
        time_ms([&] { serial_tables = compute_demand_tables_serial(cat, grid); },
                3);
    const double tp =
        time_ms([&] { parallel_tables = compute_demand_tables(cat, grid); }, 3);
    bool same = true;
    for (int i = 0; i < 2000 && same; ++i)
      for (int j = 0; j <= 6; ++j)
        if (serial_tables.occupancy(i, j) != parallel_tables.occupancy(i, j) ||
            serial_tables.request_prob(i, j) !=
                parallel_tables.request_prob(i, j)) {
          same = false;
          break;
        }
    report("demand tables (N=2000)", ts, tp, same);
  }

  {
    const int n = 5000;
    const auto cat = Catalog::zipf(n, 0.7, 100.0, 0.6);
    const TimeGrid grid{1.0 / 6.0, 6};
    const auto tables = compute_demand_tables(cat, grid);
    const auto cov = coverage_from_geometry(NetworkGeometry{100, 100.0, 800.0});
    const CostModel costs{1.0, 0.0, 1e-3};
    CachingPolicy policy = CachingPolicy::zero(PolicyMode::Sttl, n, 7);
    std::mt19937_64 rng(1);
    for (int i = 0; i < n; ++i) {
      double prev = 1.0;
      for (int j = 0; j < 7; ++j) {
        prev *= static_cast<double>(rng() % 1000) / 999.0;
        policy.mu_at(i, j) = prev;
      }
    }
    LoadBreakdown a, b;
    const double ts = time_ms(
        [&] { a = evaluate_loads_serial(policy, tables, cov, costs, cat); }, 5);
    const double tp = time_ms(
        [&] { b = evaluate_loads(policy, tables, cov, costs, cat); }, 5);
    report("load evaluation (N=5000)", ts, tp,
           a.w == b.w && a.r_sbs == b.r_sbs && a.r_cache == b.r_cache);
  }

  {
    SimConfig sim;
    sim.catalog = Catalog::zipf(50, 0.7, 100.0, 0.6);
    sim.grid = TimeGrid{1.0 / 6.0, 6};
    sim.coverage = coverage_from_geometry(NetworkGeometry{20, 100.0, 800.0});
    sim.costs = CostModel{1.0, 0.0, 1e-3};
    sim.policy = CachingPolicy::zero(PolicyMode::Sttl, 50, 7);
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 7; ++j)
        sim.policy.mu_at(i, j) = 1.0 / (1.0 + i) / (1.0 + j);
    sim.horizon_hours = 400.0;
    sim.warmup_hours = 40.0;
    sim.seed = 7;
    std::vector<SimResult> a, b;
    const double ts =
        time_ms([&] { a = run_replications_serial(sim, 16); }, 2);
    const double tp = time_ms([&] { b = run_replications(sim, 16); }, 2);
    bool same = a.size() == b.size();
    for (size_t k = 0; same && k < a.size(); ++k)
      same = a[k].loads.w == b[k].loads.w && a[k].events == b[k].events;
    report("simulation (16 replications)", ts, tp, same);
  }

  return 0;
}
