#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cttl/figures.hpp"
#include "cttl/scenario.hpp"

using namespace cttl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("cttl_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("defaults mirror the reference setup") {
  const Scenario s = Scenario::defaults();
  CHECK(s.n_files == 100);
  CHECK(s.file_size == 1.0);
  CHECK(s.weibull_shape == 0.6);
  CHECK(s.zipf_alpha == 0.7);
  CHECK(s.aggregate_rate == 100.0);
  REQUIRE(s.geometry.has_value());
  CHECK(s.geometry->n_sbs == 100);
  CHECK(s.geometry->r_sbs_m == 100.0);
  CHECK(s.geometry->r_mbs_m == 800.0);
  CHECK(s.cache_capacity == 10.0);
  CHECK(s.costs.mbs == 1.0);
  CHECK(s.costs.sbs == 0.0);
  CHECK(s.update_freq == 6.0);
  CHECK(s.window_hours == 1.0);
  CHECK(s.build_grid().n_updates == 6);
  CHECK(s.build_coverage().lambda() == doctest::Approx(1.5625));
}

TEST_CASE("round trip through json") {
  Scenario s = Scenario::defaults();
  s.n_files = 12;
  s.costs.cache = 1e-3;
  s.modes = {PolicyMode::Sttl, PolicyMode::Ttl};
  const Scenario back = Scenario::from_json(s.to_json());
  CHECK(back.n_files == 12);
  CHECK(back.costs.cache == 1e-3);
  CHECK(back.modes.size() == 2);
  CHECK(back.hash() == s.hash());
}

TEST_CASE("field-addressed errors") {
  nlohmann::json j;
  j["catalog"]["files"] = 10;
  j["catalog"]["zipff_alpha"] = 0.7;  // typo
  CHECK_THROWS_WITH_AS(Scenario::from_json(j),
                       "scenario: catalog.zipff_alpha: unknown field",
                       std::invalid_argument);

  nlohmann::json bad;
  bad["catalog"]["weibull_shape"] = 1.4;
  CHECK_THROWS_AS(Scenario::from_json(bad), std::invalid_argument);

  nlohmann::json both;
  both["geometry"]["n_sbs"] = 5;
  both["coverage"]["gamma"] = {0.5, 0.5};
  CHECK_THROWS_AS(Scenario::from_json(both), std::invalid_argument);
}

TEST_CASE("explicit coverage scenarios") {
  nlohmann::json j;
  j["coverage"]["gamma"] = {0.0, 1.0};
  j["coverage"]["n_sbs"] = 1;
  j["catalog"]["files"] = 4;
  const Scenario s = Scenario::from_json(j);
  const auto cov = s.build_coverage();
  CHECK(cov.b_max() == 1);
  CHECK(cov.n_sbs() == 1);
}

TEST_CASE("policy files round-trip exactly") {
  TempDir tmp;
  PolicyFile pf;
  pf.mode = PolicyMode::Fttl;
  pf.grid = TimeGrid{0.25, 3};
  pf.policy = CachingPolicy::zero(PolicyMode::Fttl, 3, 4);
  for (int i = 0; i < 3; ++i) {
    const double level = (i + 1) / 3.0;
    pf.policy.nu[static_cast<size_t>(i)] = level;
    for (int j = 0; j <= i; ++j) {
      pf.policy.mu_at(i, j) = level;
      pf.policy.beta[static_cast<size_t>(i) * 4 + j] = 1;
    }
  }
  pf.code_params = {CodeParams{3, 9, {3, 2, 2, 1}, 1.0 / 3},
                    CodeParams{2, 4, {2, 1, 0, 0}, 0.5},
                    CodeParams{}};
  pf.loads = LoadBreakdown{0.3, 0.7, 0.1, 0.75, 0.0075};
  pf.gap = 1e-5;
  pf.nodes = 17;
  pf.iterations = 230;
  pf.backend = "bundled-simplex";
  pf.scenario_hash = 0xabcdef0102030405ULL;

  const std::string path = (tmp.path / "policy.json").string();
  save_policy(pf, path);
  const PolicyFile back = load_policy(path);
  CHECK(back.mode == pf.mode);
  CHECK(back.grid.period == pf.grid.period);
  CHECK(back.policy.mu == pf.policy.mu);  // exact doubles
  CHECK(back.policy.nu == pf.policy.nu);
  CHECK(back.policy.beta == pf.policy.beta);
  CHECK(back.code_params.size() == 3);
  CHECK(back.code_params[0].k == 3);
  CHECK(back.code_params[0].per_slot_counts == pf.code_params[0].per_slot_counts);
  CHECK(back.loads.w == pf.loads.w);
  CHECK(back.scenario_hash == pf.scenario_hash);
}

TEST_CASE("code parameters for a whole policy") {
  auto cat = Catalog::zipf(2, 0.0, 2.0, 1.0);
  CachingPolicy p = CachingPolicy::zero(PolicyMode::Sttl, 2, 3);
  p.mu = {1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0};
  const auto cps = derive_all_code_params(p, cat, 3, 64);
  REQUIRE(cps.size() == 2);
  CHECK(cps[0].k == 3);
  CHECK(cps[0].n == 9);
  CHECK(!cps[1].cached());
}

TEST_CASE("figure csv: small scenario, density sweep shape") {
  TempDir tmp;
  Scenario s = Scenario::defaults();
  s.n_files = 4;
  s.aggregate_rate = 10.0;
  s.cache_capacity = 0.8;
  s.update_freq = 2.0;
  s.sim.replications = 2;
  s.sim.horizon_hours = 150.0;

  const std::string path = (tmp.path / "fig.csv").string();
  FigureOptions opts;
  opts.gap_tol = 1e-6;
  write_figure_csv(FigureId::Shape, s, path, opts);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int comments = 0, rows = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      ++comments;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      CHECK(line.rfind("shape,static,ttl,fttl,sttl", 0) == 0);
      continue;
    }
    ++rows;
  }
  CHECK(comments >= 4);  // provenance: version, figure, hash, seed
  CHECK(rows == 10);
}
