#include "cttl/scenario.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace cttl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("scenario: " + path + ": " + what);
}

void expect_keys(const json& j, const std::string& path,
                 const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(path + "." + key, "unknown field");
}

double get_num(const json& j, const std::string& path, const char* key,
               double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

}  // namespace

std::string tool_version() { return "cttl 0.1.0"; }

Scenario Scenario::from_json(const json& j) {
  Scenario s;
  expect_keys(j, "$",
              {"catalog", "geometry", "coverage", "grid", "costs",
               "cache_capacity", "modes", "quantize_max_denominator",
               "simulation", "sweep"});

  if (j.contains("catalog")) {
    const auto& c = j.at("catalog");
    expect_keys(c, "catalog",
                {"files", "file_size", "zipf_alpha", "aggregate_rate_per_hour",
                 "weibull_shape"});
    if (c.contains("files")) s.n_files = c.at("files").get<int>();
    s.file_size = get_num(c, "catalog", "file_size", s.file_size);
    s.zipf_alpha = get_num(c, "catalog", "zipf_alpha", s.zipf_alpha);
    s.aggregate_rate =
        get_num(c, "catalog", "aggregate_rate_per_hour", s.aggregate_rate);
    s.weibull_shape = get_num(c, "catalog", "weibull_shape", s.weibull_shape);
  }

  if (j.contains("coverage") && j.contains("geometry"))
    fail("$", "give either geometry or coverage, not both");
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    expect_keys(g, "geometry", {"n_sbs", "r_sbs_m", "r_mbs_m"});
    NetworkGeometry geom;
    geom.n_sbs = g.contains("n_sbs") ? g.at("n_sbs").get<int>() : 100;
    geom.r_sbs_m = get_num(g, "geometry", "r_sbs_m", 100.0);
    geom.r_mbs_m = get_num(g, "geometry", "r_mbs_m", 800.0);
    s.geometry = geom;
  }
  if (j.contains("coverage")) {
    const auto& c = j.at("coverage");
    expect_keys(c, "coverage", {"gamma", "n_sbs"});
    if (!c.contains("gamma") || !c.at("gamma").is_array())
      fail("coverage.gamma", "expected an array of probabilities");
    s.geometry.reset();
    s.explicit_gamma = c.at("gamma").get<std::vector<double>>();
    if (c.contains("n_sbs")) s.explicit_n_sbs = c.at("n_sbs").get<int>();
  }

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    expect_keys(g, "grid", {"update_freq_per_hour", "window_hours"});
    s.update_freq = get_num(g, "grid", "update_freq_per_hour", s.update_freq);
    s.window_hours = get_num(g, "grid", "window_hours", s.window_hours);
  }

  if (j.contains("costs")) {
    const auto& c = j.at("costs");
    expect_keys(c, "costs", {"mbs", "sbs", "cache"});
    s.costs.mbs = get_num(c, "costs", "mbs", s.costs.mbs);
    s.costs.sbs = get_num(c, "costs", "sbs", s.costs.sbs);
    s.costs.cache = get_num(c, "costs", "cache", s.costs.cache);
  }

  s.cache_capacity = get_num(j, "$", "cache_capacity", s.cache_capacity);
  if (j.contains("quantize_max_denominator"))
    s.quantize_max_denominator = j.at("quantize_max_denominator").get<long long>();

  if (j.contains("modes")) {
    s.modes.clear();
    for (const auto& m : j.at("modes"))
      s.modes.push_back(policy_mode_from_string(m.get<std::string>()));
    if (s.modes.empty()) fail("modes", "needs at least one mode");
  }

  if (j.contains("simulation")) {
    const auto& m = j.at("simulation");
    expect_keys(m, "simulation",
                {"horizon_hours", "warmup_fraction", "seed", "replications",
                 "update_mode", "coverage_mode"});
    s.sim.horizon_hours =
        get_num(m, "simulation", "horizon_hours", s.sim.horizon_hours);
    s.sim.warmup_fraction =
        get_num(m, "simulation", "warmup_fraction", s.sim.warmup_fraction);
    if (m.contains("seed")) s.sim.seed = m.at("seed").get<std::uint64_t>();
    if (m.contains("replications"))
      s.sim.replications = m.at("replications").get<int>();
    if (m.contains("update_mode"))
      s.sim.update_mode =
          update_mode_from_string(m.at("update_mode").get<std::string>());
    if (m.contains("coverage_mode")) {
      const auto mode = m.at("coverage_mode").get<std::string>();
      if (mode == "analytical")
        s.sim.coverage_mode = CoverageSampling::Analytical;
      else if (mode == "geometric")
        s.sim.coverage_mode = CoverageSampling::Geometric;
      else
        fail("simulation.coverage_mode", "expected analytical|geometric");
    }
  }

  if (j.contains("sweep")) {
    const auto& w = j.at("sweep");
    expect_keys(w, "sweep", {"parameter", "values"});
    SweepSpec spec;
    spec.parameter = w.at("parameter").get<std::string>();
    spec.values = w.at("values").get<std::vector<double>>();
    s.sweep = spec;
  }

  s.validate();
  return s;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("scenario: " + path + ": " + e.what());
  }
  return from_json(j);
}

json Scenario::to_json() const {
  json j;
  j["catalog"] = {{"files", n_files},
                  {"file_size", file_size},
                  {"zipf_alpha", zipf_alpha},
                  {"aggregate_rate_per_hour", aggregate_rate},
                  {"weibull_shape", weibull_shape}};
  if (geometry) {
    j["geometry"] = {{"n_sbs", geometry->n_sbs},
                     {"r_sbs_m", geometry->r_sbs_m},
                     {"r_mbs_m", geometry->r_mbs_m}};
  } else if (explicit_gamma) {
    j["coverage"] = {{"gamma", *explicit_gamma}};
    if (explicit_n_sbs >= 0) j["coverage"]["n_sbs"] = explicit_n_sbs;
  }
  j["grid"] = {{"update_freq_per_hour", update_freq},
               {"window_hours", window_hours}};
  j["costs"] = {{"mbs", costs.mbs}, {"sbs", costs.sbs}, {"cache", costs.cache}};
  j["cache_capacity"] = cache_capacity;
  j["quantize_max_denominator"] = quantize_max_denominator;
  json modes_j = json::array();
  for (auto m : modes) modes_j.push_back(to_string(m));
  j["modes"] = modes_j;
  j["simulation"] = {
      {"horizon_hours", sim.horizon_hours},
      {"warmup_fraction", sim.warmup_fraction},
      {"seed", sim.seed},
      {"replications", sim.replications},
      {"update_mode", to_string(sim.update_mode)},
      {"coverage_mode", sim.coverage_mode == CoverageSampling::Analytical
                            ? "analytical"
                            : "geometric"}};
  if (sweep) j["sweep"] = {{"parameter", sweep->parameter},
                           {"values", sweep->values}};
  return j;
}

std::uint64_t Scenario::hash() const {
  const std::string dump = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Scenario::validate() const {
  if (n_files <= 0) throw std::invalid_argument("scenario: catalog.files > 0");
  if (!(file_size > 0.0))
    throw std::invalid_argument("scenario: catalog.file_size > 0");
  if (zipf_alpha < 0.0)
    throw std::invalid_argument("scenario: catalog.zipf_alpha >= 0");
  if (!(aggregate_rate > 0.0))
    throw std::invalid_argument("scenario: catalog.aggregate_rate_per_hour > 0");
  if (!(weibull_shape > 0.0) || weibull_shape > 1.0)
    throw std::invalid_argument(
        "scenario: catalog.weibull_shape must lie in (0, 1]");
  if (geometry) geometry->validate();
  if (!geometry && !explicit_gamma)
    throw std::invalid_argument("scenario: needs geometry or coverage");
  if (update_freq < 0.0)
    throw std::invalid_argument("scenario: grid.update_freq_per_hour >= 0");
  costs.validate();
  if (cache_capacity < 0.0)
    throw std::invalid_argument("scenario: cache_capacity >= 0");
  if (quantize_max_denominator < 1)
    throw std::invalid_argument("scenario: quantize_max_denominator >= 1");
  if (!(sim.warmup_fraction >= 0.0) || sim.warmup_fraction >= 1.0)
    throw std::invalid_argument("scenario: simulation.warmup_fraction in [0,1)");
  if (sim.replications < 1)
    throw std::invalid_argument("scenario: simulation.replications >= 1");
  (void)build_grid();  // window/frequency consistency
}

Catalog Scenario::build_catalog() const {
  return Catalog::zipf(n_files, zipf_alpha, aggregate_rate, weibull_shape,
                       file_size);
}

TimeGrid Scenario::build_grid() const {
  return TimeGrid::from_frequency(update_freq, window_hours);
}

CoverageDistribution Scenario::build_coverage() const {
  if (geometry) return coverage_from_geometry(*geometry);
  return CoverageDistribution::explicit_dist(*explicit_gamma, explicit_n_sbs);
}

json PolicyFile::to_json() const {
  json j;
  j["mode"] = to_string(mode);
  j["grid"] = {{"period_hours", grid.period}, {"updates", grid.n_updates}};
  j["mu"] = json::array();
  for (int i = 0; i < policy.n_files; ++i) {
    json row = json::array();
    for (int jj = 0; jj < policy.n_slots; ++jj) row.push_back(policy.mu_at(i, jj));
    j["mu"].push_back(row);
  }
  if (!policy.nu.empty()) j["nu"] = policy.nu;
  if (!policy.beta.empty()) {
    json rows = json::array();
    for (int i = 0; i < policy.n_files; ++i) {
      json row = json::array();
      for (int jj = 0; jj < policy.n_slots; ++jj)
        row.push_back(static_cast<int>(
            policy.beta[static_cast<size_t>(i) * policy.n_slots + jj]));
      rows.push_back(row);
    }
    j["beta"] = rows;
  }
  json codes = json::array();
  for (const auto& cp : code_params) {
    codes.push_back({{"k", cp.k},
                     {"n", cp.n},
                     {"per_slot_counts", cp.per_slot_counts},
                     {"packet_size", cp.packet_size}});
  }
  j["code_params"] = codes;
  j["loads"] = {{"r_sbs", loads.r_sbs},
                {"r_mbs", loads.r_mbs},
                {"r_cache", loads.r_cache},
                {"w", loads.w},
                {"w_normalized", loads.w_normalized}};
  j["solver"] = {{"status", lp::to_string(status)},
                 {"gap", gap},
                 {"nodes", nodes},
                 {"iterations", iterations},
                 {"backend", backend}};
  j["scenario_hash"] = scenario_hash;
  j["tool_version"] = tool_version();
  return j;
}

PolicyFile PolicyFile::from_json(const json& j) {
  PolicyFile f;
  f.mode = policy_mode_from_string(j.at("mode").get<std::string>());
  f.grid.period = j.at("grid").at("period_hours").get<double>();
  f.grid.n_updates = j.at("grid").at("updates").get<int>();
  const auto& mu = j.at("mu");
  const int n = static_cast<int>(mu.size());
  const int slots = static_cast<int>(mu.at(0).size());
  f.policy = CachingPolicy::zero(f.mode, n, slots);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < slots; ++jj)
      f.policy.mu_at(i, jj) = mu.at(i).at(jj).get<double>();
  if (j.contains("nu")) f.policy.nu = j.at("nu").get<std::vector<double>>();
  if (j.contains("beta")) {
    f.policy.beta.assign(static_cast<size_t>(n) * slots, 0);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < slots; ++jj)
        f.policy.beta[static_cast<size_t>(i) * slots + jj] =
            static_cast<uint8_t>(j.at("beta").at(i).at(jj).get<int>());
  }
  for (const auto& cj : j.at("code_params")) {
    CodeParams cp;
    cp.k = cj.at("k").get<long long>();
    cp.n = cj.at("n").get<long long>();
    cp.per_slot_counts = cj.at("per_slot_counts").get<std::vector<long long>>();
    cp.packet_size = cj.at("packet_size").get<double>();
    f.code_params.push_back(std::move(cp));
  }
  const auto& l = j.at("loads");
  f.loads.r_sbs = l.at("r_sbs").get<double>();
  f.loads.r_mbs = l.at("r_mbs").get<double>();
  f.loads.r_cache = l.at("r_cache").get<double>();
  f.loads.w = l.at("w").get<double>();
  f.loads.w_normalized = l.at("w_normalized").get<double>();
  const auto& s = j.at("solver");
  const std::string st = s.at("status").get<std::string>();
  f.status = st == "optimal" ? lp::SolveStatus::Optimal
                             : lp::SolveStatus::Feasible;
  f.gap = s.at("gap").get<double>();
  f.nodes = s.at("nodes").get<long>();
  f.iterations = s.at("iterations").get<long>();
  f.backend = s.at("backend").get<std::string>();
  f.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
  return f;
}

void save_policy(const PolicyFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << file.to_json().dump(2) << "\n";
}

PolicyFile load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return PolicyFile::from_json(j);
}

std::vector<CodeParams> derive_all_code_params(const CachingPolicy& policy,
                                               const Catalog& catalog,
                                               int n_sbs,
                                               long long max_denominator) {
  std::vector<CodeParams> out;
  out.reserve(static_cast<size_t>(policy.n_files));
  for (int i = 0; i < policy.n_files; ++i) {
    std::vector<double> row(static_cast<size_t>(policy.n_slots));
    for (int j = 0; j < policy.n_slots; ++j) row[static_cast<size_t>(j)] = policy.mu_at(i, j);
    out.push_back(derive_code_params(quantize_policy_row(row, max_denominator),
                                     n_sbs, catalog.size(i)));
  }
  return out;
}

}  // namespace cttl
