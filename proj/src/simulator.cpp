#include "cttl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace cttl {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unit-rate arrival counting; immune to exp(-lambda) underflow.
int poisson_count(double lambda, std::mt19937_64& rng) {
  int count = 0;
  double acc = 0.0;
  while (true) {
    acc += -std::log1p(-uniform01(rng));
    if (acc > lambda) break;
    ++count;
  }
  return count;
}

// t-distribution 97.5% quantiles for small degrees of freedom.
double t_975(int dof) {
  static constexpr double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) return 12.706;
  if (dof <= 30) return table[dof - 1];
  return 1.96 + 2.4 / dof;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebULL;
  return x ^ (x >> 31);
}

struct SbsPattern {
  std::vector<double> x, y;  // positions in meters
  int size() const { return static_cast<int>(x.size()); }
};

SbsPattern draw_pattern(const NetworkGeometry& geom, std::mt19937_64& rng) {
  const double guard_radius = geom.r_mbs_m + geom.r_sbs_m;
  const double ratio = guard_radius / geom.r_mbs_m;
  const double mean_count = geom.n_sbs * ratio * ratio;
  const int m = poisson_count(mean_count, rng);
  SbsPattern p;
  p.x.reserve(static_cast<size_t>(m));
  p.y.reserve(static_cast<size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double r = guard_radius * std::sqrt(uniform01(rng));
    const double a = 2.0 * M_PI * uniform01(rng);
    p.x.push_back(r * std::cos(a));
    p.y.push_back(r * std::sin(a));
  }
  return p;
}

}  // namespace

const char* to_string(UpdateMode m) {
  return m == UpdateMode::Synchronous ? "sync" : "async";
}

UpdateMode update_mode_from_string(const std::string& s) {
  if (s == "sync" || s == "synchronous") return UpdateMode::Synchronous;
  if (s == "async" || s == "asynchronous") return UpdateMode::Asynchronous;
  throw std::invalid_argument("unknown update mode: " + s);
}

void SimConfig::validate() const {
  grid.validate();
  costs.validate();
  if (!(warmup_hours >= 0.0) || !(warmup_hours < horizon_hours))
    throw std::invalid_argument("sim: warmup must lie in [0, horizon)");
  if (policy.n_files != catalog.n_files() ||
      policy.n_slots != grid.n_slots())
    throw std::invalid_argument("sim: policy dimensions do not match");
  if (coverage_sampling == CoverageSampling::Geometric && !geometry)
    throw std::invalid_argument("sim: geometric sampling needs a geometry");
  if (batches < 2) throw std::invalid_argument("sim: need at least 2 batches");
}

int sample_user_coverage(const NetworkGeometry& geom, std::mt19937_64& rng) {
  geom.validate();
  const SbsPattern pattern = draw_pattern(geom, rng);
  const double r_user = geom.r_mbs_m * std::sqrt(uniform01(rng));
  const double a_user = 2.0 * M_PI * uniform01(rng);
  const double ux = r_user * std::cos(a_user);
  const double uy = r_user * std::sin(a_user);
  const double r2 = geom.r_sbs_m * geom.r_sbs_m;
  int b = 0;
  for (int k = 0; k < pattern.size(); ++k) {
    const double dx = pattern.x[static_cast<size_t>(k)] - ux;
    const double dy = pattern.y[static_cast<size_t>(k)] - uy;
    if (dx * dx + dy * dy <= r2) ++b;
  }
  return b;
}

SimResult run(const SimConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);

  const int n = config.catalog.n_files();
  const int k_updates = config.grid.n_updates;
  const double period = config.grid.period;
  const bool async = config.update_mode == UpdateMode::Asynchronous;
  const bool geometric =
      config.coverage_sampling == CoverageSampling::Geometric;

  // Coverage draw machinery.
  std::vector<double> gamma_cdf;
  if (!geometric) {
    gamma_cdf.resize(static_cast<size_t>(config.coverage.b_max()) + 1);
    double acc = 0.0;
    for (int b = 0; b <= config.coverage.b_max(); ++b) {
      acc += config.coverage.gamma(b);
      gamma_cdf[static_cast<size_t>(b)] = acc;
    }
  }
  SbsPattern pattern;
  if (geometric) pattern = draw_pattern(*config.geometry, rng);

  const int n_sbs_model = config.coverage.n_sbs();
  const int n_sites = geometric ? pattern.size() : n_sbs_model;

  auto slot_of = [&](double elapsed) {
    if (k_updates == 0) return 0;
    if (!(elapsed < k_updates * period)) return k_updates;
    return std::min(k_updates, static_cast<int>(elapsed / period));
  };

  // Per-file request clocks.
  using Event = std::pair<double, int>;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::vector<double> last_request(static_cast<size_t>(n), -1e300);
  for (int i = 0; i < n; ++i)
    queue.push({sample_interarrival(config.catalog.files[static_cast<size_t>(i)],
                                    rng),
                i});

  // Asynchronous per-SBS per-file timers.
  std::vector<double> last_served;
  if (async)
    last_served.assign(static_cast<size_t>(n_sites) * static_cast<size_t>(n),
                       -1e300);
  std::vector<int> site_perm(static_cast<size_t>(n_sites));
  for (int k = 0; k < n_sites; ++k) site_perm[static_cast<size_t>(k)] = k;
  std::vector<int> in_range;
  in_range.reserve(static_cast<size_t>(n_sites));

  // Accumulators.
  SimResult out;
  out.request_counts.assign(static_cast<size_t>(n), 0);
  const double measured = config.horizon_hours - config.warmup_hours;
  double bytes_sbs = 0.0, bytes_mbs = 0.0, bytes_upd = 0.0;
  std::vector<double> batch_cost(static_cast<size_t>(config.batches), 0.0);

  while (!queue.empty()) {
    const auto [t, i] = queue.top();
    if (t > config.horizon_hours) break;
    queue.pop();

    const double elapsed = t - last_request[static_cast<size_t>(i)];
    const int j = slot_of(elapsed);
    const double size = config.catalog.size(i);
    const double mu0 = config.policy.mu_at(i, 0);

    // Who is in range.
    int b = 0;
    in_range.clear();
    if (geometric) {
      const double r_user = config.geometry->r_mbs_m * std::sqrt(uniform01(rng));
      const double a_user = 2.0 * M_PI * uniform01(rng);
      const double ux = r_user * std::cos(a_user);
      const double uy = r_user * std::sin(a_user);
      const double r2 = config.geometry->r_sbs_m * config.geometry->r_sbs_m;
      for (int k = 0; k < n_sites; ++k) {
        const double dx = pattern.x[static_cast<size_t>(k)] - ux;
        const double dy = pattern.y[static_cast<size_t>(k)] - uy;
        if (dx * dx + dy * dy <= r2) {
          ++b;
          if (async) in_range.push_back(k);
        }
      }
    } else {
      const double u = uniform01(rng);
      b = static_cast<int>(std::lower_bound(gamma_cdf.begin(), gamma_cdf.end(),
                                            u) -
                           gamma_cdf.begin());
      b = std::min(b, config.coverage.b_max());
      if (async) {
        const int take = std::min(b, n_sites);
        for (int k = 0; k < take; ++k) {
          const int swap_with =
              k + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                             n_sites - k));
          std::swap(site_perm[static_cast<size_t>(k)],
                    site_perm[static_cast<size_t>(swap_with)]);
          in_range.push_back(site_perm[static_cast<size_t>(k)]);
        }
      }
    }

    // Download split and cache refills.
    double sbs_fraction = 0.0;
    double upd = 0.0;
    if (!async) {
      sbs_fraction = std::min(1.0, b * config.policy.mu_at(i, j));
      upd = n_sbs_model * size * (mu0 - config.policy.mu_at(i, j));
    } else {
      double available = 0.0;
      for (int site : in_range) {
        const size_t idx =
            static_cast<size_t>(site) * static_cast<size_t>(n) +
            static_cast<size_t>(i);
        const int js = slot_of(t - last_served[idx]);
        const double m = config.policy.mu_at(i, js);
        available += m;
        upd += size * (mu0 - m);
        last_served[idx] = t;
      }
      sbs_fraction = std::min(1.0, available);
    }
    const double sbs_bytes = size * sbs_fraction;
    const double mbs_bytes = size - sbs_bytes;

    if (t >= config.warmup_hours) {
      bytes_sbs += sbs_bytes;
      bytes_mbs += mbs_bytes;
      bytes_upd += upd;
      ++out.request_counts[static_cast<size_t>(i)];
      ++out.events;
      const int batch = std::min(
          config.batches - 1,
          static_cast<int>((t - config.warmup_hours) / measured *
                           config.batches));
      batch_cost[static_cast<size_t>(batch)] +=
          config.costs.mbs * mbs_bytes + config.costs.sbs * sbs_bytes +
          config.costs.cache * upd;
    }

    last_request[static_cast<size_t>(i)] = t;
    queue.push(
        {t + sample_interarrival(config.catalog.files[static_cast<size_t>(i)],
                                 rng),
         i});
  }

  out.measured_hours = measured;
  out.loads.r_sbs = bytes_sbs / measured;
  out.loads.r_mbs = bytes_mbs / measured;
  out.loads.r_cache = bytes_upd / measured;
  out.loads.w = config.costs.mbs * out.loads.r_mbs +
                config.costs.sbs * out.loads.r_sbs +
                config.costs.cache * out.loads.r_cache;
  out.loads.w_normalized = out.loads.w / config.catalog.aggregate_rate;

  // Batch-means confidence interval on the normalized load.
  const double batch_hours = measured / config.batches;
  double mean = 0.0;
  for (double c : batch_cost)
    mean += c / (batch_hours * config.catalog.aggregate_rate);
  mean /= config.batches;
  double var = 0.0;
  for (double c : batch_cost) {
    const double v = c / (batch_hours * config.catalog.aggregate_rate) - mean;
    var += v * v;
  }
  var /= (config.batches - 1);
  out.ci_half_width =
      t_975(config.batches - 1) * std::sqrt(var / config.batches);

  out.low_sample_warning = config.expected_requests() < 1e4;
  return out;
}

namespace {

std::vector<SimResult> replications_impl(const SimConfig& config, int n,
                                         bool parallel) {
  if (n <= 0) throw std::invalid_argument("sim: need at least 1 replication");
  std::vector<SimResult> out(static_cast<size_t>(n));
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int k = 0; k < n; ++k) {
    SimConfig rep = config;
    rep.seed = splitmix64(config.seed + static_cast<std::uint64_t>(k));
    out[static_cast<size_t>(k)] = run(rep);
  }
  return out;
}

}  // namespace

std::vector<SimResult> run_replications(const SimConfig& config, int n) {
  return replications_impl(config, n, true);
}

std::vector<SimResult> run_replications_serial(const SimConfig& config, int n) {
  return replications_impl(config, n, false);
}

ReplicationSummary summarize(const std::vector<SimResult>& reps) {
  ReplicationSummary s;
  if (reps.empty()) return s;
  const int n = static_cast<int>(reps.size());
  double var = 0.0;
  for (const auto& r : reps) {
    s.mean_w_normalized += r.loads.w_normalized;
    s.mean_mbs_fraction += r.loads.r_mbs / (r.loads.r_mbs + r.loads.r_sbs);
  }
  s.mean_w_normalized /= n;
  s.mean_mbs_fraction /= n;
  if (n > 1) {
    for (const auto& r : reps) {
      const double d = r.loads.w_normalized - s.mean_w_normalized;
      var += d * d;
    }
    var /= (n - 1);
    s.half_width = t_975(n - 1) * std::sqrt(var / n);
  }
  return s;
}

}  // namespace cttl
