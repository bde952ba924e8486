#include <algorithm>
#include <cmath>
#include <limits>

#include "lp_internal.hpp"

namespace cttl::lp::detail {

namespace {

struct Line {
  double slope, intercept;
};

struct Envelope {
  double base = 0.0;                 // value at mu = 0
  std::vector<double> slopes;       // descending
  std::vector<double> widths;
  bool ok = false;
};

// Lower envelope (pointwise min) of lines over [0, domain]. The result is
// concave, so active slopes are non-increasing; O(L^2) sweep is plenty at
// the block sizes we see (one line per coverage breakpoint).
Envelope lower_envelope(std::vector<Line> lines, double domain) {
  Envelope env;
  if (lines.empty() || !(domain > 0.0) || !std::isfinite(domain)) return env;

  auto value = [&](const Line& l, double x) { return l.slope * x + l.intercept; };
  auto argmin_at = [&](double x) {
    size_t best = 0;
    for (size_t j = 1; j < lines.size(); ++j) {
      const double vj = value(lines[j], x), vb = value(lines[best], x);
      if (vj < vb - 1e-15 ||
          (std::abs(vj - vb) <= 1e-15 && lines[j].slope < lines[best].slope))
        best = j;
    }
    return best;
  };

  double x = 0.0;
  size_t active = argmin_at(0.0);
  env.base = value(lines[active], 0.0);
  int guard = 0;
  while (x < domain) {
    if (++guard > static_cast<int>(lines.size()) + 4) return {};  // numerics
    double next_x = domain;
    for (size_t j = 0; j < lines.size(); ++j) {
      if (lines[j].slope >= lines[active].slope - 1e-15) continue;
      const double cross = (lines[j].intercept - lines[active].intercept) /
                           (lines[active].slope - lines[j].slope);
      if (cross > x + 1e-14 && cross < next_x) next_x = cross;
    }
    env.slopes.push_back(lines[active].slope);
    env.widths.push_back(next_x - x);
    x = next_x;
    if (x < domain) active = argmin_at(x * (1.0 + 1e-13) + 1e-300);
  }
  env.ok = true;
  return env;
}

double envelope_value(const HypographPresolve::Block& blk,
                      const std::vector<double>& widths, double mu) {
  double v = blk.base, rem = mu;
  for (size_t r = 0; r < blk.slopes.size(); ++r) {
    const double take = std::min(widths[r], std::max(0.0, rem));
    v += blk.slopes[r] * take;
    rem -= take;
  }
  return v;
}

}  // namespace

HypographPresolve presolve_hypographs(const LinearProgram& lp) {
  HypographPresolve out;
  const int n = lp.n_vars();
  const int m = lp.n_rows();

  std::vector<std::vector<int>> var_rows(static_cast<size_t>(n));
  for (int r = 0; r < m; ++r)
    for (const auto& t : lp.rows[static_cast<size_t>(r)].terms)
      var_rows[static_cast<size_t>(t.var)].push_back(r);

  // Candidate blocks: eta appears only in rows "a*eta + b*mu <= rhs" with
  // a > 0 and a single shared mu, has non-positive cost and is continuous.
  struct Candidate {
    int eta, mu;
    std::vector<int> rows;
    Envelope env;
  };
  std::vector<Candidate> cands;
  std::vector<int> mu_claimed(static_cast<size_t>(n), -1);

  for (int e = 0; e < n; ++e) {
    if (lp.is_integer[static_cast<size_t>(e)]) continue;
    if (lp.cost[static_cast<size_t>(e)] > 0.0) continue;
    const auto& rows = var_rows[static_cast<size_t>(e)];
    if (rows.empty()) continue;
    int mu = -1;
    bool ok = true;
    std::vector<Line> lines;
    for (int r : rows) {
      const auto& row = lp.rows[static_cast<size_t>(r)];
      if (row.sense != Sense::Le || row.terms.size() > 2) {
        ok = false;
        break;
      }
      double ce = 0.0, cm = 0.0;
      int other = -1;
      for (const auto& t : row.terms) {
        if (t.var == e)
          ce += t.coef;
        else {
          other = t.var;
          cm = t.coef;
        }
      }
      if (!(ce > 0.0)) {
        ok = false;
        break;
      }
      if (other >= 0) {
        if (mu < 0) mu = other;
        if (other != mu) {
          ok = false;
          break;
        }
      }
      lines.push_back({-cm / ce, row.rhs / ce});
    }
    if (!ok || mu < 0 || mu == e) continue;
    if (lp.is_integer[static_cast<size_t>(mu)]) continue;
    if (lp.lower[static_cast<size_t>(mu)] != 0.0) continue;
    const double dom = lp.upper[static_cast<size_t>(mu)];
    if (!(dom > 0.0) || !std::isfinite(dom)) continue;
    if (std::isfinite(lp.upper[static_cast<size_t>(e)]))
      lines.push_back({0.0, lp.upper[static_cast<size_t>(e)]});

    Envelope env = lower_envelope(std::move(lines), dom);
    if (!env.ok) continue;
    // The eta lower bound must stay slack across the whole domain
    // (concavity: check the endpoints).
    const double lo_e = lp.lower[static_cast<size_t>(e)];
    double end_val = env.base;
    for (size_t r = 0; r < env.slopes.size(); ++r)
      end_val += env.slopes[r] * env.widths[r];
    if (std::isfinite(lo_e) && lo_e > std::min(env.base, end_val) + 1e-12)
      continue;
    if (mu_claimed[static_cast<size_t>(mu)] >= 0) {
      // Two etas over the same mu: drop the earlier candidate too.
      const int prev = mu_claimed[static_cast<size_t>(mu)];
      cands.erase(std::remove_if(cands.begin(), cands.end(),
                                 [&](const Candidate& c) { return c.eta == prev; }),
                  cands.end());
      mu_claimed[static_cast<size_t>(mu)] = -2;
      continue;
    }
    if (mu_claimed[static_cast<size_t>(mu)] == -2) continue;
    mu_claimed[static_cast<size_t>(mu)] = e;
    cands.push_back({e, mu, rows, std::move(env)});
  }
  // A mu that is itself an eta candidate invalidates both blocks.
  cands.erase(std::remove_if(cands.begin(), cands.end(),
                             [&](const Candidate& c) {
                               return mu_claimed[static_cast<size_t>(c.mu)] !=
                                          c.eta ||
                                      mu_claimed[static_cast<size_t>(c.eta)] >= 0;
                             }),
              cands.end());

  if (cands.empty()) {
    out.applied = false;
    return out;
  }

  std::vector<char> var_replaced(static_cast<size_t>(n), 0);
  std::vector<char> row_dropped(static_cast<size_t>(m), 0);
  for (const auto& c : cands) {
    var_replaced[static_cast<size_t>(c.eta)] = 1;
    var_replaced[static_cast<size_t>(c.mu)] = 1;
    for (int r : c.rows) row_dropped[static_cast<size_t>(r)] = 1;
  }

  LinearProgram red;
  red.objective_offset = lp.objective_offset;
  out.var_map.assign(static_cast<size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    if (var_replaced[static_cast<size_t>(v)]) continue;
    out.var_map[static_cast<size_t>(v)] = red.add_variable(
        lp.lower[static_cast<size_t>(v)], lp.upper[static_cast<size_t>(v)],
        lp.cost[static_cast<size_t>(v)], lp.var_names[static_cast<size_t>(v)],
        lp.is_integer[static_cast<size_t>(v)] != 0);
  }

  // Segment variables per block; cost folds in both the mu cost and the
  // eta cost scaled by the segment slope.
  std::vector<std::vector<int>> mu_deltas(static_cast<size_t>(n));
  for (const auto& c : cands) {
    HypographPresolve::Block blk;
    blk.eta = c.eta;
    blk.mu = c.mu;
    blk.base = c.env.base;
    blk.slopes = c.env.slopes;
    red.objective_offset += lp.cost[static_cast<size_t>(c.eta)] * c.env.base;
    for (size_t r = 0; r < c.env.slopes.size(); ++r) {
      const double cost = lp.cost[static_cast<size_t>(c.mu)] +
                          lp.cost[static_cast<size_t>(c.eta)] * c.env.slopes[r];
      const int dv = red.add_variable(
          0.0, c.env.widths[r], cost,
          lp.var_names[static_cast<size_t>(c.mu)] + "~s" + std::to_string(r));
      blk.delta.push_back(dv);
      mu_deltas[static_cast<size_t>(c.mu)].push_back(dv);
    }
    out.blocks.push_back(std::move(blk));
  }

  out.row_map.assign(static_cast<size_t>(m), -1);
  for (int r = 0; r < m; ++r) {
    if (row_dropped[static_cast<size_t>(r)]) continue;
    const auto& row = lp.rows[static_cast<size_t>(r)];
    std::vector<LinearProgram::Term> terms;
    for (const auto& t : row.terms) {
      const int mapped = out.var_map[static_cast<size_t>(t.var)];
      if (mapped >= 0) {
        terms.push_back({mapped, t.coef});
      } else {
        for (int dv : mu_deltas[static_cast<size_t>(t.var)])
          terms.push_back({dv, t.coef});
      }
    }
    out.row_map[static_cast<size_t>(r)] =
        red.add_row(std::move(terms), row.sense, row.rhs, row.name);
  }

  out.reduced = std::move(red);
  out.applied = true;
  return out;
}

std::vector<double> HypographPresolve::recover_x(
    const std::vector<double>& reduced_x, const LinearProgram& original) const {
  std::vector<double> x(static_cast<size_t>(original.n_vars()), 0.0);
  for (int v = 0; v < original.n_vars(); ++v) {
    const int mapped = var_map[static_cast<size_t>(v)];
    if (mapped >= 0) x[static_cast<size_t>(v)] = reduced_x[static_cast<size_t>(mapped)];
  }
  for (const Block& blk : blocks) {
    double mu = 0.0;
    std::vector<double> widths;
    widths.reserve(blk.delta.size());
    for (int dv : blk.delta) {
      mu += reduced_x[static_cast<size_t>(dv)];
      widths.push_back(reduced.upper[static_cast<size_t>(dv)]);
    }
    mu = std::min(mu, original.upper[static_cast<size_t>(blk.mu)]);
    x[static_cast<size_t>(blk.mu)] = mu;
    x[static_cast<size_t>(blk.eta)] = envelope_value(blk, widths, mu);
  }
  return x;
}

}  // namespace cttl::lp::detail
