#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cttl::detail {

/// Adaptive Gauss-Kronrod 15(7) integration on a finite interval.
/// Splits the worst interval until the summed error estimate drops below
/// `abs_tol`. Intended for smooth, bounded integrands (survival functions);
/// throws if the tolerance is unreachable within the subdivision budget.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol,
                          std::size_t max_intervals = 4096) {
  // QUADPACK dqk15 nodes and weights (positive half).
  static constexpr double xgk[8] = {
      0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
      0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
      0.2077849550078985, 0.0};
  static constexpr double wgk[8] = {
      0.02293532201052922, 0.06309209262997855, 0.10479001032225018,
      0.14065325971552592, 0.1690047266392679,  0.19035057806478542,
      0.20443294007529889, 0.20948214108472782};
  static constexpr double wg[4] = {0.12948496616886969, 0.2797053914892767,
                                   0.3818300505051189, 0.41795918367346935};

  struct Piece {
    double a, b, value, error;
  };

  auto rule = [&](double lo, double hi) -> Piece {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
      if (i == 7) {
        const double fc = f(c);
        kron += wgk[i] * fc;
        gauss += wg[3] * fc;
      } else {
        const double f1 = f(c - h * xgk[i]);
        const double f2 = f(c + h * xgk[i]);
        kron += wgk[i] * (f1 + f2);
        if (i % 2 == 1) gauss += wg[i / 2] * (f1 + f2);
      }
    }
    return {lo, hi, kron * h, std::abs((kron - gauss) * h)};
  };

  if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: a > b");
  if (a == b) return 0.0;

  std::vector<Piece> pieces{rule(a, b)};
  while (true) {
    double total_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      total_err += pieces[i].error;
      if (pieces[i].error > pieces[worst].error) worst = i;
    }
    if (total_err <= abs_tol) break;
    if (pieces.size() >= max_intervals)
      throw std::runtime_error("integrate_adaptive: tolerance unreachable");
    const Piece p = pieces[worst];
    const double mid = 0.5 * (p.a + p.b);
    pieces[worst] = rule(p.a, mid);
    pieces.push_back(rule(mid, p.b));
  }

  double sum = 0.0;
  for (const Piece& p : pieces) sum += p.value;
  return sum;
}

}  // namespace cttl::detail
