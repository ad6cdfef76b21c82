#pragma once

// Bracketed scalar root finding used by the ladder and the exchange-point
// solvers.

#include <cmath>
#include <limits>
#include <string>

#include "zlab/error.hpp"

namespace zlab::roots {

/// Finds the leftmost x in [lo, hi] with g(x) >= 0 for nondecreasing g,
/// given g(lo) < 0 <= g(hi). Each step takes a secant (false position)
/// candidate when it lands well inside the bracket and bisects otherwise,
/// so the bracket shrinks at least geometrically. Stops when the bracket is
/// narrower than rel_tol * |hi| (or a few ulps).
template <class G>
double leftmost_crossing(G&& g, double lo, double hi, double g_lo, double g_hi, double rel_tol = 1e-15) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  bool last_was_secant = false;
  for (int iter = 0; iter < 400; ++iter) {
    const double width = hi - lo;
    if (width <= std::max(rel_tol, 4.0 * eps) * std::max(std::abs(hi), std::abs(lo))) break;
    double x = 0.5 * (lo + hi);
    if (!last_was_secant && g_hi > g_lo) {
      const double secant = lo - g_lo * width / (g_hi - g_lo);
      if (secant > lo + 0.05 * width && secant < hi - 0.05 * width) x = secant;
    }
    last_was_secant = x != 0.5 * (lo + hi);
    if (x <= lo || x >= hi) break;
    const double gx = g(x);
    if (gx < 0.0) {
      lo = x;
      g_lo = gx;
    } else {
      hi = x;
      g_hi = gx;
    }
  }
  return hi;
}

/// Newton iteration on a strictly increasing f, safeguarded by the bracket
/// [lo, hi] with f(lo) <= 0 <= f(hi).
template <class F, class DF>
double newton_bracketed(F&& f, DF&& df, double lo, double hi, double guess) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    const double d = df(x);
    double next = d > 0.0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * eps * std::abs(x)) return next;
    if (hi - lo <= 2.0 * eps * std::abs(hi)) return next;
    x = next;
  }
  return x;
}

}  // namespace zlab::roots
