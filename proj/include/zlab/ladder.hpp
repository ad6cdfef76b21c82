#pragma once

// A computable Jacob's ladder surrogate.
//
// phi1(T) is the unique x with M(x) = J(T) - s * T / ln T, where
//   M(x) = x ln x + (2 gamma - 1 - ln 2 pi) x
// is the main term of the critical-line mean value of |zeta|^2 and J is the
// accumulated integral held by an IntegralCache. Because J' = Z^2, the
// derivative of phi1 has a closed form and every change of variables through
// the ladder can be checked exactly.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "zlab/error.hpp"
#include "zlab/quad.hpp"
#include "zlab/roots.hpp"
#include "zlab/special.hpp"

namespace zlab {

/// 2 gamma - 1 - ln 2 pi.
inline const double kMeanValueLinear = 2.0 * kEulerGamma - 1.0 - std::log(kTwoPi);

inline double mean_value_main_term(double x) { return x * std::log(x) + kMeanValueLinear * x; }

inline double mean_value_main_term_derivative(double x) { return std::log(x) + 1.0 + kMeanValueLinear; }

/// Where M is minimal; M is strictly increasing to the right of it.
inline const double kMeanValueArgMin = std::exp(-1.0 - kMeanValueLinear);

struct LadderModel {
  std::shared_ptr<const IntegralCache> cache;
  /// Depression term s >= 0.
  double shift = 0.0;
  double domain_min = 10.0;

  LadderModel() = default;
  LadderModel(std::shared_ptr<const IntegralCache> c, double s = 0.0, double dmin = 10.0)
      : cache(std::move(c)), shift(s), domain_min(dmin) {
    if (!cache) throw Error(ErrorCode::invalid_argument, "ladder needs a cache");
    if (!(shift >= 0.0) || !std::isfinite(shift)) throw Error(ErrorCode::invalid_argument, "ladder shift must be >= 0");
    if (!(domain_min > 1.0)) throw Error(ErrorCode::invalid_argument, "ladder domain_min must exceed 1");
    if (cache->values.empty() || cache->top() <= domain_min)
      throw Error(ErrorCode::invalid_argument, "cache does not reach above domain_min");
  }
  explicit LadderModel(IntegralCache c, double s = 0.0, double dmin = 10.0)
      : LadderModel(std::make_shared<const IntegralCache>(std::move(c)), s, dmin) {}

  double domain_max() const { return cache->top(); }
  LadderModel with_shift(double s) const {
    LadderModel m = *this;
    if (!(s >= 0.0)) throw Error(ErrorCode::invalid_argument, "ladder shift must be >= 0");
    m.shift = s;
    return m;
  }

  /// J(T) - s T / ln T, the quantity matched against M(phi1(T)).
  double target(double T) const {
    const double j = j_at(*cache, T);
    return shift == 0.0 ? j : j - shift * T / std::log(T);
  }
};

namespace detail {

inline void check_domain(const LadderModel& model, double T, const char* what) {
  if (!std::isfinite(T)) throw Error(ErrorCode::non_finite, std::string(what) + ": height not finite");
  if (T < model.domain_min || T > model.domain_max())
    throw Error(ErrorCode::out_of_range, std::string(what) + ": T = " + std::to_string(T) + " outside ladder domain [" +
                                             std::to_string(model.domain_min) + ", " +
                                             std::to_string(model.domain_max()) + "]");
}

/// Solves M(x) = value for x on the increasing branch.
inline double invert_main_term(double value, double guess) {
  const double lo = kMeanValueArgMin;
  if (!(value > mean_value_main_term(lo)))
    throw Error(ErrorCode::bracket_failure, "M(x) = " + std::to_string(value) + " has no root right of " +
                                                std::to_string(lo));
  double hi = std::max(2.0 * guess, 16.0);
  while (mean_value_main_term(hi) < value) {
    hi *= 2.0;
    if (!std::isfinite(hi))
      throw Error(ErrorCode::bracket_failure, "no upper bracket for M(x) = " + std::to_string(value));
  }
  auto f = [&](double x) { return mean_value_main_term(x) - value; };
  return roots::newton_bracketed(f, mean_value_main_term_derivative, lo, hi, guess);
}

}  // namespace detail

/// phi1(T): the ladder forward map.
inline double phi1(const LadderModel& model, double T) {
  detail::check_domain(model, T, "phi1");
  return detail::invert_main_term(model.target(T), T);
}

/// phi1'(t) = (Z^2(t) - s (ln t - 1) / ln^2 t) / (ln phi1(t) + 2 gamma - ln 2 pi).
inline double ladder_weight(const LadderModel& model, double t, double phi_of_t) {
  double numerator = zeta_half_sq(t, model.cache->build_policy);
  if (model.shift != 0.0) {
    const double lt = std::log(t);
    numerator -= model.shift * (lt - 1.0) / (lt * lt);
  }
  return numerator / mean_value_main_term_derivative(phi_of_t);
}

inline double ladder_weight(const LadderModel& model, double t) {
  return ladder_weight(model, t, phi1(model, t));
}

/// Smallest T with phi1(T) = y.
inline double phi1_inverse(const LadderModel& model, double y) {
  if (!std::isfinite(y)) throw Error(ErrorCode::non_finite, "phi1_inverse: value not finite");
  const double lo_img = phi1(model, model.domain_min);
  const double hi_img = phi1(model, model.domain_max());
  if (y < lo_img || y > hi_img)
    throw Error(ErrorCode::out_of_range, "phi1_inverse: y = " + std::to_string(y) + " outside image [" +
                                             std::to_string(lo_img) + ", " + std::to_string(hi_img) + "]");
  const double wanted = mean_value_main_term(y);
  auto g = [&](double T) { return model.target(T) - wanted; };
  if (y == lo_img) return model.domain_min;

  // phi1(T) stays within a few tens of T on desk ranges; widen if needed.
  double radius = 64.0;
  double lo = std::max(model.domain_min, y - radius);
  double hi = std::min(model.domain_max(), y + radius);
  double g_lo = g(lo);
  double g_hi = g(hi);
  while (g_lo >= 0.0 && lo > model.domain_min) {
    radius *= 2.0;
    hi = lo;
    g_hi = g_lo;
    lo = std::max(model.domain_min, y - radius);
    g_lo = g(lo);
  }
  while (g_hi < 0.0 && hi < model.domain_max()) {
    radius *= 2.0;
    lo = hi;
    g_lo = g_hi;
    hi = std::min(model.domain_max(), y + radius);
    g_hi = g(hi);
  }
  if (g_lo >= 0.0) return lo;
  if (g_hi < 0.0)
    throw Error(ErrorCode::bracket_failure, "phi1_inverse: no bracket in [" + std::to_string(lo) + ", " +
                                                std::to_string(hi) + "]");
  return roots::leftmost_crossing(g, lo, hi, g_lo, g_hi);
}

struct ComposeResult {
  double value = 0.0;
  double weight_product = 1.0;
};

/// phi1 applied k times, with the product of ladder weights along the orbit.
inline ComposeResult compose_k(const LadderModel& model, double t, int k) {
  if (k < 0) throw Error(ErrorCode::invalid_argument, "compose_k: k must be >= 0");
  ComposeResult r{t, 1.0};
  for (int j = 0; j < k; ++j) {
    if (r.value < model.domain_min || r.value > model.domain_max())
      throw Error(ErrorCode::tower_escape, "compose_k: iterate " + std::to_string(j) + " = " +
                                               std::to_string(r.value) + " left the ladder domain");
    const double next = phi1(model, r.value);
    r.weight_product *= ladder_weight(model, r.value, next);
    r.value = next;
  }
  return r;
}

struct TowerLevel {
  double lo = 0.0;
  double width = 0.0;
  double hi() const { return lo + width; }
};

/// Level 0 is [L, L + U]; level r is the phi1-preimage of level r - 1.
struct IntervalTower {
  double L = 0.0;
  double U = 0.0;
  std::vector<TowerLevel> levels;

  int depth() const { return static_cast<int>(levels.size()) - 1; }
  const TowerLevel& level(int r) const { return levels.at(static_cast<std::size_t>(r)); }

  /// True when every level sits at or above the one it maps onto.
  bool ascending() const {
    for (std::size_t r = 1; r < levels.size(); ++r)
      if (levels[r].lo < levels[r - 1].lo) return false;
    return true;
  }
};

inline IntervalTower reverse_iterates(const LadderModel& model, double L, double U, int k) {
  if (k < 0) throw Error(ErrorCode::invalid_argument, "reverse_iterates: k must be >= 0");
  if (!(U > 0.0)) throw Error(ErrorCode::invalid_argument, "reverse_iterates: U must be positive");
  IntervalTower tower{L, U, {{L, U}}};
  for (int r = 1; r <= k; ++r) {
    const auto& prev = tower.levels.back();
    double lo = 0.0;
    double hi = 0.0;
    try {
      lo = phi1_inverse(model, prev.lo);
      hi = phi1_inverse(model, prev.hi());
    } catch (const Error& e) {
      throw Error(ErrorCode::tower_escape, "tower level " + std::to_string(r) + " escapes the cache: " + e.what());
    }
    if (!(hi > lo))
      throw Error(ErrorCode::tower_escape, "tower level " + std::to_string(r) + " collapsed to zero width");
    tower.levels.push_back({lo, hi - lo});
  }
  return tower;
}

/// Smallest shift s for which phi1(T) < T on the grid over [lo, hi], i.e.
/// s > (J(T) - M(T)) ln T / T at every grid point. Returns 0 when the
/// unshifted ladder already descends there.
inline double calibrate_shift(const LadderModel& model, double lo, double hi, int grid = 200, double margin = 1e-6) {
  detail::check_domain(model, lo, "calibrate_shift");
  detail::check_domain(model, hi, "calibrate_shift");
  double s = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double T = lo + (hi - lo) * i / grid;
    const double excess = j_at(*model.cache, T) - mean_value_main_term(T);
    s = std::max(s, excess * std::log(T) / T);
  }
  return s > 0.0 ? s + margin : 0.0;
}

}  // namespace zlab
