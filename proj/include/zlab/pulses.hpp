#pragma once

// Generating functions: power pulses (t - L)^delta and additive pulses
// sum_l (t - L)^delta_l on [L, L + U], with class membership checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "zlab/error.hpp"

namespace zlab {

struct PulseLimits {
  /// T_0: pulses must start above this height.
  double height_floor = 1e3;
  /// a: widths are capped by U <= a < 1.
  double width_cap = 0.99;

  void validate() const {
    if (!(width_cap > 0.0 && width_cap < 1.0))
      throw Error(ErrorCode::invalid_argument, "width cap a must lie in (0, 1)");
    if (!(height_floor > 1.0)) throw Error(ErrorCode::invalid_argument, "height floor T0 must exceed 1");
  }
};

namespace detail {

inline void check_exponent(double delta) {
  if (!std::isfinite(delta)) throw Error(ErrorCode::non_finite, "exponent not finite");
  if (delta == 0.0) throw Error(ErrorCode::delta_trivial, "exponent 0 gives the trivial constant pulse");
  if (delta < 0.0)
    throw Error(ErrorCode::delta_excluded,
                "exponent " + std::to_string(delta) + " excluded: pulses need delta > 0 (delta in (-1, 0) is unbounded at L)");
}

inline void check_support(double L, double U, const PulseLimits& limits) {
  limits.validate();
  if (!std::isfinite(L) || !std::isfinite(U)) throw Error(ErrorCode::non_finite, "pulse support not finite");
  if (!(U > 0.0) || U > limits.width_cap)
    throw Error(ErrorCode::width_out_of_range,
                "width U = " + std::to_string(U) + " outside (0, " + std::to_string(limits.width_cap) + "]");
  if (!(L > limits.height_floor))
    throw Error(ErrorCode::height_below_floor,
                "left endpoint L = " + std::to_string(L) + " must exceed T0 = " + std::to_string(limits.height_floor));
}

inline void check_in_support(double L, double U, double t) {
  if (!(t >= L && t <= L + U))
    throw Error(ErrorCode::out_of_range, "t = " + std::to_string(t) + " outside pulse support [" + std::to_string(L) +
                                             ", " + std::to_string(L + U) + "]");
}

}  // namespace detail

class PowerPulse {
 public:
  PowerPulse(double L, double U, double delta, const PulseLimits& limits = {}) : L_(L), U_(U), delta_(delta), a_(limits.width_cap) {
    detail::check_exponent(delta);
    detail::check_support(L, U, limits);
  }

  double L() const { return L_; }
  double U() const { return U_; }
  double delta() const { return delta_; }
  double width_cap() const { return a_; }

  /// (t - L)^delta with no support check; callers on the hot path have
  /// already placed t inside [L, L + U].
  double unchecked(double t) const { return std::pow(std::max(t - L_, 0.0), delta_); }

 private:
  double L_;
  double U_;
  double delta_;
  double a_;
};

class AdditivePulse {
 public:
  AdditivePulse(double L, double U, std::vector<double> deltas, const PulseLimits& limits = {})
      : L_(L), U_(U), deltas_(std::move(deltas)), a_(limits.width_cap) {
    if (deltas_.empty()) throw Error(ErrorCode::invalid_argument, "additive pulse needs at least one exponent");
    for (double d : deltas_) detail::check_exponent(d);
    if (!std::is_sorted(deltas_.begin(), deltas_.end(), std::greater<>()))
      throw Error(ErrorCode::invalid_argument, "additive pulse exponents must be nonincreasing");
    detail::check_support(L, U, limits);
  }

  double L() const { return L_; }
  double U() const { return U_; }
  const std::vector<double>& deltas() const { return deltas_; }
  std::size_t size() const { return deltas_.size(); }
  double width_cap() const { return a_; }

  double unchecked(double t) const {
    const double x = std::max(t - L_, 0.0);
    double sum = 0.0;
    for (double d : deltas_) sum += std::pow(x, d);
    return sum;
  }

 private:
  double L_;
  double U_;
  std::vector<double> deltas_;
  double a_;
};

inline double eval_power(const PowerPulse& p, double t) {
  detail::check_in_support(p.L(), p.U(), t);
  return p.unchecked(t);
}

inline double eval_additive(const AdditivePulse& p, double t) {
  detail::check_in_support(p.L(), p.U(), t);
  return p.unchecked(t);
}

/// (1/U) int_L^{L+U} (t - L)^delta dt = U^delta / (delta + 1).
inline double exact_mean_power(const PowerPulse& p) { return std::pow(p.U(), p.delta()) / (p.delta() + 1.0); }

inline double exact_mean_additive(const AdditivePulse& p) {
  double sum = 0.0;
  for (double d : p.deltas()) sum += std::pow(p.U(), d) / (d + 1.0);
  return sum;
}

/// A split delta = delta_1 + ... + delta_n with delta > delta_1 >= ... >= delta_n > 0.
class PartitionSpec {
 public:
  PartitionSpec(double delta, std::vector<double> parts) : delta_(delta), parts_(std::move(parts)) {
    if (parts_.size() < 2)
      throw Error(ErrorCode::partition_invalid, "a partition needs n >= 2 parts so that delta > delta_1");
    for (double d : parts_) {
      if (!std::isfinite(d) || !(d > 0.0))
        throw Error(ErrorCode::partition_invalid, "partition parts must be positive");
    }
    if (!std::is_sorted(parts_.begin(), parts_.end(), std::greater<>()))
      throw Error(ErrorCode::partition_invalid, "partition parts must be nonincreasing");
    const double sum = std::accumulate(parts_.begin(), parts_.end(), 0.0);
    if (std::abs(sum - delta_) > 1e-12)
      throw Error(ErrorCode::partition_invalid,
                  "parts sum to " + std::to_string(sum) + ", not delta = " + std::to_string(delta_));
    if (!(delta_ > parts_.front())) throw Error(ErrorCode::partition_invalid, "delta must exceed delta_1");
  }

  /// Partition whose total is the sum of the given parts.
  static PartitionSpec of(std::vector<double> parts) {
    const double sum = std::accumulate(parts.begin(), parts.end(), 0.0);
    return PartitionSpec(sum, std::move(parts));
  }

  double delta() const { return delta_; }
  const std::vector<double>& parts() const { return parts_; }
  std::size_t n() const { return parts_.size(); }

 private:
  double delta_;
  std::vector<double> parts_;
};

struct MembershipVerdict {
  bool continuous = true;
  bool nonnegative = true;
  bool positive_somewhere = false;
  bool height_ok = true;
  bool width_ok = true;
  double width_limit = 0.0;
  std::vector<std::string> failed;

  bool member() const { return failed.empty(); }
};

/// Sampled check of the C~0[T, T+U] clauses: continuity, f >= 0, some
/// f(t0) > 0, T > T0 and U <= U0 with U0 = min(a, T / ln^2 T).
///
/// Continuity is heuristic: the largest jump between neighbouring samples is
/// bisected 48 times. A continuous function's jump shrinks there; a jump
/// that keeps more than half its size is reported as a discontinuity.
inline MembershipVerdict c0_membership(const std::function<double(double)>& f, double T, double U, int grid = 64,
                                       const PulseLimits& limits = {}) {
  if (grid < 16) throw Error(ErrorCode::invalid_argument, "c0_membership needs grid >= 16");
  MembershipVerdict v;
  v.width_limit = std::min(limits.width_cap, T / (std::log(T) * std::log(T)));
  if (!(T > limits.height_floor)) {
    v.height_ok = false;
    v.failed.push_back("T must exceed T0");
  }
  if (!(U > 0.0) || U > v.width_limit) {
    v.width_ok = false;
    v.failed.push_back("U must lie in (0, U0]");
  }
  if (!(U > 0.0)) return v;

  std::vector<double> xs(static_cast<std::size_t>(grid) + 1);
  std::vector<double> ys(xs.size());
  for (int i = 0; i <= grid; ++i) {
    xs[i] = i == grid ? T + U : T + U * i / grid;
    ys[i] = f(xs[i]);
    if (!std::isfinite(ys[i])) v.continuous = false;
    if (ys[i] < 0.0) v.nonnegative = false;
    if (ys[i] > 0.0) v.positive_somewhere = true;
  }

  if (v.continuous) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
      if (std::abs(ys[i + 1] - ys[i]) > std::abs(ys[worst + 1] - ys[worst])) worst = i;
    double a = xs[worst], b = xs[worst + 1];
    double fa = ys[worst], fb = ys[worst + 1];
    const double initial = std::abs(fb - fa);
    for (int it = 0; it < 48 && b - a > 0.0; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = f(m);
      if (!std::isfinite(fm)) {
        v.continuous = false;
        break;
      }
      if (std::abs(fm - fa) >= std::abs(fb - fm)) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    if (initial > 0.0 && std::abs(fb - fa) > 0.5 * initial) v.continuous = false;
  }

  if (!v.continuous) v.failed.push_back("f must be continuous");
  if (!v.nonnegative) v.failed.push_back("f must be nonnegative");
  if (!v.positive_somewhere) v.failed.push_back("f must be positive somewhere");
  return v;
}

}  // namespace zlab
