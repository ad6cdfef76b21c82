#pragma once

// Hardy's Z function on the critical line.
//
// Below EvalPolicy::method_switch_height, zeta(1/2 + it) is summed with
// Euler-Maclaurin and rotated by the exact Riemann-Siegel phase. Above it the
// Riemann-Siegel formula is used with correction terms C_0..C_K.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "zlab/detail/rs_coefficients.hpp"
#include "zlab/error.hpp"

namespace zlab {

inline constexpr double kEulerGamma = std::numbers::egamma;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct EvalPolicy {
  /// Heights below this use the Euler-Maclaurin route, above it Riemann-Siegel.
  double method_switch_height = 200.0;
  /// Highest Riemann-Siegel correction index K (terms C_0..C_K are summed).
  int rs_correction_terms = 3;
  double target_rel_error = 1e-6;

  void validate() const {
    if (!(method_switch_height > 0.0) || !std::isfinite(method_switch_height))
      throw Error(ErrorCode::invalid_argument, "method_switch_height must be positive");
    if (rs_correction_terms < 0 || rs_correction_terms > 4)
      throw Error(ErrorCode::invalid_argument, "rs_correction_terms must lie in [0, 4]");
    if (!(target_rel_error > 0.0))
      throw Error(ErrorCode::invalid_argument, "target_rel_error must be positive");
  }

  /// Canonical text form; feeds the cache policy digest.
  std::string canonical() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "switch=%.17g;rs=%d;rel=%.17g", method_switch_height,
                  rs_correction_terms, target_rel_error);
    return buf;
  }

  friend bool operator==(const EvalPolicy&, const EvalPolicy&) = default;
};

namespace detail {

inline void check_height(double t) {
  if (!std::isfinite(t)) throw Error(ErrorCode::non_finite, "height is not finite");
  if (t < 0.0) throw Error(ErrorCode::negative_height, "height must be >= 0, got " + std::to_string(t));
}

// B_2 .. B_30
inline constexpr std::array<double, 15> kBernoulliEven = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

/// Im log Gamma(1/4 + it/2) - (t/2) log pi, valid for every t >= 0.
inline double theta_exact(double t) {
  using cd = std::complex<double>;
  const cd z(0.25, 0.5 * t);
  // Shift to |w| >= 12 so Stirling's series converges to machine precision.
  double shift_phase = 0.0;
  cd w = z;
  while (std::abs(w) < 12.0) {
    shift_phase += std::arg(w);
    w += 1.0;
  }
  cd lg = (w - 0.5) * std::log(w) - w + 0.5 * std::log(kTwoPi);
  cd wpow = w;
  const cd w2 = w * w;
  for (int n = 1; n <= 10; ++n) {
    lg += kBernoulliEven[n - 1] / (2.0 * n * (2.0 * n - 1.0) * wpow);
    wpow *= w2;
  }
  return lg.imag() - shift_phase - 0.5 * t * std::log(std::numbers::pi);
}

inline double theta_asymptotic(double t) {
  double value = 0.5 * t * std::log(t / kTwoPi) - 0.5 * t - std::numbers::pi / 8.0;
  const double inv = 1.0 / t;
  const double inv2 = inv * inv;
  double tpow = inv;
  for (int n = 1; n <= 8; ++n) {
    const double b = std::abs(kBernoulliEven[n - 1]);
    value += (1.0 - std::ldexp(1.0, 1 - 2 * n)) * b / (4.0 * n * (2.0 * n - 1.0)) * tpow;
    tpow *= inv2;
  }
  return value;
}

/// zeta(1/2 + it) by Euler-Maclaurin summation. Intended for moderate t.
inline std::complex<double> zeta_half_euler_maclaurin(double t) {
  using cd = std::complex<double>;
  const cd s(0.5, t);
  const int n_terms = 15 + static_cast<int>(std::ceil(0.5 * t));
  cd sum = 0.0;
  for (int n = 1; n < n_terms; ++n) {
    const double ln_n = std::log(static_cast<double>(n));
    sum += std::polar(1.0 / std::sqrt(static_cast<double>(n)), -t * ln_n);
  }
  const double big_n = n_terms;
  const double ln_big = std::log(big_n);
  const cd n_pow = std::polar(1.0 / std::sqrt(big_n), -t * ln_big);  // N^{-s}
  sum += n_pow * big_n / (s - 1.0) + 0.5 * n_pow;

  // sum_k B_2k / (2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
  cd rising = s;
  cd n_factor = n_pow / big_n;
  double fact = 2.0;
  for (int k = 1; k <= 15; ++k) {
    const cd term = kBernoulliEven[k - 1] / fact * rising * n_factor;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    rising *= (s + (2.0 * k - 1.0)) * (s + 2.0 * k);
    n_factor /= big_n * big_n;
    fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
  }
  return sum;
}

struct RsTables {
  static constexpr int kSize = 1024;
  std::array<double, kSize> log_n{};
  std::array<double, kSize> inv_sqrt_n{};

  RsTables() {
    for (int n = 1; n < kSize; ++n) {
      log_n[n] = std::log(static_cast<double>(n));
      inv_sqrt_n[n] = 1.0 / std::sqrt(static_cast<double>(n));
    }
  }

  static const RsTables& get() {
    static const RsTables tables;
    return tables;
  }
};

inline double eval_series(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline double hardy_z_riemann_siegel(double t, int correction_terms) {
  const double tau = std::sqrt(t / kTwoPi);
  const auto n_main = static_cast<long>(std::floor(tau));
  const double theta = theta_asymptotic(t);
  const auto& tab = RsTables::get();

  double main = 0.0;
  for (long n = 1; n <= n_main; ++n) {
    if (n < RsTables::kSize) {
      main += tab.inv_sqrt_n[n] * std::cos(theta - t * tab.log_n[n]);
    } else {
      const double dn = static_cast<double>(n);
      main += std::cos(theta - t * std::log(dn)) / std::sqrt(dn);
    }
  }
  main *= 2.0;

  const double x = tau - static_cast<double>(n_main) - 0.5;
  double remainder = 0.0;
  double tau_pow = 1.0;
  for (int k = 0; k <= correction_terms; ++k) {
    remainder += eval_series(kRsCorrection[k], x) * tau_pow;
    tau_pow /= tau;
  }
  remainder /= std::sqrt(tau);
  if (n_main % 2 == 0) remainder = -remainder;
  return main + remainder;
}

}  // namespace detail

/// Riemann-Siegel phase theta(t). Uses the asymptotic expansion for t >= 10
/// and the log-gamma form below that.
inline double riemann_siegel_theta(double t) {
  if (!std::isfinite(t)) throw Error(ErrorCode::non_finite, "theta: height is not finite");
  if (!(t > 0.0)) throw Error(ErrorCode::out_of_range, "theta: requires t > 0");
  return t >= 10.0 ? detail::theta_asymptotic(t) : detail::theta_exact(t);
}

/// Hardy's Z(t), real with |Z(t)| = |zeta(1/2 + it)|.
inline double hardy_z(double t, const EvalPolicy& policy = {}) {
  detail::check_height(t);
  if (t < policy.method_switch_height) {
    const auto zeta = detail::zeta_half_euler_maclaurin(t);
    const double theta = detail::theta_exact(t);
    return (std::polar(1.0, theta) * zeta).real();
  }
  return detail::hardy_z_riemann_siegel(t, policy.rs_correction_terms);
}

/// |zeta(1/2 + it)|^2, computed as the square of hardy_z.
inline double zeta_half_sq(double t, const EvalPolicy& policy = {}) {
  const double z = hardy_z(t, policy);
  return z * z;
}

struct CriticalPoint {
  double t = 0.0;
  double z = 0.0;
  double zeta_sq = 0.0;

  static CriticalPoint at(double t, const EvalPolicy& policy = {}) {
    const double z = hardy_z(t, policy);
    return {t, z, z * z};
  }
};

}  // namespace zlab
