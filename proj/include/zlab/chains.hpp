#pragma once

// Exchange-point chains (alpha_0..alpha_k, beta_1..beta_k) and the base
// factorization checks built on them.
//
// For a pulse f on [L, L + U] and depth k, the tower level k is mapped onto
// [L, L + U] by phi1^k. With a weight W on level k,
//   N = int_{level k} f(phi1^k(t)) W(t) dt,   D = int_{level k} W(t) dt,
// the exchange points are mean-value roots d, e of
//   f(phi1^k(d)) W(d) = N / U_k,   W(e) = D / U_k,
// and the chains are their ladder orbits: alpha_r = phi1^{k-r}(d),
// beta_r = phi1^{k-r}(e).
//
// Weight modes:
//   exact  W = prod_j phi1'(phi1^j(t)), the Jacobian of phi1^k, so N/D is
//          the mean of f and the identity holds up to quadrature error;
//   paper  W = prod_j Z^2(phi1^j(t)) / ln phi1^j(t), the normalized |zeta|^2
//          whose ratios appear in the asymptotic formula.

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "zlab/error.hpp"
#include "zlab/ladder.hpp"
#include "zlab/pulses.hpp"
#include "zlab/quad.hpp"

namespace zlab {

enum class WeightMode { exact, paper };

inline std::string to_string(WeightMode mode) { return mode == WeightMode::exact ? "exact" : "paper"; }

inline WeightMode parse_mode(std::string_view text) {
  if (text == "exact") return WeightMode::exact;
  if (text == "paper") return WeightMode::paper;
  throw Error(ErrorCode::invalid_argument, "unknown weight mode '" + std::string(text) + "'");
}

struct ChainConfig {
  /// k_0: the largest allowed chain depth.
  int max_depth = 3;
  int scan_points = 4096;
  int max_scan_points = 1 << 20;
  QuadratureSpec quad{1e-14, 1e-9, 200, 1e-15};
  /// C in the acceptance band residual <= C ln ln L / ln L.
  double band_multiplier = 10.0;
};

using Pulse = std::variant<PowerPulse, AdditivePulse>;

inline double pulse_L(const Pulse& p) { return std::visit([](const auto& q) { return q.L(); }, p); }
inline double pulse_U(const Pulse& p) { return std::visit([](const auto& q) { return q.U(); }, p); }
inline double pulse_value(const Pulse& p, double t) { return std::visit([t](const auto& q) { return q.unchecked(t); }, p); }
inline double pulse_mean(const Pulse& p) {
  return std::visit(
      [](const auto& q) {
        if constexpr (std::is_same_v<std::decay_t<decltype(q)>, PowerPulse>)
          return exact_mean_power(q);
        else
          return exact_mean_additive(q);
      },
      p);
}
inline std::vector<double> pulse_deltas(const Pulse& p) {
  if (const auto* pp = std::get_if<PowerPulse>(&p)) return {pp->delta()};
  return std::get<AdditivePulse>(p).deltas();
}

/// ln ln L / ln L, the scale of the relative error in the asymptotic formulas.
inline double theoretical_band(double L) { return std::log(std::log(L)) / std::log(L); }

namespace detail {

/// Bisects [a, b] (h(a), h(b) of opposite sign) down to width tol.
template <class H>
double bisect_sign_change(H& h, double a, double b, double ha, double tol) {
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double hm = h(m);
    if (hm == 0.0) return m;
    if ((hm < 0.0) == (ha < 0.0)) {
      a = m;
      ha = hm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// First crossing of target on sampled points xs[0..n]; nullopt if none.
template <class G>
std::optional<double> first_crossing(G& g, const std::vector<double>& xs, const std::vector<double>& ys, double target,
                                     double tol) {
  auto h = [&](double x) { return g(x) - target; };
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double hi = ys[i] - target;
    if (hi == 0.0) return xs[i];
    const double hp = ys[i - 1] - target;
    if (hp != 0.0 && (hp < 0.0) != (hi < 0.0)) return bisect_sign_change(h, xs[i - 1], xs[i], hp, tol);
  }
  return std::nullopt;
}

inline std::vector<double> uniform_grid(double a, double b, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) xs[i] = i == n ? b : a + (b - a) * i / n;
  return xs;
}

}  // namespace detail

/// Smallest xi in (a, b) with g(xi) = target, to rel_tol * (b - a). Scans a
/// uniform grid (doubling it on failure) for the first sign change of
/// g - target and bisects it. A grid point where g hits the target exactly
/// is returned as is, so a constant g yields the first grid point after a.
template <class G>
double mean_value_point(G&& g, double a, double b, double target, int grid = 4096, int max_grid = 1 << 20,
                        double rel_tol = 1e-10) {
  if (!(a < b)) throw Error(ErrorCode::invalid_argument, "mean_value_point requires a < b");
  const double tol = rel_tol * (b - a);
  double gmin = 0.0, gmax = 0.0;
  for (int n = std::max(grid, 2); n <= max_grid; n *= 2) {
    const auto xs = detail::uniform_grid(a, b, n);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = g(xs[i]);
    if (auto x = detail::first_crossing(g, xs, ys, target, tol)) return *x;
    gmin = *std::min_element(ys.begin(), ys.end());
    gmax = *std::max_element(ys.begin(), ys.end());
  }
  throw Error(ErrorCode::bracket_failure, "no crossing of target " + std::to_string(target) + " on [" +
                                              std::to_string(a) + ", " + std::to_string(b) + "]; grid range [" +
                                              std::to_string(gmin) + ", " + std::to_string(gmax) + "]");
}

struct OrbitSample {
  double image = 0.0;   // phi1^k(t)
  double weight = 1.0;  // W(t) for the chosen mode
};

/// phi1^k(t) together with the level-k weight of the given mode.
inline OrbitSample orbit_sample(const LadderModel& model, double t, int k, WeightMode mode) {
  if (mode == WeightMode::exact) {
    const auto r = compose_k(model, t, k);
    return {r.value, r.weight_product};
  }
  OrbitSample s{t, 1.0};
  for (int j = 0; j < k; ++j) {
    s.weight *= zeta_half_sq(s.image, model.cache->build_policy) / std::log(s.image);
    s.image = phi1(model, s.image);
  }
  return s;
}

/// Everything about a level-k tower that does not depend on the pulse: the
/// sampled weight, its integral D and the beta root e. Shared by all chains
/// with the same (L, U, k, mode).
struct TowerScan {
  IntervalTower tower;
  int k = 0;
  WeightMode mode = WeightMode::exact;
  std::vector<double> t;
  std::vector<double> image;
  std::vector<double> weight;
  double weight_integral = 0.0;
  bool quadrature_converged = true;
  double e_point = 0.0;
};

inline TowerScan scan_tower(const LadderModel& model, double L, double U, int k, WeightMode mode,
                            const ChainConfig& cfg = {}) {
  if (k < 1 || k > cfg.max_depth)
    throw Error(ErrorCode::invalid_argument,
                "chain depth k = " + std::to_string(k) + " outside [1, " + std::to_string(cfg.max_depth) + "]");
  TowerScan scan;
  scan.tower = reverse_iterates(model, L, U, k);
  scan.k = k;
  scan.mode = mode;
  const auto& top = scan.tower.level(k);
  scan.t = detail::uniform_grid(top.lo, top.hi(), cfg.scan_points);
  scan.image.resize(scan.t.size());
  scan.weight.resize(scan.t.size());
  for (std::size_t i = 0; i < scan.t.size(); ++i) {
    const auto s = orbit_sample(model, scan.t[i], k, mode);
    scan.image[i] = s.image;
    scan.weight[i] = s.weight;
  }
  auto w = [&](double x) { return orbit_sample(model, x, k, mode).weight; };
  const auto d = integrate(w, top.lo, top.hi(), cfg.quad, 8);
  scan.weight_integral = d.value;
  scan.quadrature_converged = d.converged;

  const double target = d.value / top.width;
  // Exchange points are bisected down to adjacent doubles.
  if (auto e = detail::first_crossing(w, scan.t, scan.weight, target, 0.0)) {
    scan.e_point = *e;
  } else {
    scan.e_point = mean_value_point(w, top.lo, top.hi(), target, 2 * cfg.scan_points, cfg.max_scan_points, 0.0);
  }
  return scan;
}

struct FactorizationChain {
  explicit FactorizationChain(Pulse p) : pulse(std::move(p)) {}

  Pulse pulse;
  int k = 0;
  WeightMode mode = WeightMode::exact;
  IntervalTower tower;
  /// alpha[r], r = 0..k.
  std::vector<double> alpha;
  /// beta[r] for r = 1..k; beta[0] is phi1(beta_1), the level-0 image of the
  /// beta orbit, kept for orbit checks only.
  std::vector<double> beta;
  double d_point = 0.0;
  double e_point = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  bool quadrature_converged = true;
  /// Z^2 and ladder weights phi1' at alpha[r], beta[r] (index 0 unused).
  std::vector<double> zeta_sq_alpha, zeta_sq_beta;
  std::vector<double> weight_alpha, weight_beta;
  double shift = 0.0;

  /// prod_{r=1}^k |zeta(1/2 + i alpha_r)|^2 / |zeta(1/2 + i beta_r)|^2.
  double zeta_product() const {
    double p = 1.0;
    for (int r = 1; r <= k; ++r) p *= zeta_sq_alpha[r] / zeta_sq_beta[r];
    return p;
  }
  /// prod_{r=1}^k phi1'(alpha_r) / phi1'(beta_r).
  double exact_product() const {
    double p = 1.0;
    for (int r = 1; r <= k; ++r) p *= weight_alpha[r] / weight_beta[r];
    return p;
  }
  /// The oscillating-system product compared in this chain's mode.
  double system_product() const { return mode == WeightMode::exact ? exact_product() : zeta_product(); }
  double pulse_at_alpha0() const { return pulse_value(pulse, alpha[0]); }
};

/// Builds chains, sharing one TowerScan per (L, U, k, mode). Safe to use
/// from several threads at once.
class ChainBuilder {
 public:
  explicit ChainBuilder(LadderModel model, ChainConfig cfg = {})
      : model_(std::move(model)), cfg_(cfg), digest_(zlab::cache_digest(*model_.cache)) {}

  const LadderModel& model() const { return model_; }
  const ChainConfig& config() const { return cfg_; }
  /// Hex SHA-256 of the serialized cache behind the model.
  const std::string& cache_digest() const { return digest_; }

  std::shared_ptr<const TowerScan> scan(double L, double U, int k, WeightMode mode) {
    const Key key{L, U, k, mode};
    std::promise<std::shared_ptr<const TowerScan>> promise;
    std::shared_future<std::shared_ptr<const TowerScan>> future;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      auto it = scans_.find(key);
      if (it == scans_.end()) {
        future = promise.get_future().share();
        scans_.emplace(key, future);
        owner = true;
      } else {
        future = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(std::make_shared<const TowerScan>(scan_tower(model_, L, U, k, mode, cfg_)));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return future.get();
  }

  FactorizationChain build(const Pulse& pulse, int k, WeightMode mode) {
    return build(*scan(pulse_L(pulse), pulse_U(pulse), k, mode), pulse);
  }

  FactorizationChain build(const TowerScan& scan, const Pulse& pulse) const {
    const int k = scan.k;
    const auto& top = scan.tower.level(k);
    FactorizationChain chain(pulse);
    chain.k = k;
    chain.mode = scan.mode;
    chain.tower = scan.tower;
    chain.shift = model_.shift;
    chain.e_point = scan.e_point;
    chain.denominator = scan.weight_integral;

    auto g = [&](double x) {
      const auto s = orbit_sample(model_, x, k, scan.mode);
      return pulse_value(pulse, s.image) * s.weight;
    };
    const auto n = integrate(g, top.lo, top.hi(), cfg_.quad, 8);
    chain.numerator = n.value;
    chain.quadrature_converged = scan.quadrature_converged && n.converged;

    std::vector<double> samples(scan.t.size());
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = pulse_value(pulse, scan.image[i]) * scan.weight[i];
    const double target = n.value / top.width;
    if (auto d = detail::first_crossing(g, scan.t, samples, target, 0.0)) {
      chain.d_point = *d;
    } else {
      chain.d_point = mean_value_point(g, top.lo, top.hi(), target, 2 * cfg_.scan_points, cfg_.max_scan_points, 0.0);
    }

    fill_orbit(chain.d_point, k, chain.alpha, chain.zeta_sq_alpha, chain.weight_alpha);
    fill_orbit(chain.e_point, k, chain.beta, chain.zeta_sq_beta, chain.weight_beta);
    return chain;
  }

 private:
  using Key = std::tuple<double, double, int, WeightMode>;

  // out[r] = phi1^{k-r}(start), so out[k] = start and out[0] = phi1^k(start).
  void fill_orbit(double start, int k, std::vector<double>& out, std::vector<double>& zsq,
                  std::vector<double>& w) const {
    out.assign(static_cast<std::size_t>(k) + 1, 0.0);
    zsq.assign(out.size(), 0.0);
    w.assign(out.size(), 0.0);
    out[k] = start;
    for (int r = k; r >= 1; --r) {
      out[r - 1] = phi1(model_, out[r]);
      zsq[r] = zeta_half_sq(out[r], model_.cache->build_policy);
      w[r] = ladder_weight(model_, out[r], out[r - 1]);
    }
    zsq[0] = zeta_half_sq(out[0], model_.cache->build_policy);
  }

  LadderModel model_;
  ChainConfig cfg_;
  std::string digest_;
  std::mutex mutex_;
  std::map<Key, std::shared_future<std::shared_ptr<const TowerScan>>> scans_;
};

inline FactorizationChain build_chain(const LadderModel& model, const Pulse& pulse, int k, WeightMode mode,
                                      const ChainConfig& cfg = {}) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "build_chain requires k >= 1");
  ChainBuilder builder(model, cfg);
  return builder.build(pulse, k, mode);
}

struct VerificationReport {
  std::string kind;
  WeightMode mode = WeightMode::exact;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double band = 0.0;
  double band_multiplier = 10.0;
  bool within_band = false;
  double L = 0.0;
  double U = 0.0;
  std::vector<double> deltas;
  int k = 0;
  double alpha0 = 0.0;
  double zeta_product = 0.0;
  double exact_product = 0.0;
  bool quadrature_converged = true;
  bool tower_ascending = true;
  double shift = 0.0;

  /// lhs / rhs, the factor that the asymptotic formula says tends to 1.
  double ratio() const { return lhs / rhs; }
};

namespace detail {

inline void guard_denominators(const FactorizationChain& chain) {
  for (int r = 1; r <= chain.k; ++r) {
    const double den = chain.mode == WeightMode::exact ? std::abs(chain.weight_beta[r]) : chain.zeta_sq_beta[r];
    if (den < 1e-300)
      throw Error(ErrorCode::degenerate_denominator,
                  "system denominator vanishes at beta_" + std::to_string(r) + " = " + std::to_string(chain.beta[r]));
  }
}

inline VerificationReport make_report(const FactorizationChain& chain, std::string kind, double lhs, double rhs,
                                      double band_multiplier) {
  VerificationReport rep;
  rep.kind = std::move(kind);
  rep.mode = chain.mode;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.residual = std::abs(lhs / rhs - 1.0);
  rep.L = pulse_L(chain.pulse);
  rep.U = pulse_U(chain.pulse);
  rep.band = theoretical_band(rep.L);
  rep.band_multiplier = band_multiplier;
  rep.within_band = rep.residual <= band_multiplier * rep.band;
  rep.deltas = pulse_deltas(chain.pulse);
  rep.k = chain.k;
  rep.alpha0 = chain.alpha[0];
  rep.zeta_product = chain.zeta_product();
  rep.exact_product = chain.exact_product();
  rep.quadrature_converged = chain.quadrature_converged;
  rep.tower_ascending = chain.tower.ascending();
  rep.shift = chain.shift;
  return rep;
}

inline const PowerPulse& require_power(const FactorizationChain& chain, const char* what) {
  const auto* p = std::get_if<PowerPulse>(&chain.pulse);
  if (!p) throw Error(ErrorCode::invalid_argument, std::string(what) + " needs a chain built from a power pulse");
  return *p;
}

}  // namespace detail

/// prod ratios  vs  (1/(delta+1)) (U / (alpha_0 - L))^delta = mean(f) / f(alpha_0).
inline VerificationReport lemma1_verify(const FactorizationChain& chain, double band_multiplier = 10.0) {
  const auto& p = detail::require_power(chain, "lemma1_verify");
  detail::guard_denominators(chain);
  const double rhs = exact_mean_power(p) / p.unchecked(chain.alpha[0]);
  return detail::make_report(chain, "lemma1", chain.system_product(), rhs, band_multiplier);
}

/// (delta+1) (alpha_0 - L)^delta prod ratios  vs  U^delta. The exponent on
/// (alpha_0 - L) is the one that keeps this a rearrangement of lemma1.
inline VerificationReport component_identity_verify(const FactorizationChain& chain, double band_multiplier = 10.0) {
  const auto& p = detail::require_power(chain, "component_identity_verify");
  detail::guard_denominators(chain);
  const double lhs = (p.delta() + 1.0) * std::pow(chain.alpha[0] - p.L(), p.delta()) * chain.system_product();
  return detail::make_report(chain, "component", lhs, std::pow(p.U(), p.delta()), band_multiplier);
}

/// prod ratios  vs  [sum_l U^{delta_l} / (delta_l + 1)] / [sum_l (alpha_0 - L)^{delta_l}].
inline VerificationReport lemma2_verify(const FactorizationChain& chain, double band_multiplier = 10.0) {
  const auto* p = std::get_if<AdditivePulse>(&chain.pulse);
  if (!p) throw Error(ErrorCode::invalid_argument, "lemma2_verify needs a chain built from an additive pulse");
  detail::guard_denominators(chain);
  const double rhs = exact_mean_additive(*p) / p->unchecked(chain.alpha[0]);
  return detail::make_report(chain, "lemma2", chain.system_product(), rhs, band_multiplier);
}

}  // namespace zlab
