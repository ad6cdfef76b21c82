#pragma once

// Adaptive Gauss-Kronrod quadrature and the checkpointed accumulator
// J(T) = int_0^T Z(t)^2 dt that the ladder model inverts.

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "zlab/error.hpp"
#include "zlab/special.hpp"

namespace zlab {

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  double min_panel_width = 1e-13;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
      throw Error(ErrorCode::invalid_argument, "quadrature tolerances must be positive");
    if (max_subdivisions < 1)
      throw Error(ErrorCode::invalid_argument, "max_subdivisions must be >= 1");
    if (!(min_panel_width > 0.0))
      throw Error(ErrorCode::invalid_argument, "min_panel_width must be positive");
  }

  std::string canonical() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "abs=%.17g;rel=%.17g;maxsub=%d;minw=%.17g", abs_tol, rel_tol,
                  max_subdivisions, min_panel_width);
    return buf;
  }
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
  /// False when the tolerance was not met before hitting a subdivision limit.
  bool converged = true;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kXgk21 = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk21 = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208062828515, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg10 = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Panel gauss_kronrod21(F& fn, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto sample = [&](double t) {
    const double v = fn(t);
    if (!std::isfinite(v))
      throw Error(ErrorCode::integrand_not_finite, "integrand is not finite at t = " + std::to_string(t));
    return v;
  };

  std::array<double, 21> fv{};
  const double f_center = sample(center);
  double kronrod = f_center * kWgk21[10];
  double gauss = 0.0;
  double abs_sum = std::abs(kronrod);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk21[j];
    const double f1 = sample(center - dx);
    const double f2 = sample(center + dx);
    fv[2 * j] = f1;
    fv[2 * j + 1] = f2;
    kronrod += kWgk21[j] * (f1 + f2);
    abs_sum += kWgk21[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kWg10[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk21[10] * std::abs(f_center - mean);
  for (int j = 0; j < 10; ++j)
    asc += kWgk21[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));

  const double value = kronrod * half;
  double err = std::abs((kronrod - gauss) * half);
  const double resasc = asc * std::abs(half);
  const double resabs = abs_sum * std::abs(half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, value, err};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod 21 integration of fn over [a, b]. The interval is
/// first cut into `initial_panels` equal pieces, then the panel with the
/// largest error estimate is bisected until the tolerance is met.
template <class F>
QuadResult integrate(F&& fn, double a, double b, const QuadratureSpec& spec = {}, int initial_panels = 1) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw Error(ErrorCode::non_finite, "integration limits not finite");
  if (a > b) throw Error(ErrorCode::invalid_argument, "integrate requires a <= b");
  if (a == b) return {};
  initial_panels = std::max(1, initial_panels);

  auto by_error = [](const detail::Panel& x, const detail::Panel& y) { return x.error < y.error; };
  std::priority_queue<detail::Panel, std::vector<detail::Panel>, decltype(by_error)> heap(by_error);
  double total = 0.0;
  double total_err = 0.0;
  const double width = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * width;
    const double hi = i + 1 == initial_panels ? b : a + (i + 1) * width;
    auto p = detail::gauss_kronrod21(fn, lo, hi);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }

  QuadResult result;
  std::vector<detail::Panel> done;
  while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (result.subdivisions >= spec.max_subdivisions) {
      result.converged = false;
      break;
    }
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (worst.b - worst.a < 2.0 * spec.min_panel_width) {
      result.converged = false;
      break;
    }
    heap.pop();
    auto left = detail::gauss_kronrod21(fn, worst.a, mid);
    auto right = detail::gauss_kronrod21(fn, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++result.subdivisions;
  }

  // Re-sum in interval order so the value does not depend on heap layout.
  while (!heap.empty()) {
    done.push_back(heap.top());
    heap.pop();
  }
  std::sort(done.begin(), done.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
  result.value = 0.0;
  result.abs_error = 0.0;
  for (const auto& p : done) {
    result.value += p.value;
    result.abs_error += p.error;
  }
  if (result.abs_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(result.value))) result.converged = false;
  return result;
}

/// Sub-panel count so that Gauss-Kronrod 21 places at least 20 samples per
/// 2 pi / ln t oscillation of Z^2 near the top of [a, b].
inline int oscillation_panels(double a, double b) {
  const double period = kTwoPi / std::log(std::max(b, std::numbers::e));
  const double max_width = 21.0 / 20.0 * period;
  return std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
}

struct IntegralCache {
  double t0 = 0.0;
  double step = 1.0;
  /// values[i] = J(t0 + i * step).
  std::vector<double> values;
  EvalPolicy build_policy;
  QuadratureSpec quad_spec;
  /// Panels whose quadrature stopped short of tolerance during the build.
  std::size_t unconverged_panels = 0;

  std::size_t count() const { return values.size(); }
  double checkpoint(std::size_t i) const { return t0 + static_cast<double>(i) * step; }
  double top() const { return checkpoint(values.empty() ? 0 : values.size() - 1); }
};

inline std::array<std::uint8_t, 32> sha256(const void* data, std::size_t size) {
  std::array<std::uint8_t, 32> out{};
  SHA256(static_cast<const unsigned char*>(data), size, out.data());
  return out;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xF]);
  }
  return s;
}

inline std::array<std::uint8_t, 32> policy_digest(const EvalPolicy& policy, const QuadratureSpec& spec) {
  const std::string text = policy.canonical() + "|" + spec.canonical();
  return sha256(text.data(), text.size());
}

/// Integral of Z^2 over [a, b] with the cache's evaluator and tolerances.
inline QuadResult integrate_z2(double a, double b, const EvalPolicy& policy, const QuadratureSpec& spec) {
  auto z2 = [&](double t) { return zeta_half_sq(t, policy); };
  return integrate(z2, a, b, spec, oscillation_panels(a, b));
}

/// Builds checkpoints of J at spacing `step` on [0, t_max]. Panels are
/// integrated in parallel; the prefix sum is sequential, so the result does
/// not depend on the thread count.
inline IntegralCache build_cache(double t_max, double step, const EvalPolicy& policy = {},
                                 const QuadratureSpec& spec = {}, unsigned threads = 0) {
  if (!std::isfinite(t_max) || !(t_max > 0.0))
    throw Error(ErrorCode::invalid_argument, "build_cache: t_max must be positive");
  if (!std::isfinite(step) || !(step > 0.0))
    throw Error(ErrorCode::invalid_argument, "build_cache: step must be positive");
  policy.validate();
  spec.validate();

  IntegralCache cache;
  cache.step = step;
  cache.build_policy = policy;
  cache.quad_spec = spec;
  const auto panels = static_cast<std::size_t>(std::floor(t_max / step + 1e-9));
  std::vector<double> increments(panels, 0.0);
  std::vector<std::string> failures(panels);
  std::vector<char> unconverged(panels, 0);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(panels, 1)));
  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double a = cache.checkpoint(i);
      const double b = cache.checkpoint(i + 1);
      try {
        auto r = integrate_z2(a, b, policy, spec);
        increments[i] = r.value;
        unconverged[i] = r.converged ? 0 : 1;
      } catch (const Error& e) {
        failures[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (panels + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(panels, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
  }
  for (std::size_t i = 0; i < panels; ++i) {
    if (!failures[i].empty())
      throw Error(ErrorCode::integrand_not_finite,
                  "panel [" + std::to_string(cache.checkpoint(i)) + ", " +
                      std::to_string(cache.checkpoint(i + 1)) + "]: " + failures[i]);
  }

  cache.unconverged_panels = static_cast<std::size_t>(std::count(unconverged.begin(), unconverged.end(), 1));
  cache.values.resize(panels + 1);
  cache.values[0] = 0.0;
  for (std::size_t i = 0; i < panels; ++i) cache.values[i + 1] = cache.values[i] + increments[i];
  return cache;
}

/// J(T): the checkpoint at or below T plus a locally integrated tail,
/// clamped to the next checkpoint so J stays monotone.
inline double j_at(const IntegralCache& cache, double T) {
  if (!std::isfinite(T)) throw Error(ErrorCode::non_finite, "j_at: height not finite");
  if (cache.values.empty() || T < cache.t0 || T > cache.top())
    throw Error(ErrorCode::out_of_range, "j_at: T = " + std::to_string(T) + " outside cache range [" +
                                             std::to_string(cache.t0) + ", " + std::to_string(cache.top()) + "]");
  auto i = static_cast<std::size_t>(std::floor((T - cache.t0) / cache.step));
  i = std::min(i, cache.count() - 1);
  while (i > 0 && cache.checkpoint(i) > T) --i;
  const double base = cache.values[i];
  const double lo = cache.checkpoint(i);
  if (T == lo) return base;
  const double tail = integrate_z2(lo, T, cache.build_policy, cache.quad_spec).value;
  double value = base + tail;
  if (i + 1 < cache.count()) value = std::min(value, cache.values[i + 1]);
  return value;
}

// Cache file layout (little-endian):
//   "ZLJ1" | u32 version | f64 t0 | f64 step | u64 count | 32-byte policy digest | count x f64
inline constexpr std::uint32_t kCacheVersion = 1;

namespace detail {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  auto bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <class T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  if (pos + sizeof(U) > in.size()) throw Error(ErrorCode::format_error, "cache file truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(in[pos + i]) << (8 * i);
  pos += sizeof(U);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_cache(const IntegralCache& cache) {
  std::vector<std::uint8_t> out;
  out.reserve(64 + 8 * cache.count());
  for (char c : std::string_view("ZLJ1")) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_le(out, kCacheVersion);
  detail::put_le(out, cache.t0);
  detail::put_le(out, cache.step);
  detail::put_le(out, static_cast<std::uint64_t>(cache.count()));
  const auto digest = policy_digest(cache.build_policy, cache.quad_spec);
  out.insert(out.end(), digest.begin(), digest.end());
  for (double v : cache.values) detail::put_le(out, v);
  return out;
}

/// Parses a serialized cache. The digest in the header must match the
/// supplied policy, since j_at re-evaluates Z with it.
inline IntegralCache deserialize_cache(std::span<const std::uint8_t> bytes, const EvalPolicy& policy = {},
                                       const QuadratureSpec& spec = {}) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "ZLJ1", 4) != 0)
    throw Error(ErrorCode::format_error, "bad cache magic");
  std::size_t pos = 4;
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  if (version != kCacheVersion)
    throw Error(ErrorCode::format_error, "unsupported cache version " + std::to_string(version));
  IntegralCache cache;
  cache.t0 = detail::get_le<double>(bytes, pos);
  cache.step = detail::get_le<double>(bytes, pos);
  const auto count = detail::get_le<std::uint64_t>(bytes, pos);
  if (pos + 32 > bytes.size()) throw Error(ErrorCode::format_error, "cache file truncated");
  std::array<std::uint8_t, 32> digest{};
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), 32, digest.begin());
  pos += 32;
  if (digest != policy_digest(policy, spec))
    throw Error(ErrorCode::format_error, "cache policy digest does not match the evaluation policy");
  if (bytes.size() - pos != count * 8) throw Error(ErrorCode::format_error, "cache payload size mismatch");
  cache.values.resize(count);
  for (auto& v : cache.values) v = detail::get_le<double>(bytes, pos);
  cache.build_policy = policy;
  cache.quad_spec = spec;
  return cache;
}

inline void save_cache(const IntegralCache& cache, const std::filesystem::path& path) {
  const auto bytes = serialize_cache(cache);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

inline IntegralCache load_cache(const std::filesystem::path& path, const EvalPolicy& policy = {},
                                const QuadratureSpec& spec = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open cache " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_cache(bytes, policy, spec);
}

/// SHA-256 of the serialized cache, hex encoded.
inline std::string cache_digest(const IntegralCache& cache) {
  const auto bytes = serialize_cache(cache);
  return to_hex(sha256(bytes.data(), bytes.size()));
}

}  // namespace zlab
