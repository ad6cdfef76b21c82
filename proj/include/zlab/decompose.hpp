#pragma once

// Multiplicative decomposition of an oscillating system over a partition of
// its exponent, its depth-1 corollary and extremal presets, and the additive
// interaction of a sum pulse with its per-exponent systems.
//
// Multiplicative form, for delta = delta_1 + ... + delta_n:
//   P(delta, k) ~ [prod(delta_l + 1) / (delta + 1)]                 generating factor
//               * (alpha_0 - L)^-delta * prod (alpha_0^l - L)^delta_l  control factor
//               * prod_l P(delta_l, k_l)                             basic systems
// Additive form, for f = sum_l (t - L)^delta_l:
//   P~(k) ~ sum_l (alpha_0^l - L)^delta_l P(delta_l, k_l) / sum_l (alpha~_0 - L)^delta_l

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zlab/chains.hpp"
#include "zlab/error.hpp"
#include "zlab/pulses.hpp"

namespace zlab {

struct DecompositionSpec {
  PartitionSpec partition;
  int k = 1;
  std::vector<int> k_list;
  double L = 0.0;
  double U = 0.0;
  WeightMode mode = WeightMode::exact;

  void validate(int max_depth) const {
    if (k < 1 || k > max_depth)
      throw Error(ErrorCode::invalid_argument, "main depth k = " + std::to_string(k) + " outside [1, " +
                                                   std::to_string(max_depth) + "]");
    if (k_list.size() != partition.n())
      throw Error(ErrorCode::invalid_argument, "k_list has " + std::to_string(k_list.size()) +
                                                   " entries for a partition of " + std::to_string(partition.n()));
    for (int kl : k_list)
      if (kl < 1 || kl > max_depth)
        throw Error(ErrorCode::invalid_argument, "basic depth " + std::to_string(kl) + " outside [1, " +
                                                     std::to_string(max_depth) + "]");
  }
};

struct ComponentSummary {
  std::string role;  // "main", "basic", "tilde"
  std::vector<double> deltas;
  int k = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
  double product = 0.0;
  VerificationReport report;
};

struct DecompositionReport {
  std::string kind;  // theorem1 | corollary | theorem2
  double L = 0.0;
  double U = 0.0;
  double delta = 0.0;
  std::vector<double> parts;
  int k = 0;
  std::vector<int> k_list;
  WeightMode mode = WeightMode::exact;

  double main_system = 0.0;
  std::vector<double> basic_systems;
  double generating_factor = 1.0;
  double control_factor = 1.0;
  /// Additive form only: sum_l (alpha_0^l - L)^delta_l P_l.
  double weighted_basic_sum = 0.0;

  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double band = 0.0;
  double band_multiplier = 10.0;
  bool within_band = false;

  /// Largest |beta_r(main) - beta_r(basic l)| over basic systems of the
  /// main depth; 0 when they coincide.
  double beta_sharing_gap = 0.0;
  bool beta_shared = false;
  std::vector<ComponentSummary> components;
  std::string cache_digest;
};

namespace detail {

/// Runs fn(i) for i in [0, n) over up to `threads` workers.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline ComponentSummary summarize(std::string role, const FactorizationChain& chain, VerificationReport report) {
  ComponentSummary c;
  c.role = std::move(role);
  c.deltas = pulse_deltas(chain.pulse);
  c.k = chain.k;
  c.alpha = chain.alpha;
  c.beta = chain.beta;
  c.product = chain.system_product();
  c.report = std::move(report);
  return c;
}

inline FactorizationChain build_component(ChainBuilder& builder, const Pulse& pulse, int k, WeightMode mode,
                                          const std::string& label) {
  try {
    return builder.build(pulse, k, mode);
  } catch (const Error& e) {
    throw Error(e.code(), label + ": " + e.what());
  }
}

inline void finish(DecompositionReport& rep, double band_multiplier) {
  rep.residual = std::abs(rep.lhs / rep.rhs - 1.0);
  rep.band = theoretical_band(rep.L);
  rep.band_multiplier = band_multiplier;
  rep.within_band = rep.residual <= band_multiplier * rep.band;
}

inline double beta_gap(const FactorizationChain& main, const FactorizationChain& other) {
  double gap = 0.0;
  for (int r = 1; r <= main.k; ++r) gap = std::max(gap, std::abs(main.beta[r] - other.beta[r]));
  return gap;
}

}  // namespace detail

/// Builds the main chain (delta, k) and the n basic chains (delta_l, k_l) on
/// one [L, L + U] and assembles both sides of the multiplicative formula.
inline DecompositionReport theorem1_decompose(ChainBuilder& builder, const DecompositionSpec& spec,
                                              unsigned threads = 1) {
  const auto& cfg = builder.config();
  spec.validate(cfg.max_depth);
  const auto& parts = spec.partition.parts();
  const std::size_t n = parts.size();
  const PowerPulse main_pulse(spec.L, spec.U, spec.partition.delta());
  std::vector<PowerPulse> basic_pulses;
  for (double d : parts) basic_pulses.emplace_back(spec.L, spec.U, d);

  std::vector<std::optional<FactorizationChain>> chains(n + 1);
  detail::parallel_for(n + 1, threads, [&](std::size_t i) {
    if (i == 0)
      chains[0] = detail::build_component(builder, main_pulse, spec.k, spec.mode, "main system");
    else
      chains[i] = detail::build_component(builder, basic_pulses[i - 1], spec.k_list[i - 1], spec.mode,
                                          "basic system " + std::to_string(i));
  });

  DecompositionReport rep;
  rep.kind = "theorem1";
  rep.L = spec.L;
  rep.U = spec.U;
  rep.delta = spec.partition.delta();
  rep.parts = parts;
  rep.k = spec.k;
  rep.k_list = spec.k_list;
  rep.mode = spec.mode;
  rep.cache_digest = builder.cache_digest();

  const auto& main = *chains[0];
  rep.main_system = main.system_product();
  rep.components.push_back(detail::summarize("main", main, lemma1_verify(main, cfg.band_multiplier)));

  double generating = 1.0 / (rep.delta + 1.0);
  double control = std::pow(main.alpha[0] - spec.L, -rep.delta);
  double basic_product = 1.0;
  bool any_same_depth = false;
  for (std::size_t l = 0; l < n; ++l) {
    const auto& c = *chains[l + 1];
    generating *= parts[l] + 1.0;
    control *= std::pow(c.alpha[0] - spec.L, parts[l]);
    const double p = c.system_product();
    rep.basic_systems.push_back(p);
    basic_product *= p;
    rep.components.push_back(detail::summarize("basic", c, component_identity_verify(c, cfg.band_multiplier)));
    if (c.k == main.k) {
      any_same_depth = true;
      rep.beta_sharing_gap = std::max(rep.beta_sharing_gap, detail::beta_gap(main, c));
    }
  }
  rep.beta_shared = any_same_depth && rep.beta_sharing_gap == 0.0;
  rep.generating_factor = generating;
  rep.control_factor = control;
  rep.lhs = rep.main_system;
  rep.rhs = generating * control * basic_product;
  detail::finish(rep, cfg.band_multiplier);
  return rep;
}

/// The depth-one case k = k_1 = ... = k_n = 1.
inline DecompositionReport corollary_k1(ChainBuilder& builder, const PartitionSpec& partition, double L, double U,
                                        WeightMode mode, unsigned threads = 1) {
  DecompositionSpec spec{partition, 1, std::vector<int>(partition.n(), 1), L, U, mode};
  auto rep = theorem1_decompose(builder, spec, threads);
  rep.kind = "corollary";
  return rep;
}

struct PresetTemplate {
  std::string name;
  bool main_at_max = false;
  bool basic_at_max = false;

  DecompositionSpec instantiate(const PartitionSpec& partition, double L, double U, WeightMode mode, int k0) const {
    return {partition, main_at_max ? k0 : 1, std::vector<int>(partition.n(), basic_at_max ? k0 : 1), L, U, mode};
  }
};

/// The depth-one corollary and the three other extremal depth choices.
inline std::vector<PresetTemplate> extremal_presets() {
  return {
      {"corollary: k = k_l = 1", false, false},
      {"k = k0, k_l = 1", true, false},
      {"k = 1, k_l = k0", false, true},
      {"k = k_l = k0", true, true},
  };
}

/// Additive interaction: the tilde chain of sum_l (t - L)^delta_l at depth k
/// against the per-exponent chains at depths k_l.
inline DecompositionReport theorem2_verify(ChainBuilder& builder, const AdditivePulse& additive, int k,
                                           const std::vector<int>& k_list, WeightMode mode, unsigned threads = 1) {
  const auto& cfg = builder.config();
  const auto& deltas = additive.deltas();
  const std::size_t n = deltas.size();
  if (k < 1 || k > cfg.max_depth)
    throw Error(ErrorCode::invalid_argument, "depth k = " + std::to_string(k) + " outside [1, " +
                                                 std::to_string(cfg.max_depth) + "]");
  if (k_list.size() != n)
    throw Error(ErrorCode::invalid_argument, "k_list needs one depth per exponent");
  for (int kl : k_list)
    if (kl < 1 || kl > cfg.max_depth) throw Error(ErrorCode::invalid_argument, "basic depth outside [1, k0]");

  std::vector<PowerPulse> basic_pulses;
  for (double d : deltas) basic_pulses.emplace_back(additive.L(), additive.U(), d);
  std::vector<std::optional<FactorizationChain>> chains(n + 1);
  detail::parallel_for(n + 1, threads, [&](std::size_t i) {
    if (i == 0)
      chains[0] = detail::build_component(builder, additive, k, mode, "additive system");
    else
      chains[i] = detail::build_component(builder, basic_pulses[i - 1], k_list[i - 1], mode,
                                          "basic system " + std::to_string(i));
  });

  DecompositionReport rep;
  rep.kind = "theorem2";
  rep.L = additive.L();
  rep.U = additive.U();
  rep.parts = deltas;
  for (double d : deltas) rep.delta += d;
  rep.k = k;
  rep.k_list = k_list;
  rep.mode = mode;
  rep.cache_digest = builder.cache_digest();

  const auto& tilde = *chains[0];
  rep.main_system = tilde.system_product();
  rep.components.push_back(detail::summarize("tilde", tilde, lemma2_verify(tilde, cfg.band_multiplier)));
  double weighted = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const auto& c = *chains[l + 1];
    const double p = c.system_product();
    rep.basic_systems.push_back(p);
    weighted += std::pow(c.alpha[0] - rep.L, deltas[l]) * p;
    rep.components.push_back(detail::summarize("basic", c, component_identity_verify(c, cfg.band_multiplier)));
    if (c.k == tilde.k) rep.beta_sharing_gap = std::max(rep.beta_sharing_gap, detail::beta_gap(tilde, c));
  }
  rep.beta_shared = rep.beta_sharing_gap == 0.0;
  rep.weighted_basic_sum = weighted;
  rep.control_factor = 1.0 / additive.unchecked(tilde.alpha[0]);
  rep.lhs = rep.main_system;
  rep.rhs = weighted * rep.control_factor;
  detail::finish(rep, cfg.band_multiplier);
  return rep;
}

}  // namespace zlab
