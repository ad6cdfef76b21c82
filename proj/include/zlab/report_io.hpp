#pragma once

// JSON and CSV emission for verification outcomes.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zlab/chains.hpp"
#include "zlab/decompose.hpp"
#include "zlab/quad.hpp"

namespace zlab {

/// Shortest text that round-trips the double ("%.17g").
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join_values(const std::vector<T>& xs, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>)
      out += format_real(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

inline nlohmann::json to_json(const VerificationReport& r) {
  return {
      {"kind", r.kind},
      {"mode", to_string(r.mode)},
      {"L", r.L},
      {"U", r.U},
      {"deltas", r.deltas},
      {"k", r.k},
      {"alpha0", r.alpha0},
      {"lhs", r.lhs},
      {"rhs", r.rhs},
      {"ratio", r.ratio()},
      {"residual", r.residual},
      {"band", r.band},
      {"band_multiplier", r.band_multiplier},
      {"within_band", r.within_band},
      {"zeta_product", r.zeta_product},
      {"exact_product", r.exact_product},
      {"quadrature_converged", r.quadrature_converged},
      {"tower_ascending", r.tower_ascending},
      {"shift", r.shift},
  };
}

inline nlohmann::json to_json(const ComponentSummary& c) {
  return {
      {"role", c.role}, {"deltas", c.deltas}, {"k", c.k},           {"alpha", c.alpha},
      {"beta", c.beta}, {"product", c.product}, {"report", to_json(c.report)},
  };
}

inline nlohmann::json to_json(const DecompositionReport& r) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : r.components) components.push_back(to_json(c));
  return {
      {"kind", r.kind},
      {"mode", to_string(r.mode)},
      {"main_system", r.main_system},
      {"basic_systems", r.basic_systems},
      {"generating_factor", r.generating_factor},
      {"control_factor", r.control_factor},
      {"weighted_basic_sum", r.weighted_basic_sum},
      {"lhs", r.lhs},
      {"rhs", r.rhs},
      {"residual", r.residual},
      {"band", r.band},
      {"band_multiplier", r.band_multiplier},
      {"within_band", r.within_band},
      {"beta_sharing_gap", r.beta_sharing_gap},
      {"beta_shared", r.beta_shared},
      {"components", components},
      {"cache_digest", r.cache_digest},
  };
}

/// Hex SHA-256 of the compact spec JSON, the mode and the cache digest; used
/// to name report files.
inline std::string report_key(const nlohmann::json& spec, WeightMode mode, const std::string& cache_digest) {
  const std::string text = spec.dump() + "|" + to_string(mode) + "|" + cache_digest;
  return to_hex(sha256(text.data(), text.size()));
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"L",   "U",   "delta",    "partition", "k",    "k_list", "mode",
                                             "lhs", "rhs", "residual", "band",      "status", "error"};
  return cols;
}

inline std::string csv_header() {
  std::string out;
  for (const auto& c : csv_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

/// Quotes a CSV field when it contains a separator, quote or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace zlab
