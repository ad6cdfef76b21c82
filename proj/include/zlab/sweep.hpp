#pragma once

// Single verification requests and Cartesian parameter sweeps over them.
//
// A request names one of the five verifications and its parameters. The CLI
// `verify` command runs exactly one request and a sweep runs many, so a sweep
// row can always be reproduced by the matching single run.

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zlab/chains.hpp"
#include "zlab/decompose.hpp"
#include "zlab/error.hpp"
#include "zlab/pulses.hpp"
#include "zlab/report_io.hpp"

namespace zlab {

enum class VerifyKind { lemma1, lemma2, theorem1, theorem2, corollary };

inline std::string to_string(VerifyKind k) {
  switch (k) {
    case VerifyKind::lemma1: return "lemma1";
    case VerifyKind::lemma2: return "lemma2";
    case VerifyKind::theorem1: return "theorem1";
    case VerifyKind::theorem2: return "theorem2";
    case VerifyKind::corollary: return "corollary";
  }
  return "?";
}

inline VerifyKind parse_kind(std::string_view s) {
  for (auto k : {VerifyKind::lemma1, VerifyKind::lemma2, VerifyKind::theorem1, VerifyKind::theorem2,
                 VerifyKind::corollary})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::invalid_argument, "unknown verification '" + std::string(s) + "'");
}

/// Which parameter axes a verification reads.
inline bool uses_delta(VerifyKind k) { return k == VerifyKind::lemma1; }
inline bool uses_partition(VerifyKind k) { return k != VerifyKind::lemma1; }
inline bool uses_depth(VerifyKind k) { return k != VerifyKind::corollary; }
inline bool uses_k_list(VerifyKind k) { return k == VerifyKind::theorem1 || k == VerifyKind::theorem2; }

struct VerifyRequest {
  VerifyKind kind = VerifyKind::lemma1;
  double L = 0.0;
  double U = 0.0;
  /// lemma1: the exponent; theorem1: the partitioned total (defaults to the
  /// sum of parts); otherwise the sum of parts.
  std::optional<double> delta;
  /// theorem1 / corollary: the partition; lemma2 / theorem2: the exponents.
  std::vector<double> parts;
  int k = 1;
  std::vector<int> k_list;
  WeightMode mode = WeightMode::exact;

  double total_delta() const {
    if (delta) return *delta;
    double s = 0.0;
    for (double d : parts) s += d;
    return s;
  }

  nlohmann::json spec_json() const {
    return {{"kind", to_string(kind)}, {"L", L},           {"U", U},
            {"delta", total_delta()},  {"partition", parts}, {"k", kind == VerifyKind::corollary ? 1 : k},
            {"k_list", k_list},        {"mode", to_string(mode)}};
  }
};

struct VerifyOutcome {
  VerifyRequest request;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double band = 0.0;
  double threshold = 0.0;
  bool pass = false;
  nlohmann::json report;
};

/// Builds the pulses and chains the request names and wraps the result as
/// {spec, mode, lhs, rhs, residual, band, components, cache_digest}. A run
/// passes when residual <= tolerance if one is given, else when it lies
/// within band_multiplier * ln ln L / ln L.
inline VerifyOutcome run_request(ChainBuilder& builder, const VerifyRequest& req,
                                 std::optional<double> tolerance = std::nullopt, unsigned threads = 1) {
  VerifyOutcome out;
  out.request = req;
  const double C = builder.config().band_multiplier;
  nlohmann::json components = nlohmann::json::array();
  nlohmann::json details;

  auto take = [&](double lhs, double rhs, double residual, double band) {
    out.lhs = lhs;
    out.rhs = rhs;
    out.residual = residual;
    out.band = band;
  };

  switch (req.kind) {
    case VerifyKind::lemma1: {
      if (!req.delta) throw Error(ErrorCode::invalid_argument, "lemma1 needs an exponent delta");
      const PowerPulse p(req.L, req.U, *req.delta);
      const auto chain = builder.build(p, req.k, req.mode);
      const auto rep = lemma1_verify(chain, C);
      take(rep.lhs, rep.rhs, rep.residual, rep.band);
      components.push_back(to_json(detail::summarize("main", chain, rep)));
      break;
    }
    case VerifyKind::lemma2: {
      const AdditivePulse p(req.L, req.U, req.parts);
      const auto chain = builder.build(p, req.k, req.mode);
      const auto rep = lemma2_verify(chain, C);
      take(rep.lhs, rep.rhs, rep.residual, rep.band);
      components.push_back(to_json(detail::summarize("tilde", chain, rep)));
      break;
    }
    case VerifyKind::theorem1:
    case VerifyKind::corollary: {
      const PartitionSpec partition(req.total_delta(), req.parts);
      const auto rep =
          req.kind == VerifyKind::corollary
              ? corollary_k1(builder, partition, req.L, req.U, req.mode, threads)
              : theorem1_decompose(builder, DecompositionSpec{partition, req.k, req.k_list, req.L, req.U, req.mode},
                                   threads);
      take(rep.lhs, rep.rhs, rep.residual, rep.band);
      details = to_json(rep);
      components = details["components"];
      break;
    }
    case VerifyKind::theorem2: {
      const AdditivePulse p(req.L, req.U, req.parts);
      const auto rep = theorem2_verify(builder, p, req.k, req.k_list, req.mode, threads);
      take(rep.lhs, rep.rhs, rep.residual, rep.band);
      details = to_json(rep);
      components = details["components"];
      break;
    }
  }

  out.threshold = tolerance ? *tolerance : C * out.band;
  out.pass = out.residual <= out.threshold;
  const auto spec = req.spec_json();
  out.report = {
      {"spec", spec},
      {"mode", to_string(req.mode)},
      {"lhs", out.lhs},
      {"rhs", out.rhs},
      {"residual", out.residual},
      {"band", out.band},
      {"band_multiplier", C},
      {"threshold", out.threshold},
      {"status", out.pass ? "pass" : "fail"},
      {"components", components},
      {"cache_digest", builder.cache_digest()},
      {"key", report_key(spec, req.mode, builder.cache_digest())},
  };
  if (!details.is_null()) {
    details.erase("components");
    out.report["decomposition"] = details;
  }
  return out;
}

/// A k_list axis entry: an explicit depth list, or one depth for every part.
struct KListEntry {
  std::vector<int> depths;
  bool broadcast = false;

  std::vector<int> resolve(std::size_t n) const {
    if (broadcast) return std::vector<int>(n, depths.front());
    return depths;
  }
  auto operator<=>(const KListEntry&) const = default;
};

// Config file (JSON):
//   {
//     "kind": "theorem1",                 lemma1 | lemma2 | theorem1 | theorem2 | corollary
//     "L_values": [5000, 10000],
//     "U_values": [0.5],
//     "delta_values": [0.5, 1],           lemma1 only
//     "partitions": [[1.0, 0.5]],         parts (theorem1, corollary) or exponents (lemma2, theorem2)
//     "k_values": [1, 2],
//     "k_list_values": [[1, 1], 2],       a list, or one depth for all parts
//     "modes": ["exact", "paper"],
//     "parallelism": 4,
//     "band_multiplier": 10,
//     "tolerance": 1e-5,                  optional pass threshold
//     "cache": "cache.zlj",               optional
//     "csv": "out.csv",                   optional; stdout when absent
//     "jsonl": "reports.jsonl"            optional; one report per line
//   }
struct SweepConfig {
  VerifyKind kind = VerifyKind::lemma1;
  std::vector<double> L_values;
  std::vector<double> U_values;
  std::vector<double> delta_values;
  std::vector<std::vector<double>> partitions;
  std::vector<int> k_values;
  std::vector<KListEntry> k_list_values;
  std::vector<WeightMode> modes;
  unsigned parallelism = 1;
  double band_multiplier = 10.0;
  std::optional<double> tolerance;
  std::string cache_path;
  std::string csv_path;
  std::string jsonl_path;

  /// Checks every referenced parameter against its own invariants.
  void validate(int max_depth, const PulseLimits& limits = {}) const {
    if (parallelism < 1) throw Error(ErrorCode::invalid_argument, "parallelism must be >= 1");
    if (!(band_multiplier > 0.0)) throw Error(ErrorCode::invalid_argument, "band_multiplier must be positive");
    for (double L : L_values) detail::check_support(L, limits.width_cap, limits);
    for (double U : U_values) detail::check_support(2.0 * limits.height_floor, U, limits);
    for (double d : delta_values) detail::check_exponent(d);
    for (const auto& p : partitions) {
      if (kind == VerifyKind::theorem1 || kind == VerifyKind::corollary)
        PartitionSpec::of(p);
      else
        AdditivePulse(limits.height_floor * 2.0, limits.width_cap, p, limits);
    }
    for (int k : k_values)
      if (k < 1 || k > max_depth)
        throw Error(ErrorCode::invalid_argument, "k = " + std::to_string(k) + " outside [1, " +
                                                     std::to_string(max_depth) + "]");
    for (const auto& e : k_list_values) {
      if (e.depths.empty()) throw Error(ErrorCode::invalid_argument, "empty k_list");
      for (int kl : e.depths)
        if (kl < 1 || kl > max_depth)
          throw Error(ErrorCode::invalid_argument, "k_list depth " + std::to_string(kl) + " outside [1, " +
                                                       std::to_string(max_depth) + "]");
    }
  }
};

namespace detail {

template <class T>
std::vector<T> json_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<T>>();
}

}  // namespace detail

inline SweepConfig parse_sweep_config(const nlohmann::json& j) {
  static const std::vector<std::string> known{"kind",      "L_values", "U_values",        "delta_values", "partitions",
                                              "k_values",  "k_list_values", "modes",      "parallelism",  "band_multiplier",
                                              "tolerance", "cache",    "csv",             "jsonl"};
  if (!j.is_object()) throw Error(ErrorCode::format_error, "sweep config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error(ErrorCode::format_error, "unknown sweep config key '" + key + "'");
  try {
    SweepConfig cfg;
    if (j.contains("kind")) cfg.kind = parse_kind(j.at("kind").get<std::string>());
    cfg.L_values = detail::json_list<double>(j, "L_values");
    cfg.U_values = detail::json_list<double>(j, "U_values");
    cfg.delta_values = detail::json_list<double>(j, "delta_values");
    cfg.partitions = detail::json_list<std::vector<double>>(j, "partitions");
    cfg.k_values = detail::json_list<int>(j, "k_values");
    if (j.contains("k_list_values"))
      for (const auto& e : j.at("k_list_values")) {
        if (e.is_number_integer())
          cfg.k_list_values.push_back({{e.get<int>()}, true});
        else
          cfg.k_list_values.push_back({e.get<std::vector<int>>(), false});
      }
    for (const auto& m : detail::json_list<std::string>(j, "modes")) cfg.modes.push_back(parse_mode(m));
    if (j.contains("parallelism")) {
      const int p = j.at("parallelism").get<int>();
      if (p < 1) throw Error(ErrorCode::invalid_argument, "parallelism must be >= 1");
      cfg.parallelism = static_cast<unsigned>(p);
    }
    if (j.contains("band_multiplier")) cfg.band_multiplier = j.at("band_multiplier").get<double>();
    if (j.contains("tolerance")) cfg.tolerance = j.at("tolerance").get<double>();
    if (j.contains("cache")) cfg.cache_path = j.at("cache").get<std::string>();
    if (j.contains("csv")) cfg.csv_path = j.at("csv").get<std::string>();
    if (j.contains("jsonl")) cfg.jsonl_path = j.at("jsonl").get<std::string>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("sweep config: ") + e.what());
  }
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open sweep config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, "sweep config " + path + ": " + e.what());
  }
  return parse_sweep_config(j);
}

/// Cartesian product of the axes the verification uses, in lexicographic
/// order of (L, U, delta, partition, k, k_list, mode) with each axis sorted.
/// Any used axis that is empty yields no points.
inline std::vector<VerifyRequest> expand_sweep(const SweepConfig& cfg) {
  auto sorted = [](auto v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto Ls = sorted(cfg.L_values);
  const auto Us = sorted(cfg.U_values);
  const auto modes = sorted(cfg.modes);
  const auto deltas = uses_delta(cfg.kind) ? sorted(cfg.delta_values) : std::vector<double>{0.0};
  const auto parts = uses_partition(cfg.kind) ? sorted(cfg.partitions) : std::vector<std::vector<double>>{{}};
  const auto ks = uses_depth(cfg.kind) ? sorted(cfg.k_values) : std::vector<int>{1};
  const auto klists = uses_k_list(cfg.kind) ? sorted(cfg.k_list_values) : std::vector<KListEntry>{{}};

  std::vector<VerifyRequest> out;
  for (double L : Ls)
    for (double U : Us)
      for (double d : deltas)
        for (const auto& p : parts)
          for (int k : ks)
            for (const auto& kl : klists)
              for (auto mode : modes) {
                VerifyRequest r;
                r.kind = cfg.kind;
                r.L = L;
                r.U = U;
                if (uses_delta(cfg.kind)) r.delta = d;
                r.parts = p;
                r.k = k;
                if (uses_k_list(cfg.kind)) r.k_list = kl.resolve(p.size());
                r.mode = mode;
                out.push_back(std::move(r));
              }
  return out;
}

struct SweepRow {
  VerifyRequest request;
  std::optional<VerifyOutcome> outcome;
  std::string error;

  std::string status() const {
    if (!outcome) return "error";
    return outcome->pass ? "pass" : "fail";
  }
};

/// Runs every point over `parallelism` workers sharing one builder. Rows
/// keep the expansion order whatever the worker count.
inline std::vector<SweepRow> run_sweep(ChainBuilder& builder, const SweepConfig& cfg) {
  const auto requests = expand_sweep(cfg);
  std::vector<SweepRow> rows(requests.size());
  detail::parallel_for(requests.size(), cfg.parallelism, [&](std::size_t i) {
    rows[i].request = requests[i];
    try {
      rows[i].outcome = run_request(builder, requests[i], cfg.tolerance);
    } catch (const Error& e) {
      rows[i].error = std::string(to_string(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

inline std::string csv_row(const SweepRow& row) {
  const auto& r = row.request;
  std::vector<std::string> f;
  f.push_back(format_real(r.L));
  f.push_back(format_real(r.U));
  f.push_back(format_real(r.total_delta()));
  f.push_back(join_values(r.parts));
  f.push_back(std::to_string(r.kind == VerifyKind::corollary ? 1 : r.k));
  f.push_back(join_values(r.k_list));
  f.push_back(to_string(r.mode));
  if (row.outcome) {
    f.push_back(format_real(row.outcome->lhs));
    f.push_back(format_real(row.outcome->rhs));
    f.push_back(format_real(row.outcome->residual));
    f.push_back(format_real(row.outcome->band));
  } else {
    f.insert(f.end(), 4, "");
  }
  f.push_back(row.status());
  f.push_back(row.error);
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) line += ',';
    line += csv_field(f[i]);
  }
  return line;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = csv_header() + "\n";
  for (const auto& row : rows) out += csv_row(row) + "\n";
  return out;
}

inline bool sweep_ok(const std::vector<SweepRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.outcome && r.outcome->pass; });
}

}  // namespace zlab
