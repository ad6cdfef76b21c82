// zlab: build integral caches, run single verifications and sweeps.
//
// Exit status: 0 success / pass, 1 verification outside its threshold (or a
// sweep with a failing row), 2 invalid input, 3 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zlab/chains.hpp"
#include "zlab/decompose.hpp"
#include "zlab/error.hpp"
#include "zlab/ladder.hpp"
#include "zlab/quad.hpp"
#include "zlab/sweep.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

constexpr double kDefaultCacheTop = 30000.0;
constexpr const char* kCacheEnv = "ZLAB_CACHE";

bool is_input_error(zlab::ErrorCode c) {
  using zlab::ErrorCode;
  switch (c) {
    case ErrorCode::invalid_argument:
    case ErrorCode::non_finite:
    case ErrorCode::negative_height:
    case ErrorCode::delta_excluded:
    case ErrorCode::delta_trivial:
    case ErrorCode::width_out_of_range:
    case ErrorCode::height_below_floor:
    case ErrorCode::partition_invalid:
    case ErrorCode::format_error:
      return true;
    default:
      return false;
  }
}

std::shared_ptr<const zlab::IntegralCache> open_cache(const std::string& flag, unsigned threads) {
  std::string path = flag;
  if (path.empty())
    if (const char* env = std::getenv(kCacheEnv)) path = env;
  if (!path.empty()) return std::make_shared<const zlab::IntegralCache>(zlab::load_cache(path));
  std::cerr << "zlab: no cache given (--cache or " << kCacheEnv << "); building one to t = " << kDefaultCacheTop
            << " in memory\n";
  return std::make_shared<const zlab::IntegralCache>(zlab::build_cache(kDefaultCacheTop, 1.0, {}, {}, threads));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw zlab::Error(zlab::ErrorCode::io_error, "cannot write " + path);
  out << text;
}

struct VerifyArgs {
  std::string kind;
  double L = 10000.0;
  double U = 0.5;
  std::optional<double> delta;
  std::vector<double> partition;
  int k = 1;
  std::vector<int> k_list;
  std::string mode = "exact";
  std::string cache;
  double band_multiplier = 10.0;
  std::optional<double> tolerance;
  unsigned threads = 1;
  std::string out;
};

int cmd_build_cache(double t_max, double step, const std::string& out, unsigned threads) {
  if (!(t_max > 10.0)) throw zlab::Error(zlab::ErrorCode::invalid_argument, "--t-max must exceed 10");
  if (!(step > 0.0) || step > t_max) throw zlab::Error(zlab::ErrorCode::invalid_argument, "--step must lie in (0, t-max]");
  const auto cache = zlab::build_cache(t_max, step, {}, {}, threads);
  zlab::save_cache(cache, out);
  std::cout << "checkpoints " << cache.count() << "\n";
  if (cache.unconverged_panels > 0) std::cout << "unconverged_panels " << cache.unconverged_panels << "\n";
  std::cout << "digest " << zlab::cache_digest(cache) << "\n";
  return 0;
}

int cmd_verify(const VerifyArgs& a) {
  zlab::VerifyRequest req;
  req.kind = zlab::parse_kind(a.kind);
  req.L = a.L;
  req.U = a.U;
  req.delta = a.delta;
  req.parts = a.partition;
  req.k = a.k;
  req.k_list = a.k_list;
  req.mode = zlab::parse_mode(a.mode);
  if (req.kind == zlab::VerifyKind::lemma1 && !req.delta)
    throw zlab::Error(zlab::ErrorCode::invalid_argument, "lemma1 needs --delta");
  if (req.kind != zlab::VerifyKind::lemma1 && req.parts.empty())
    throw zlab::Error(zlab::ErrorCode::invalid_argument, a.kind + " needs --partition");
  if (zlab::uses_k_list(req.kind) && req.k_list.empty()) req.k_list.assign(req.parts.size(), 1);
  if (req.kind != zlab::VerifyKind::theorem1 && req.kind != zlab::VerifyKind::lemma1) req.delta.reset();
  if (!(a.band_multiplier > 0.0)) throw zlab::Error(zlab::ErrorCode::invalid_argument, "--band-multiplier must be positive");

  // Reject bad pulse parameters before spending time on the cache.
  if (req.delta) zlab::detail::check_exponent(*req.delta);
  zlab::detail::check_support(req.L, req.U, {});

  zlab::ChainConfig cfg;
  cfg.band_multiplier = a.band_multiplier;
  zlab::ChainBuilder builder(zlab::LadderModel(open_cache(a.cache, a.threads)), cfg);
  const auto outcome = zlab::run_request(builder, req, a.tolerance, a.threads);
  write_text(a.out, outcome.report.dump(2) + "\n");
  return outcome.pass ? 0 : kExitFail;
}

int cmd_sweep(const std::string& config_path, std::optional<unsigned> parallelism, const std::string& cache_flag) {
  auto cfg = zlab::load_sweep_config(config_path);
  if (parallelism) cfg.parallelism = *parallelism;
  zlab::ChainConfig chain_cfg;
  chain_cfg.band_multiplier = cfg.band_multiplier;
  cfg.validate(chain_cfg.max_depth);

  const auto requests = zlab::expand_sweep(cfg);
  std::vector<zlab::SweepRow> rows;
  if (!requests.empty()) {
    const std::string cache_path = cache_flag.empty() ? cfg.cache_path : cache_flag;
    zlab::ChainBuilder builder(zlab::LadderModel(open_cache(cache_path, cfg.parallelism)), chain_cfg);
    rows = zlab::run_sweep(builder, cfg);
  }
  write_text(cfg.csv_path, zlab::sweep_csv(rows));
  if (!cfg.jsonl_path.empty()) {
    std::string lines;
    for (const auto& r : rows) {
      nlohmann::json j = r.outcome ? r.outcome->report
                                   : nlohmann::json{{"spec", r.request.spec_json()}, {"status", "error"}, {"error", r.error}};
      lines += j.dump() + "\n";
    }
    write_text(cfg.jsonl_path, lines);
  }
  return zlab::sweep_ok(rows) ? 0 : kExitFail;
}

int cmd_presets(int k0, const std::vector<double>& partition, double L, double U, const std::string& mode) {
  if (k0 < 1) throw zlab::Error(zlab::ErrorCode::invalid_argument, "--k0 must be >= 1");
  nlohmann::json out = nlohmann::json::array();
  const auto m = zlab::parse_mode(mode);
  std::optional<zlab::PartitionSpec> part;
  if (!partition.empty()) part = zlab::PartitionSpec::of(partition);
  for (const auto& p : zlab::extremal_presets()) {
    nlohmann::json j{{"name", p.name}, {"main_at_k0", p.main_at_max}, {"basic_at_k0", p.basic_at_max}};
    if (part) {
      const auto spec = p.instantiate(*part, L, U, m, k0);
      spec.validate(k0);
      j["spec"] = {{"L", spec.L},          {"U", spec.U},           {"delta", spec.partition.delta()},
                   {"partition", partition}, {"k", spec.k},           {"k_list", spec.k_list},
                   {"mode", zlab::to_string(spec.mode)}};
    } else {
      j["k"] = p.main_at_max ? k0 : 1;
      j["k_l"] = p.basic_at_max ? k0 : 1;
    }
    out.push_back(j);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zlab: exchange-point chains and factorization checks on the critical line"};
  app.require_subcommand(1);

  double t_max = kDefaultCacheTop;
  double step = 1.0;
  std::string cache_out = "cache.zlj";
  unsigned build_threads = 1;
  auto* build = app.add_subcommand("build-cache", "Integrate Z^2 on a checkpoint grid and save it");
  build->add_option("--t-max", t_max, "Upper height")->required();
  build->add_option("--step", step, "Checkpoint spacing")->required();
  build->add_option("--out", cache_out, "Output file")->required();
  build->add_option("--threads", build_threads, "Worker threads")->check(CLI::PositiveNumber);

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run one verification and print its JSON report");
  verify->add_option("kind", va.kind, "lemma1 | lemma2 | theorem1 | theorem2 | corollary")
      ->required()
      ->check(CLI::IsMember({"lemma1", "lemma2", "theorem1", "theorem2", "corollary"}));
  verify->add_option("--L", va.L, "Left endpoint of the pulse support");
  verify->add_option("--U", va.U, "Width of the pulse support");
  verify->add_option("--delta", va.delta, "Exponent (lemma1) or partitioned total (theorem1)");
  verify->add_option("--partition", va.partition, "Parts or additive exponents, comma separated")->delimiter(',');
  verify->add_option("--k", va.k, "Chain depth");
  verify->add_option("--k-list", va.k_list, "Basic-system depths, comma separated")->delimiter(',');
  verify->add_option("--mode", va.mode, "exact | paper")->check(CLI::IsMember({"exact", "paper"}));
  verify->add_option("--cache", va.cache, std::string("Cache file (default: $") + kCacheEnv + ")");
  verify->add_option("--band-multiplier", va.band_multiplier, "C in residual <= C ln ln L / ln L");
  verify->add_option("--tolerance", va.tolerance, "Absolute residual threshold replacing the band test");
  verify->add_option("--threads", va.threads, "Concurrent chain builds")->check(CLI::PositiveNumber);
  verify->add_option("--out", va.out, "Write the report here instead of stdout");

  std::string config_path;
  std::optional<unsigned> sweep_parallelism;
  std::string sweep_cache;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and emit CSV");
  sweep->add_option("--config", config_path, "JSON sweep config")->required();
  sweep->add_option("--parallelism", sweep_parallelism, "Override the config's worker count")->check(CLI::PositiveNumber);
  sweep->add_option("--cache", sweep_cache, "Cache file (overrides the config and $ZLAB_CACHE)");

  int k0 = 3;
  std::vector<double> preset_partition;
  double preset_L = 10000.0;
  double preset_U = 0.5;
  std::string preset_mode = "exact";
  auto* presets = app.add_subcommand("presets", "List the four extremal depth presets");
  presets->add_option("--k0", k0, "Largest depth");
  presets->add_option("--partition", preset_partition, "Instantiate with this partition")->delimiter(',');
  presets->add_option("--L", preset_L, "Left endpoint used when instantiating");
  presets->add_option("--U", preset_U, "Width used when instantiating");
  presets->add_option("--mode", preset_mode, "exact | paper")->check(CLI::IsMember({"exact", "paper"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*build) return cmd_build_cache(t_max, step, cache_out, build_threads);
    if (*verify) return cmd_verify(va);
    if (*sweep) return cmd_sweep(config_path, sweep_parallelism, sweep_cache);
    if (*presets) return cmd_presets(k0, preset_partition, preset_L, preset_U, preset_mode);
  } catch (const zlab::Error& e) {
    std::cerr << "zlab: " << zlab::to_string(e.code()) << ": " << e.what() << "\n";
    return is_input_error(e.code()) ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "zlab: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
