// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// all seven hold.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "zlab/chains.hpp"
#include "zlab/decompose.hpp"
#include "zlab/ladder.hpp"
#include "zlab/pulses.hpp"
#include "zlab/quad.hpp"
#include "zlab/special.hpp"
#include "zlab/sweep.hpp"

using namespace zlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int n, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Row {
  double t;
  double z;
};

std::vector<Row> oracle() {
  std::ifstream in(std::string(ZLAB_FIXTURES) + "/hardy_z_oracle.csv");
  std::vector<Row> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto c = line.find(',');
    if (c != std::string::npos) rows.push_back({std::stod(line.substr(0, c)), std::stod(line.substr(c + 1))});
  }
  return rows;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. Z against the arbitrary-precision table.
void criterion1() {
  const auto t0 = Clock::now();
  const auto rows = oracle();
  EvalPolicy rs_low;
  rs_low.method_switch_height = 50.0;
  double high = 0.0, mid = 0.0, low = 0.0;
  int n_high = 0, n_mid = 0, n_low = 0;
  for (const auto& r : rows) {
    auto err = [&](double got) { return std::abs(r.z) < 1e-6 ? std::abs(got - r.z) : std::abs(got / r.z - 1.0); };
    if (r.t >= 2000.0 && r.t <= 30000.0) {
      high = std::max(high, err(hardy_z(r.t)));
      ++n_high;
    } else if (r.t >= 50.0 && r.t < 2000.0) {
      mid = std::max(mid, err(hardy_z(r.t, rs_low)));
      ++n_mid;
    }
    if (r.t < EvalPolicy{}.method_switch_height) {
      low = std::max(low, err(hardy_z(r.t)));
      ++n_low;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = n_high >= 200 && high <= 1e-6 && mid <= 1e-3 && low <= 1e-10 && secs <= 30.0;
  verdict(1, ok, "hardy_z accuracy",
          fmt("%d pts [2e3,3e4] max %.2e; %d pts [50,2e3) RS max %.2e; %d pts series max %.2e; %.1fs", n_high, high,
              n_mid, mid, n_low, low, secs));
}

// 2. Closed-form means against direct quadrature.
void criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> Ld(1500.0, 25000.0), Ud(0.05, 0.99), Dd(0.1, 4.0);
  QuadratureSpec s;
  s.abs_tol = 1e-15;
  s.rel_tol = 1e-13;
  s.max_subdivisions = 20000;
  s.min_panel_width = 1e-18;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double L = Ld(rng), U = Ud(rng);
    double exact = 0.0, quad = 0.0;
    if (i % 2 == 0) {
      const PowerPulse p(L, U, Dd(rng));
      exact = exact_mean_power(p);
      quad = integrate([&](double t) { return p.unchecked(t); }, L, L + U, s, 4).value / U;
    } else {
      std::vector<double> ds{Dd(rng), Dd(rng)};
      std::sort(ds.begin(), ds.end(), std::greater<>());
      const AdditivePulse p(L, U, ds);
      exact = exact_mean_additive(p);
      quad = integrate([&](double t) { return p.unchecked(t); }, L, L + U, s, 4).value / U;
    }
    worst = std::max(worst, std::abs(quad / exact - 1.0));
  }
  const double secs = seconds_since(t0);
  verdict(2, worst <= 1e-10 && secs <= 10.0, "closed-form means vs quadrature",
          fmt("50 pulses, max rel %.2e, %.2fs", worst, secs));
}

// 3. Ladder: defining equation, inverse, substitution.
void criterion3(const LadderModel& m) {
  const auto t0 = Clock::now();
  double resid = 0.0, roundtrip = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double T = 1000.0 + i * 290.0;
    const double x = phi1(m, T);
    const double J = j_at(*m.cache, T);
    resid = std::max(resid, std::abs(mean_value_main_term(x) - J) / J);
    roundtrip = std::max(roundtrip, std::abs(phi1_inverse(m, x) - T) / T);
  }
  QuadratureSpec s;
  s.abs_tol = 1e-15;
  s.rel_tol = 1e-12;
  s.max_subdivisions = 20000;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> Ld(2000.0, 25000.0), Ud(0.1, 0.99);
  double subst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double L = Ld(rng), U = Ud(rng);
    const auto tower = reverse_iterates(m, L, U, 1);
    const auto& lv = tower.level(1);
    const double one = integrate([&](double t) { return ladder_weight(m, t); }, lv.lo, lv.hi(), s, 8).value;
    const double lin = integrate([&](double t) {
                         const double y = phi1(m, t);
                         return (y - L) * ladder_weight(m, t, y);
                       }, lv.lo, lv.hi(), s, 8).value;
    subst = std::max({subst, std::abs(one / U - 1.0), std::abs(lin / (U * U / 2.0) - 1.0)});
  }
  const double secs = seconds_since(t0);
  verdict(3, resid <= 1e-10 && roundtrip <= 1e-9 && subst <= 1e-7 && secs <= 120.0, "ladder",
          fmt("residual %.2e, roundtrip %.2e*T, substitution %.2e on 20 intervals, %.1fs", resid, roundtrip, subst,
              secs));
}

struct GridResult {
  std::string kind;
  WeightMode mode;
  double L, U;
  std::vector<double> deltas;
  int k;
  double residual;
  double band;
  double limit;
  std::vector<double> beta;
  double recompose_gap = 0.0;
};

// Every verification over the acceptance grid, both modes.
std::vector<GridResult> run_grid(ChainBuilder& builder, double& secs) {
  const auto t0 = Clock::now();
  const std::vector<double> Ls{5000.0, 10000.0, 20000.0}, Us{0.3, 0.5}, Ds{0.5, 1.0, 2.0};
  const std::vector<int> Ks{1, 2, 3};
  const std::vector<std::vector<double>> parts{{1.0, 0.5}, {0.5, 0.5, 0.5}};

  std::vector<std::function<GridResult()>> jobs;
  for (auto mode : {WeightMode::exact, WeightMode::paper})
    for (double L : Ls)
      for (double U : Us)
        for (int k : Ks) {
          for (double d : Ds)
            jobs.push_back([&, mode, L, U, k, d] {
              const auto chain = builder.build(PowerPulse(L, U, d), k, mode);
              const auto r = lemma1_verify(chain);
              return GridResult{"lemma1", mode, L, U, {d}, k, r.residual, r.band, 1e-6, chain.beta};
            });
          for (const auto& p : parts) {
            jobs.push_back([&, mode, L, U, k, p] {
              const auto chain = builder.build(AdditivePulse(L, U, p), k, mode);
              const auto r = lemma2_verify(chain);
              return GridResult{"lemma2", mode, L, U, p, k, r.residual, r.band, 1e-6, chain.beta};
            });
            jobs.push_back([&, mode, L, U, k, p] {
              const auto r = theorem1_decompose(
                  builder, {PartitionSpec::of(p), k, std::vector<int>(p.size(), k), L, U, mode});
              double ratio = r.components[0].report.ratio();
              for (std::size_t i = 1; i < r.components.size(); ++i) ratio /= r.components[i].report.ratio();
              GridResult g{"theorem1", mode, L, U, p, k, r.residual, r.band, 1e-5, r.components[0].beta};
              g.recompose_gap = std::abs(r.lhs / r.rhs - ratio);
              return g;
            });
            jobs.push_back([&, mode, L, U, k, p] {
              const auto r = theorem2_verify(builder, AdditivePulse(L, U, p), k, std::vector<int>(p.size(), k), mode);
              return GridResult{"theorem2", mode, L, U, p, k, r.residual, r.band, 1e-5, r.components[0].beta};
            });
            if (k == 1)
              jobs.push_back([&, mode, L, U, p] {
                const auto r = corollary_k1(builder, PartitionSpec::of(p), L, U, mode);
                return GridResult{"corollary", mode, L, U, p, 1, r.residual, r.band, 1e-5, r.components[0].beta};
              });
          }
        }

  std::vector<GridResult> results(jobs.size());
  detail::parallel_for(jobs.size(), workers(), [&](std::size_t i) { results[i] = jobs[i](); });
  secs = seconds_since(t0);
  return results;
}

void criterion4(const std::vector<GridResult>& grid, double secs) {
  int n = 0, bad = 0;
  double worst_lemma = 0.0, worst_theorem = 0.0;
  for (const auto& g : grid) {
    if (g.mode != WeightMode::exact) continue;
    ++n;
    if (g.residual > g.limit) {
      ++bad;
      std::printf("  exact %s L=%g U=%g k=%d residual %.3e > %.0e\n", g.kind.c_str(), g.L, g.U, g.k, g.residual,
                  g.limit);
    }
    double& worst = g.kind.starts_with("lemma") ? worst_lemma : worst_theorem;
    worst = std::max(worst, g.residual);
  }
  verdict(4, bad == 0 && secs <= 600.0, "exact-mode identities",
          fmt("%d runs, worst lemma %.2e (<=1e-6), worst theorem/corollary %.2e (<=1e-5), grid %.1fs both modes, %u "
              "workers",
              n, worst_lemma, worst_theorem, secs, workers()));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void criterion5(const std::vector<GridResult>& grid) {
  int n = 0, bad = 0;
  double worst_ratio = 0.0;
  std::map<double, std::vector<double>> by_L;
  for (const auto& g : grid) {
    if (g.mode != WeightMode::paper) continue;
    ++n;
    worst_ratio = std::max(worst_ratio, g.residual / g.band);
    if (g.residual > 10.0 * g.band) ++bad;
    by_L[g.L].push_back(g.residual);
  }
  const double m5 = median(by_L[5000.0]), m10 = median(by_L[10000.0]), m20 = median(by_L[20000.0]);
  verdict(5, bad == 0 && m20 < m5, "paper-mode band and trend",
          fmt("%d runs, max residual/band %.2e (<=10); medians L=5e3 %.2e, 1e4 %.2e, 2e4 %.2e", n, worst_ratio, m5, m10,
              m20));
}

void criterion6(ChainBuilder& builder, const std::vector<GridResult>& grid) {
  // beta across exponents at fixed (L, U, k, mode), over every grid chain.
  std::map<std::tuple<int, double, double, int>, std::vector<double>> first_beta;
  double beta_gap = 0.0;
  double recompose = 0.0;
  for (const auto& g : grid) {
    const auto key = std::tuple(static_cast<int>(g.mode), g.L, g.U, g.k);
    auto [it, fresh] = first_beta.emplace(key, g.beta);
    if (!fresh)
      for (int r = 1; r <= g.k; ++r) beta_gap = std::max(beta_gap, std::abs(it->second[r] - g.beta[r]));
    if (g.kind == "theorem1") recompose = std::max(recompose, g.recompose_gap);
  }

  bool both_within = true;
  for (const auto& p : {std::vector<double>{1.0, 0.5}, std::vector<double>{0.5, 0.5, 0.5}}) {
    const auto r = theorem1_decompose(builder, {PartitionSpec(1.5, p), 1, std::vector<int>(p.size(), 1), 1e4, 0.5,
                                                WeightMode::paper});
    both_within = both_within && r.within_band;
  }

  int rejected = 0, expected = 0;
  auto rejects = [&](auto fn) {
    ++expected;
    try {
      fn();
    } catch (const Error&) {
      ++rejected;
    }
  };
  for (double d : {-0.99, -0.5, -0.01, 0.0}) rejects([d] { PowerPulse(1e4, 0.5, d); });
  for (double U : {0.0, -0.1, 0.995, 1.5}) rejects([U] { PowerPulse(1e4, U, 1.0); });
  rejects([] { PartitionSpec(1.5, {1.5}); });
  rejects([] { PartitionSpec::of({2.0}); });

  const bool ok = beta_gap <= 1e-12 && recompose <= 1e-9 && both_within && rejected == expected;
  verdict(6, ok, "structural invariants",
          fmt("beta gap %.1e, recomposition %.1e, two partitions of 1.5 within band: %s, rejections %d/%d", beta_gap,
              recompose, both_within ? "yes" : "no", rejected, expected));
}

void criterion7(const LadderModel& m, const std::string& digest) {
  const auto rebuilt = build_cache(30000.0, 1.0, {}, {}, 2);
  const bool same_digest = cache_digest(rebuilt) == digest;

  SweepConfig cfg;
  cfg.kind = VerifyKind::theorem1;
  cfg.L_values = {5000.0, 20000.0};
  cfg.U_values = {0.3};
  cfg.partitions = {{1.0, 0.5}};
  cfg.k_values = {1, 2};
  cfg.k_list_values = {{{1}, true}};
  cfg.modes = {WeightMode::exact, WeightMode::paper};
  std::vector<std::string> csvs;
  for (unsigned p : {1u, 2u, 8u}) {
    ChainBuilder b(m);
    cfg.parallelism = p;
    csvs.push_back(sweep_csv(run_sweep(b, cfg)));
  }
  const bool same_csv = csvs[0] == csvs[1] && csvs[1] == csvs[2];
  verdict(7, same_digest && same_csv, "determinism",
          fmt("cache rebuild digest %s, sweep CSV at parallelism 1/2/8 %s", same_digest ? "identical" : "DIFFERS",
              same_csv ? "byte-identical" : "DIFFERS"));
}

}  // namespace

int main() {
  criterion1();
  criterion2();

  const auto t0 = Clock::now();
  auto cache = std::make_shared<const IntegralCache>(build_cache(30000.0, 1.0, {}, {}, workers()));
  const std::string digest = cache_digest(*cache);
  std::printf("cache: %zu checkpoints, %zu unconverged panels, %.1fs, digest %s\n", cache->count(),
              cache->unconverged_panels, seconds_since(t0), digest.c_str());
  const LadderModel model(cache);

  criterion3(model);
  ChainBuilder builder(model);
  double grid_secs = 0.0;
  const auto grid = run_grid(builder, grid_secs);
  criterion4(grid, grid_secs);
  criterion5(grid);
  criterion6(builder, grid);
  criterion7(model, digest);

  std::printf("%s: %d of 7 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
