#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "zlab/special.hpp"

using namespace zlab;
using zlab::testing::read_oracle;
using zlab::testing::rel_err;

namespace {

// Relative error against the oracle, or absolute error where the oracle sits
// on top of a zero and relative error means nothing.
double oracle_error(double got, double want) {
  return std::abs(want) < 1e-6 ? std::abs(got - want) : rel_err(got, want);
}

double worst_error(double lo, double hi, const EvalPolicy& policy = {}) {
  double worst = 0.0;
  int n = 0;
  for (const auto& row : read_oracle("hardy_z_oracle.csv")) {
    if (row.t < lo || row.t >= hi) continue;
    worst = std::max(worst, oracle_error(hardy_z(row.t, policy), row.value));
    ++n;
  }
  EXPECT_GT(n, 0);
  return worst;
}

}  // namespace

TEST(HardyZ, FirstZeroIsTiny) { EXPECT_LE(std::abs(hardy_z(14.1347251417)), 1e-6); }

TEST(HardyZ, ThousandMatchesOracle) {
  int hits = 0;
  for (const auto& row : read_oracle("hardy_z_oracle.csv")) {
    if (row.t != 1000.0) continue;
    EXPECT_LE(rel_err(hardy_z(1000.0), row.value), 1e-6);
    ++hits;
  }
  EXPECT_EQ(hits, 1);
}

TEST(HardyZ, SeriesRangeAgainstOracle) { EXPECT_LE(worst_error(0.0, 200.0), 1e-10); }

TEST(HardyZ, LowRiemannSiegelRangeAgainstOracle) {
  EvalPolicy rs;
  rs.method_switch_height = 50.0;
  EXPECT_LE(worst_error(50.0, 2000.0, rs), 1e-3);
}

TEST(HardyZ, HighRangeAgainstOracle) { EXPECT_LE(worst_error(2000.0, 30000.01), 1e-6); }

TEST(HardyZ, SquareIsExactlyTheSquare) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 20000.0);
  for (int i = 0; i < 200; ++i) {
    const double t = dist(rng);
    const double z = hardy_z(t);
    EXPECT_EQ(zeta_half_sq(t), z * z);
    EXPECT_GE(zeta_half_sq(t), 0.0);
  }
}

TEST(HardyZ, SquareAtZeroAndAtOrigin) {
  EXPECT_LE(zeta_half_sq(14.1347251417), 1e-12);
  EXPECT_NEAR(zeta_half_sq(0.0), 2.1326, 1e-4);
}

TEST(HardyZ, OneSignChangeOnFourteenToFifteen) {
  int changes = 0;
  double prev = hardy_z(14.0);
  for (int i = 1; i <= 1000; ++i) {
    const double z = hardy_z(14.0 + i * 1e-3);
    if ((z < 0.0) != (prev < 0.0)) ++changes;
    prev = z;
  }
  EXPECT_EQ(changes, 1);
}

TEST(HardyZ, RejectsBadHeights) {
  EXPECT_THROW(hardy_z(-1.0), Error);
  EXPECT_THROW(hardy_z(std::nan("")), Error);
  EXPECT_THROW(hardy_z(INFINITY), Error);
  try {
    hardy_z(-1.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::negative_height);
  }
}

TEST(HardyZ, PolicyValidation) {
  EvalPolicy p;
  p.rs_correction_terms = 5;
  EXPECT_THROW(p.validate(), Error);
  p.rs_correction_terms = -1;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.method_switch_height = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(HardyZ, MoreCorrectionsHelpAtModerateHeight) {
  // C_0 alone leaves an O(t^-3/4) error; adding terms drives it down.
  double prev = 1.0;
  for (int K : {0, 1, 2, 3}) {
    EvalPolicy p;
    p.method_switch_height = 50.0;
    p.rs_correction_terms = K;
    const double err = worst_error(200.0, 2000.0, p);
    EXPECT_LT(err, prev) << "K = " << K;
    prev = err;
  }
}

TEST(Theta, MatchesOracle) {
  for (const auto& row : read_oracle("theta_oracle.csv"))
    EXPECT_LE(rel_err(riemann_siegel_theta(row.t), row.value), 1e-10) << "t = " << row.t;
}

TEST(Theta, IncreasingAndContinuous) {
  EXPECT_LT(riemann_siegel_theta(100.0), riemann_siegel_theta(200.0));
  for (double t = 10.0; t < 30000.0; t *= 1.1) EXPECT_LT(riemann_siegel_theta(t), riemann_siegel_theta(t * 1.05));
  EXPECT_LT(std::abs(riemann_siegel_theta(500.0 + 1e-6) - riemann_siegel_theta(500.0)), 1e-5);
}

TEST(Theta, RejectsNonPositive) {
  EXPECT_THROW(riemann_siegel_theta(0.0), Error);
  EXPECT_THROW(riemann_siegel_theta(-3.0), Error);
}

TEST(CriticalPoint, BundlesValueAndSquare) {
  const auto p = CriticalPoint::at(1000.0);
  EXPECT_EQ(p.z, hardy_z(1000.0));
  EXPECT_EQ(p.zeta_sq, p.z * p.z);
}
