#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "zlab/decompose.hpp"

using namespace zlab;
using zlab::testing::shared_builder;
using zlab::testing::shared_model;

namespace {

DecompositionSpec spec_15(WeightMode mode, int k = 2, std::vector<int> k_list = {1, 1}) {
  return {PartitionSpec(1.5, {1.0, 0.5}), k, std::move(k_list), 1e4, 0.5, mode};
}

// lhs/rhs of the decomposition rebuilt from the stored component reports:
// main ratio divided by the product of the basic ratios.
double recomposed_ratio(const DecompositionReport& rep) {
  double r = rep.components.front().report.ratio();
  for (std::size_t i = 1; i < rep.components.size(); ++i) r /= rep.components[i].report.ratio();
  return r;
}

}  // namespace

TEST(Theorem1, ExactMode) {
  const auto rep = theorem1_decompose(shared_builder(), spec_15(WeightMode::exact));
  EXPECT_LE(rep.residual, 1e-5);
  EXPECT_EQ(rep.components.size(), 3u);
  EXPECT_EQ(rep.basic_systems.size(), 2u);
  EXPECT_EQ(rep.cache_digest, shared_builder().cache_digest());
}

TEST(Theorem1, PaperModeWithinBand) {
  const auto rep = theorem1_decompose(shared_builder(), spec_15(WeightMode::paper));
  EXPECT_NEAR(rep.band, std::log(std::log(1e4)) / std::log(1e4), 1e-15);
  EXPECT_LE(rep.residual, 10.0 * rep.band);
  EXPECT_TRUE(rep.within_band);
}

TEST(Theorem1, RhsIsTheProductOfItsParts) {
  const auto rep = theorem1_decompose(shared_builder(), spec_15(WeightMode::paper));
  double basic = 1.0;
  for (double p : rep.basic_systems) basic *= p;
  EXPECT_EQ(rep.rhs, rep.generating_factor * rep.control_factor * basic);
  EXPECT_DOUBLE_EQ(rep.generating_factor, 2.0 * 1.5 / 2.5);
  EXPECT_GE(rep.residual, 0.0);
}

TEST(Theorem1, RecomposesFromComponentReports) {
  for (auto mode : {WeightMode::exact, WeightMode::paper}) {
    const auto rep = theorem1_decompose(shared_builder(), spec_15(mode));
    const double combined = std::abs(recomposed_ratio(rep) - 1.0);
    EXPECT_LE(std::abs(rep.lhs / rep.rhs - recomposed_ratio(rep)), 1e-9);
    EXPECT_LE(rep.residual, (1.0 + 1e-9) * combined + 1e-15);
  }
}

TEST(Theorem1, MainSystemIgnoresThePartition) {
  const auto a = theorem1_decompose(shared_builder(), spec_15(WeightMode::paper));
  const DecompositionSpec other{PartitionSpec(1.5, {0.5, 0.5, 0.5}), 2, {1, 1, 1}, 1e4, 0.5, WeightMode::paper};
  const auto b = theorem1_decompose(shared_builder(), other);
  EXPECT_EQ(a.main_system, b.main_system);
  EXPECT_EQ(a.components.front().alpha, b.components.front().alpha);
}

TEST(Theorem1, TwoPartitionsBothHold) {
  // Exchange points are not unique: two splits of the same exponent both
  // satisfy the decomposition within the band.
  for (const auto& parts : {std::vector<double>{1.0, 0.5}, std::vector<double>{0.5, 0.5, 0.5}}) {
    const DecompositionSpec s{PartitionSpec(1.5, parts), 1, std::vector<int>(parts.size(), 1), 1e4, 0.5,
                              WeightMode::paper};
    EXPECT_TRUE(theorem1_decompose(shared_builder(), s).within_band);
  }
}

TEST(Theorem1, ParallelBuildMatchesSerial) {
  ChainBuilder a(shared_model()), b(shared_model());
  const auto serial = theorem1_decompose(a, spec_15(WeightMode::exact, 3, {2, 1}), 1);
  const auto parallel = theorem1_decompose(b, spec_15(WeightMode::exact, 3, {2, 1}), 3);
  EXPECT_EQ(serial.lhs, parallel.lhs);
  EXPECT_EQ(serial.rhs, parallel.rhs);
}

TEST(Theorem1, SpecValidation) {
  auto bad_k = spec_15(WeightMode::exact, 4);
  EXPECT_THROW(theorem1_decompose(shared_builder(), bad_k), Error);
  auto bad_list = spec_15(WeightMode::exact, 1, {1});
  EXPECT_THROW(theorem1_decompose(shared_builder(), bad_list), Error);
  auto bad_depth = spec_15(WeightMode::exact, 1, {1, 0});
  EXPECT_THROW(theorem1_decompose(shared_builder(), bad_depth), Error);
  EXPECT_THROW(PartitionSpec(1.5, {1.5}), Error);
}

TEST(Theorem1, FailureNamesTheComponent) {
  // At 1e4 the tower climbs, so a cache ending just above the first level
  // holds the depth-one main system but not a depth-three basic system.
  const auto full = reverse_iterates(shared_model(), 1e4, 0.5, 3);
  const double t_max = std::ceil(full.level(1).hi()) + 1.0;
  ASSERT_GT(full.level(3).hi(), t_max + 1.0);
  const LadderModel small(std::make_shared<const IntegralCache>(build_cache(t_max, 1.0, {}, {}, 1)));
  ChainBuilder builder(small);
  DecompositionSpec s{PartitionSpec(1.5, {1.0, 0.5}), 1, {3, 1}, 1e4, 0.5, WeightMode::exact};
  try {
    theorem1_decompose(builder, s);
    FAIL() << "expected tower_escape";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::tower_escape);
    EXPECT_NE(std::string(e.what()).find("basic system 1"), std::string::npos) << e.what();
  }
}

TEST(Corollary, IsTheDepthOneDecomposition) {
  const PartitionSpec part(1.5, {1.0, 0.5});
  for (auto mode : {WeightMode::exact, WeightMode::paper}) {
    const auto c = corollary_k1(shared_builder(), part, 1e4, 0.5, mode);
    const auto t = theorem1_decompose(shared_builder(), {part, 1, {1, 1}, 1e4, 0.5, mode});
    EXPECT_EQ(c.lhs, t.lhs);
    EXPECT_EQ(c.rhs, t.rhs);
    EXPECT_EQ(c.residual, t.residual);
    EXPECT_EQ(c.kind, "corollary");
    if (mode == WeightMode::exact) {
      EXPECT_LE(c.residual, 1e-5);
    }
  }
}

TEST(Corollary, BetaIsShared) {
  const auto c = corollary_k1(shared_builder(), PartitionSpec(1.5, {1.0, 0.5}), 1e4, 0.5, WeightMode::paper);
  EXPECT_TRUE(c.beta_shared);
  EXPECT_LE(c.beta_sharing_gap, 1e-12);
  for (std::size_t i = 1; i < c.components.size(); ++i)
    EXPECT_LE(std::abs(c.components[i].beta[1] - c.components[0].beta[1]), 1e-12);
}

TEST(Presets, FourTemplates) {
  const auto presets = extremal_presets();
  ASSERT_EQ(presets.size(), 4u);
  const PartitionSpec part(1.5, {1.0, 0.5});
  for (const auto& p : presets) EXPECT_NO_THROW(p.instantiate(part, 1e4, 0.5, WeightMode::exact, 3).validate(3));
  EXPECT_FALSE(presets[0].main_at_max || presets[0].basic_at_max);
}

TEST(Presets, BasicAtMaxDepthRuns) {
  const PartitionSpec part(1.5, {1.0, 0.5});
  const auto spec = extremal_presets()[2].instantiate(part, 1e4, 0.5, WeightMode::exact, 2);
  EXPECT_EQ(spec.k, 1);
  EXPECT_EQ(spec.k_list, (std::vector<int>{2, 2}));
  EXPECT_LE(theorem1_decompose(shared_builder(), spec).residual, 1e-5);
}

TEST(Theorem2, SingleTermIsAQuotientOfLemma1Runs) {
  for (auto mode : {WeightMode::exact, WeightMode::paper}) {
    const auto rep = theorem2_verify(shared_builder(), AdditivePulse(1e4, 0.5, {1.0}), 2, {1}, mode);
    const auto tilde = lemma1_verify(shared_builder().build(PowerPulse(1e4, 0.5, 1.0), 2, mode));
    const auto basic = lemma1_verify(shared_builder().build(PowerPulse(1e4, 0.5, 1.0), 1, mode));
    EXPECT_NEAR(rep.residual, std::abs(tilde.ratio() / basic.ratio() - 1.0), 1e-12);
  }
}

TEST(Theorem2, TwoTerms) {
  const AdditivePulse p(1e4, 0.5, {2.0, 1.0});
  const auto exact = theorem2_verify(shared_builder(), p, 1, {1, 1}, WeightMode::exact);
  EXPECT_LE(exact.residual, 1e-5);
  const auto paper = theorem2_verify(shared_builder(), p, 1, {1, 1}, WeightMode::paper);
  EXPECT_LE(paper.residual, 10.0 * paper.band);
  EXPECT_EQ(paper.rhs, paper.weighted_basic_sum * paper.control_factor);
}

TEST(Theorem2, Validation) {
  const AdditivePulse p(1e4, 0.5, {2.0, 1.0});
  EXPECT_THROW(theorem2_verify(shared_builder(), p, 0, {1, 1}, WeightMode::exact), Error);
  EXPECT_THROW(theorem2_verify(shared_builder(), p, 1, {1}, WeightMode::exact), Error);
  EXPECT_THROW(theorem2_verify(shared_builder(), p, 1, {1, 5}, WeightMode::exact), Error);
}
