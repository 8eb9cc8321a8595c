#include "sitrep/feature_space.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "sitrep/error.h"
#include "support/fixtures.h"

namespace sitrep {
namespace {

TEST(PerturbationSamplerTest, DrawsOnlyObservedValuesWithTheirWeight) {
  const PerturbationSampler sampler({{1.0, 2.0, 2.0, 2.0}});
  std::mt19937_64 rng(3);
  std::map<double, int> counts;
  const int n = 40'000;
  for (int i = 0; i < n; ++i) ++counts[sampler.Draw(0, rng)];
  ASSERT_EQ(counts.size(), 2u);
  EXPECT_NEAR(counts[2.0] / static_cast<double>(n), 0.75, 0.01);
}

TEST(PerturbationSamplerTest, QuantileIsNearestRank) {
  const PerturbationSampler sampler({{5.0, 1.0, 4.0, 2.0, 3.0}});
  EXPECT_EQ(sampler.min(0), 1.0);
  EXPECT_EQ(sampler.max(0), 5.0);
  EXPECT_EQ(sampler.Quantile(0, 0.0), 1.0);
  EXPECT_EQ(sampler.Quantile(0, 0.2), 1.0);
  EXPECT_EQ(sampler.Quantile(0, 0.21), 2.0);
  EXPECT_EQ(sampler.Quantile(0, 0.5), 3.0);
  EXPECT_EQ(sampler.Quantile(0, 0.99), 5.0);
  EXPECT_EQ(sampler.Quantile(0, 1.0), 5.0);
  EXPECT_EQ(sampler.Quantile(0, 7.0), 5.0);
}

TEST(PerturbationSamplerTest, RejectsEmptyOrNonFiniteSupport) {
  using Support = std::vector<std::vector<double>>;
  EXPECT_THROW(PerturbationSampler(Support{{1.0}, {}}), ConfigError);
  EXPECT_THROW(PerturbationSampler(Support{{std::numeric_limits<double>::quiet_NaN()}}), ConfigError);
  EXPECT_THROW(PerturbationSampler(Support{{std::numeric_limits<double>::infinity()}}), ConfigError);
}

TEST(PerturbationSamplerTest, RestrictedKeepsSupportAndMasksFeatures) {
  const PerturbationSampler sampler({{1.0}, {2.0}, {3.0}});
  const std::vector<std::size_t> keep = {0, 2};
  const auto restricted = sampler.RestrictedTo(keep);
  EXPECT_TRUE(sampler.perturbs(1));
  EXPECT_TRUE(restricted.perturbs(0));
  EXPECT_FALSE(restricted.perturbs(1));
  EXPECT_TRUE(restricted.perturbs(2));
  EXPECT_EQ(restricted.support(1), sampler.support(1));
  const std::vector<std::size_t> bad = {3};
  EXPECT_THROW(sampler.RestrictedTo(bad), std::out_of_range);
}

TEST(PerturbationSamplerTest, FromTableCollectsColumns) {
  const auto& table = testing::SmallSynthetic().table;
  const auto sampler = PerturbationSampler::FromTable(table);
  ASSERT_EQ(sampler.feature_count(), 93u);
  for (std::size_t j : {0u, 40u, 92u}) {
    ASSERT_EQ(sampler.support(j).size(), table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
      EXPECT_EQ(sampler.support(j)[i], table.features(i)[j]);
    }
  }
}

TEST(FeatureSpaceTest, ScalesArePopulationStdDev) {
  const auto& table = testing::SmallSynthetic().table;
  const auto space = FeatureSpace::FromTable(table);
  ASSERT_EQ(space.size(), 93u);
  for (std::size_t j : {3u, 50u, 88u}) {
    double mean = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) mean += table.features(i)[j];
    mean /= static_cast<double>(table.size());
    double var = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i) {
      const double d = table.features(i)[j] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(table.size()));
    EXPECT_NEAR(space.scales()[j], sd > 0.0 ? sd : 1.0, 1e-9 * std::max(1.0, sd));
  }
}

TEST(FeatureSpaceTest, StandardizedL1) {
  const FeatureSpace space(testing::DeskSchema(3), PerturbationSampler({{0.0}, {0.0}, {0.0}}),
                           {2.0, 0.5, 1.0});
  const std::vector<double> a = {1.0, 1.0, 1.0};
  const std::vector<double> b = {5.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(space.StandardizedL1(a, b), 4.0 / 2.0 + 1.0 / 0.5);
  EXPECT_DOUBLE_EQ(space.StandardizedL1(a, a), 0.0);
  EXPECT_DOUBLE_EQ(space.StandardizedL1(a, b), space.StandardizedL1(b, a));
}

TEST(FeatureSpaceTest, RejectsInconsistentParts) {
  EXPECT_THROW(FeatureSpace(testing::DeskSchema(2), PerturbationSampler(std::vector<std::vector<double>>{{0.0}}),
                           {1.0, 1.0}),
               ConfigError);
  EXPECT_THROW(
      FeatureSpace(testing::DeskSchema(2), PerturbationSampler({{0.0}, {0.0}}), {1.0, 0.0}),
      ConfigError);
}

}  // namespace
}  // namespace sitrep
