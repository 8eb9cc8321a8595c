#include "sitrep/synthetic.h"

#include <gtest/gtest.h>

#include <cmath>

#include "sitrep/dag.h"
#include "sitrep/error.h"
#include "support/fixtures.h"

namespace sitrep {
namespace {

SyntheticConfig Small(std::uint64_t seed = 7) {
  SyntheticConfig c;
  c.counties = 240;
  c.seed = seed;
  return c;
}

TEST(GenerateSyntheticTest, PositivityAndLabelConsistency) {
  const SyntheticData data = GenerateSynthetic(Small());
  ASSERT_EQ(data.table.size(), 240u);
  ASSERT_TRUE(data.table.fully_labeled());
  for (std::size_t i = 0; i < data.table.size(); ++i) {
    for (double v : data.table.features(i)) EXPECT_GE(v, 0.0);
    EXPECT_EQ(*data.table.label(i), BucketSeverity(*data.table.record(i).damage_dollars));
  }
  for (auto count : data.table.ClassCounts()) EXPECT_GT(count, 40u);
}

TEST(GenerateSyntheticTest, DeterministicPerSeed) {
  EXPECT_EQ(GenerateSynthetic(Small(3)).table, GenerateSynthetic(Small(3)).table);
  EXPECT_FALSE(GenerateSynthetic(Small(3)).table == GenerateSynthetic(Small(4)).table);
}

TEST(GenerateSyntheticTest, DefaultIdentifiers) {
  const auto& table = testing::SmallSynthetic().table;
  EXPECT_EQ(table.record(0).fips, "48001");
  EXPECT_TRUE(table.Find("48199", "event_1").has_value());
  EXPECT_EQ(table.Events(), (std::vector<std::string>{"event_1", "event_2", "event_3"}));
}

TEST(GenerateSyntheticTest, ZeroNoiseFollowsTheEquations) {
  for (const char* dag_name : {"dag2", "dag3"}) {
    SyntheticConfig c = Small();
    c.noise_scale = 0.0;
    c.dag = dag_name;
    const SyntheticData data = GenerateSynthetic(c);
    const FeatureSchema& schema = data.table.schema();
    const FeatureDag dag = ExpandDag(BuiltinDag(dag_name), schema);
    int non_roots = 0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& eq = data.truth.equations[j];
      EXPECT_EQ(eq.node, schema.feature(j).name);
      EXPECT_EQ(eq.root, dag.parents(j).empty());
      if (eq.root) continue;
      ++non_roots;
      EXPECT_FALSE(eq.coefficients.empty());
      for (std::size_t i = 0; i < data.table.size(); ++i) {
        const auto x = data.table.features(i);
        double v = eq.intercept;
        for (const auto& [parent, coef] : eq.coefficients) v += coef * x[schema.IndexOf(parent)];
        EXPECT_NEAR(x[j], std::max(0.0, v), 1e-9 * std::max(1.0, std::abs(v)));
      }
    }
    EXPECT_GT(non_roots, 0);
  }
}

TEST(GenerateSyntheticTest, LabelMarginLeavesAGap) {
  SyntheticConfig c = Small();
  c.damage_noise = 0.0;
  c.label_margin = 0.15;
  const SyntheticData data = GenerateSynthetic(c);
  for (const auto& r : data.table.records()) {
    const double l = std::log10(*r.damage_dollars);
    EXPECT_GE(std::abs(l - 4.0), 0.15 - 1e-12);
    EXPECT_GE(std::abs(l - 5.0), 0.15 - 1e-12);
  }
  const SyntheticConfig sep = SyntheticConfig::Separable();
  EXPECT_EQ(sep.counties, 3000);
  EXPECT_EQ(sep.damage_noise, 0.0);
  EXPECT_GT(sep.label_margin, 0.0);
}

TEST(GenerateSyntheticTest, DamageIsDeterministicWithoutNoise) {
  SyntheticConfig c = Small();
  c.damage_noise = 0.0;
  const SyntheticData data = GenerateSynthetic(c);
  for (const auto& r : data.table.records()) {
    EXPECT_NEAR(data.truth.damage.DeterministicDamage(data.table.schema(), r.features),
                *r.damage_dollars, 1e-9 * *r.damage_dollars);
  }
}

TEST(GenerateSyntheticTest, CalibrationFailureIsReported) {
  SyntheticConfig c = Small();
  c.damage_offset = 1.0;
  c.damage_slope = 0.0;
  EXPECT_THROW(GenerateSynthetic(c), CalibrationError);
  c = Small();
  c.counties = 1;
  EXPECT_THROW(GenerateSynthetic(c), ConfigError);
}

TEST(SyntheticConfigTest, JsonRoundTrip) {
  SyntheticConfig c = Small(99);
  c.dag = "dag3";
  c.label_margin = 0.1;
  const SyntheticConfig copy = SyntheticConfig::FromJson(c.ToJson());
  EXPECT_EQ(copy.ToJson(), c.ToJson());
  // Calibrated config regenerates the same table.
  const SyntheticData data = GenerateSynthetic(c);
  EXPECT_EQ(GenerateSynthetic(SyntheticConfig::FromJson(data.config.ToJson())).table,
            data.table);
  const GroundTruth truth = GroundTruth::FromJson(data.truth.ToJson());
  EXPECT_EQ(truth.ToJson(), data.truth.ToJson());
}

TEST(SyntheticGeometryTest, OneCellPerCounty) {
  const auto& table = testing::SmallSynthetic().table;
  const nlohmann::json geo = SyntheticGeometry(table);
  EXPECT_EQ(geo["type"], "FeatureCollection");
  EXPECT_EQ(geo["features"].size(), table.size());
}

}  // namespace
}  // namespace sitrep
