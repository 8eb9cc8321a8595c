#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sitrep/dag.h"
#include "sitrep/mlp.h"
#include "sitrep/schema.h"
#include "sitrep/service.h"
#include "sitrep/synthetic.h"

namespace sitrep {
namespace {

nlohmann::json ReadConfig(const std::string& name) {
  std::ifstream in(std::string(SITREP_CONFIG_DIR) + "/" + name);
  EXPECT_TRUE(in.good()) << name;
  return nlohmann::json::parse(in);
}

TEST(ShippedConfigTest, MatchesBuiltInDefaults) {
  EXPECT_EQ(GroupManifest::FromJson(ReadConfig("default_manifest.json")).ToJson(),
            DefaultManifest().ToJson());
  EXPECT_EQ(ReadConfig("schema.json"), DefaultSchema().ToJson());
  EXPECT_EQ(TrainConfig::FromJson(ReadConfig("train_default.json")).ToJson(),
            TrainConfig{}.ToJson());
  EXPECT_EQ(TrainConfig::FromJson(ReadConfig("train_five_layer.json")).ToJson(),
            TrainConfig::FiveLayerPreset().ToJson());
  EXPECT_EQ(SyntheticConfig::FromJson(ReadConfig("synth_default.json")).ToJson(),
            SyntheticConfig{}.ToJson());
  EXPECT_EQ(SyntheticConfig::FromJson(ReadConfig("synth_separable.json")).ToJson(),
            SyntheticConfig::Separable().ToJson());
  EXPECT_EQ(ServiceDefaults::FromJson(ReadConfig("service_defaults.json")).ToJson(),
            ServiceDefaults{}.ToJson());
}

TEST(ShippedConfigTest, DagFilesMatchBuiltIns) {
  for (const auto& dag : BuiltinDags()) {
    const auto loaded = CausalDag::FromJson(ReadConfig("dags/" + dag.name() + ".json"));
    EXPECT_EQ(loaded.ToJson(), dag.ToJson()) << dag.name();
  }
}

}  // namespace
}  // namespace sitrep
