#include "support/fixtures.h"

#include <algorithm>
#include <map>
#include <mutex>
#include <random>

#include "sitrep/dag.h"
#include "sitrep/geometry.h"

namespace sitrep::testing {

const SyntheticData& SmallSynthetic() {
  static const SyntheticData data = [] {
    SyntheticConfig config;
    config.counties = 300;
    return GenerateSynthetic(config);
  }();
  return data;
}

TrainConfig FastTrainConfig() {
  TrainConfig config;
  config.hidden_layers = {16};
  config.epochs = 30;
  return config;
}

std::shared_ptr<const StructuralModel> SmallScm(const std::string& dag) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const StructuralModel>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[dag];
  if (!slot) {
    const auto& table = SmallSynthetic().table;
    slot = std::make_shared<StructuralModel>(
        FitScm(table, ExpandDag(BuiltinDag(dag), table.schema()), FastTrainConfig()));
  }
  return slot;
}

std::shared_ptr<const MlpModel> SmallClassifier() {
  static const auto model = std::make_shared<const MlpModel>(
      TrainClassifier(SmallSynthetic().table, FastTrainConfig()));
  return model;
}

std::shared_ptr<AppState> SmallAppState() {
  const auto& table = SmallSynthetic().table;
  ServiceDefaults defaults;
  defaults.attribution_samples = 100;
  defaults.search.population = 60;
  defaults.search.generations = 15;
  return MakeAppState(table, ParseGeometries(SyntheticGeometry(table)), SmallClassifier(),
                      {{"dag2", SmallScm("dag2")}, {"dag3", SmallScm("dag3")}}, defaults);
}

FeatureSchema DeskSchema(std::size_t n) {
  std::vector<FeatureDescriptor> features;
  std::map<std::string, std::string> assignment;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string name = "x" + std::to_string(i);
    features.push_back({name, Source::kSatellite, "", Unit::kSquareMeters});
    assignment[name] = "all";
  }
  return FeatureSchema(std::move(features), GroupManifest({{"all", "All"}}, assignment));
}

FunctionModel DeskModel(double threshold) {
  return FunctionModel(2, [threshold](std::span<const double> x) {
    return CertainPrediction(x[0] + x[1] > threshold ? SeverityClass::kHigh
                                                     : SeverityClass::kLow);
  });
}

FunctionModel ConstantModel(std::size_t width, SeverityClass c) {
  return FunctionModel(width, [c](std::span<const double>) { return CertainPrediction(c); });
}

std::vector<double> HandPropagate(const GroundTruth& truth, const FeatureSchema& schema,
                                  const FeatureDag& dag, std::span<const double> factual,
                                  const std::map<std::size_t, double>& forced) {
  std::vector<double> v(factual.begin(), factual.end());
  for (std::size_t node : dag.topological_order()) {
    if (node == dag.severity_node()) continue;
    if (auto it = forced.find(node); it != forced.end()) {
      v[node] = it->second;
      continue;
    }
    const auto& eq = truth.equations[node];
    if (eq.root) continue;
    double x = eq.intercept;
    for (const auto& [parent, coef] : eq.coefficients) x += coef * v[schema.IndexOf(parent)];
    v[node] = std::max(0.0, x);
  }
  return v;
}

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  path_ = std::filesystem::temp_directory_path() /
          ("sitrep-test-" + std::to_string(rng()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace sitrep::testing
