#include <benchmark/benchmark.h>

#include <memory>

#include "sitrep/attribution.h"
#include "sitrep/dag.h"
#include "sitrep/feature_space.h"
#include "sitrep/mlp.h"
#include "sitrep/recourse.h"
#include "sitrep/scm.h"
#include "sitrep/synthetic.h"

namespace {

struct World {
  sitrep::SyntheticData data;
  std::shared_ptr<const sitrep::MlpModel> mlp;
  std::shared_ptr<const sitrep::StructuralModel> scm;
  sitrep::FeatureSpace space;
};

const World& GetWorld() {
  static const World world = [] {
    sitrep::SyntheticConfig config;
    config.counties = 600;
    World w{sitrep::GenerateSynthetic(config), nullptr, nullptr, {}};
    sitrep::TrainConfig train;
    train.epochs = 20;
    w.mlp = std::make_shared<sitrep::MlpModel>(sitrep::TrainClassifier(w.data.table, train));
    w.scm = std::make_shared<sitrep::StructuralModel>(sitrep::FitScm(
        w.data.table,
        sitrep::ExpandDag(sitrep::BuiltinDag("dag2"), w.data.table.schema()), train));
    w.space = sitrep::FeatureSpace::FromTable(w.data.table);
    return w;
  }();
  return world;
}

void BM_ClassifierPredict(benchmark::State& state) {
  const World& w = GetWorld();
  const auto x = w.data.table.features(0);
  for (auto _ : state) benchmark::DoNotOptimize(w.mlp->Predict(x));
}
BENCHMARK(BM_ClassifierPredict);

void BM_Counterfactual(benchmark::State& state) {
  const World& w = GetWorld();
  const auto x = w.data.table.features(0);
  const std::vector<std::pair<std::size_t, double>> iv = {
      {w.data.table.schema().IndexOf("sat_built_to_water"), 5e4}};
  for (auto _ : state) benchmark::DoNotOptimize(w.scm->Counterfactual(x, iv));
}
BENCHMARK(BM_Counterfactual);

void BM_NecessityReport(benchmark::State& state) {
  const World& w = GetWorld();
  const sitrep::ClassifierModel model(w.mlp);
  sitrep::AttributionOptions options;
  options.samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sitrep::ComputeNecessityReport(
        model, w.space, w.data.table.features(0), sitrep::AttributionLevel::kFeature, options));
  }
}
BENCHMARK(BM_NecessityReport)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Recourse(benchmark::State& state) {
  const World& w = GetWorld();
  const sitrep::ClassifierModel model(w.mlp);
  sitrep::RecourseRequest request;
  const auto x = w.data.table.features(0);
  request.features.assign(x.begin(), x.end());
  const auto current = model.Predict(x).label;
  request.desired = current == sitrep::SeverityClass::kLow ? sitrep::SeverityClass::kHigh
                                                           : sitrep::SeverityClass::kLow;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sitrep::GenerateRecourse(model, w.space, request));
  }
}
BENCHMARK(BM_Recourse)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
