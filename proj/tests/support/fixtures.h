#ifndef SITREP_TESTS_FIXTURES_H_
#define SITREP_TESTS_FIXTURES_H_

#include <filesystem>
#include <map>
#include <span>
#include <memory>
#include <string>
#include <vector>

#include "sitrep/dag.h"
#include "sitrep/mlp.h"
#include "sitrep/model.h"
#include "sitrep/scm.h"
#include "sitrep/service.h"
#include "sitrep/synthetic.h"

namespace sitrep::testing {

// 300 records from the default generator (dag2 ground truth, seed 7).
const SyntheticData& SmallSynthetic();

// One hidden layer of 16, 30 epochs. Enough for structural tests.
TrainConfig FastTrainConfig();

// Fitted on SmallSynthetic with FastTrainConfig; cached per dag name.
std::shared_ptr<const StructuralModel> SmallScm(const std::string& dag);
std::shared_ptr<const MlpModel> SmallClassifier();

// AppState over SmallSynthetic with dag1..dag3 and grid geometry; small
// attribution and recourse budgets.
std::shared_ptr<AppState> SmallAppState();

// Schema of `n` satellite-style features "x1".."xn" in a single group.
FeatureSchema DeskSchema(std::size_t n);

// High iff x1 + x2 > threshold, Low otherwise.
FunctionModel DeskModel(double threshold = 10.0);

// Model whose prediction never changes.
FunctionModel ConstantModel(std::size_t width, SeverityClass c);

// Propagates the generator's own equations with zero noise, pinning the
// `forced` nodes. Independent of the fitted SCM.
std::vector<double> HandPropagate(const GroundTruth& truth, const FeatureSchema& schema,
                                  const FeatureDag& dag, std::span<const double> factual,
                                  const std::map<std::size_t, double>& forced);

// Removes the directory on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string File(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace sitrep::testing

#endif  // SITREP_TESTS_FIXTURES_H_
