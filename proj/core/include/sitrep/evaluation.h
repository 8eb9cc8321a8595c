#ifndef SITREP_EVALUATION_H_
#define SITREP_EVALUATION_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/dataset.h"
#include "sitrep/mlp.h"
#include "sitrep/model.h"
#include "sitrep/split.h"

namespace sitrep {

// confusion[truth][predicted]
using ConfusionMatrix = std::array<std::array<std::int64_t, 3>, 3>;

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators score 0, so a class absent from both truth and
// predictions contributes F1 = 0.
std::array<ClassScores, 3> PerClassScores(const ConfusionMatrix& confusion);
double MacroF1(const ConfusionMatrix& confusion);

struct EvalReport {
  std::vector<double> fold_macro_f1;
  double mean_macro_f1 = 0.0;
  std::array<ClassScores, 3> per_class{};  // from the pooled confusion matrix
  ConfusionMatrix confusion{};              // pooled over folds

  nlohmann::json ToJson() const;
};

using ModelTrainer =
    std::function<std::unique_ptr<SeverityModel>(const DatasetTable& train)>;

// Trains on k-1 folds and scores the held-out fold, for every fold. Throws
// ValidationError when the plan does not match the table.
EvalReport EvaluateMacroF1(const DatasetTable& table, const SplitPlan& plan,
                           const ModelTrainer& trainer);
EvalReport EvaluateMacroF1(const DatasetTable& table, const SplitPlan& plan,
                           const TrainConfig& config);

}  // namespace sitrep

#endif  // SITREP_EVALUATION_H_
