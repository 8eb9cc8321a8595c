#include "sitrep/evaluation.h"

#include <string>

#include "sitrep/error.h"

namespace sitrep {

std::array<ClassScores, 3> PerClassScores(const ConfusionMatrix& confusion) {
  std::array<ClassScores, 3> out{};
  for (int c = 0; c < 3; ++c) {
    std::int64_t tp = confusion[c][c], fp = 0, fn = 0;
    for (int o = 0; o < 3; ++o) {
      if (o == c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
    }
    auto ratio = [](std::int64_t num, std::int64_t den) {
      return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    out[c].precision = ratio(tp, tp + fp);
    out[c].recall = ratio(tp, tp + fn);
    out[c].f1 = ratio(2 * tp, 2 * tp + fp + fn);
  }
  return out;
}

double MacroF1(const ConfusionMatrix& confusion) {
  const auto scores = PerClassScores(confusion);
  return (scores[0].f1 + scores[1].f1 + scores[2].f1) / 3.0;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json classes = nlohmann::json::object();
  for (SeverityClass c : kAllSeverityClasses) {
    const auto& s = per_class[ClassIndex(c)];
    classes[std::string(SeverityName(c))] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  return {{"fold_macro_f1", fold_macro_f1},
          {"mean_macro_f1", mean_macro_f1},
          {"per_class", classes},
          {"confusion", confusion}};
}

EvalReport EvaluateMacroF1(const DatasetTable& table, const SplitPlan& plan,
                           const ModelTrainer& trainer) {
  if (plan.fold_of.size() != table.size()) {
    throw ValidationError("split plan covers " + std::to_string(plan.fold_of.size()) +
                          " records, table has " + std::to_string(table.size()));
  }
  if (plan.k < 2) throw ValidationError("split plan must have k >= 2");
  for (int f : plan.fold_of) {
    if (f < 0 || f >= plan.k) throw ValidationError("split plan has an invalid fold id");
  }
  if (!table.fully_labeled()) throw ValidationError("evaluation requires labels");

  EvalReport report;
  for (int fold = 0; fold < plan.k; ++fold) {
    const auto train_idx = plan.TrainIndices(fold);
    const auto test_idx = plan.TestIndices(fold);
    auto model = trainer(table.Subset(train_idx));
    ConfusionMatrix cm{};
    for (std::size_t i : test_idx) {
      const int truth = ClassIndex(*table.label(i));
      const int pred = ClassIndex(model->Predict(table.features(i)).label);
      ++cm[truth][pred];
      ++report.confusion[truth][pred];
    }
    report.fold_macro_f1.push_back(MacroF1(cm));
  }
  double sum = 0.0;
  for (double f : report.fold_macro_f1) sum += f;
  report.mean_macro_f1 = sum / static_cast<double>(report.fold_macro_f1.size());
  report.per_class = PerClassScores(report.confusion);
  return report;
}

EvalReport EvaluateMacroF1(const DatasetTable& table, const SplitPlan& plan,
                           const TrainConfig& config) {
  return EvaluateMacroF1(table, plan, [&config](const DatasetTable& train) {
    return std::make_unique<ClassifierModel>(
        std::make_shared<const MlpModel>(TrainClassifier(train, config)));
  });
}

}  // namespace sitrep
