#include "sitrep/model.h"

#include <string>

#include "sitrep/error.h"

namespace sitrep {

Prediction PredictionFromProbabilities(const std::array<double, 3>& p) {
  int best = 0;
  for (int c = 1; c < kNumSeverityClasses; ++c) {
    if (p[c] > p[best]) best = c;
  }
  return {ClassFromIndex(best), p};
}

Prediction SeverityModel::PredictWithChanges(
    std::span<const double>, std::span<const double> modified,
    std::span<const std::size_t>) const {
  return Predict(modified);
}

Prediction FunctionModel::Predict(std::span<const double> features) const {
  if (features.size() != input_size_) {
    throw ValidationError("model expects " + std::to_string(input_size_) +
                          " features, got " + std::to_string(features.size()));
  }
  return fn_(features);
}

Prediction CertainPrediction(SeverityClass c) {
  Prediction p;
  p.label = c;
  p.probabilities[ClassIndex(c)] = 1.0;
  return p;
}

}  // namespace sitrep
