#ifndef SITREP_MODEL_H_
#define SITREP_MODEL_H_

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>

#include "sitrep/severity.h"

namespace sitrep {

struct Prediction {
  SeverityClass label = SeverityClass::kLow;
  std::array<double, 3> probabilities{};
};

// Argmax with ties resolved toward the lower class.
Prediction PredictionFromProbabilities(const std::array<double, 3>& p);

// Any severity predictor over a full feature vector. Attribution and recourse
// only see models through this interface.
class SeverityModel {
 public:
  virtual ~SeverityModel() = default;

  virtual std::size_t input_size() const = 0;
  virtual Prediction Predict(std::span<const double> features) const = 0;

  // Prediction after replacing the `changed` entries of `factual` with the
  // corresponding entries of `modified`. Flat classifiers simply score
  // `modified`; causal models treat the change as an intervention.
  virtual Prediction PredictWithChanges(std::span<const double> factual,
                                        std::span<const double> modified,
                                        std::span<const std::size_t> changed) const;
};

// Adapts a plain function, used for desk models and test fixtures.
class FunctionModel : public SeverityModel {
 public:
  using Fn = std::function<Prediction(std::span<const double>)>;

  FunctionModel(std::size_t input_size, Fn fn)
      : input_size_(input_size), fn_(std::move(fn)) {}

  std::size_t input_size() const override { return input_size_; }
  Prediction Predict(std::span<const double> features) const override;

 private:
  std::size_t input_size_;
  Fn fn_;
};

// Prediction with all mass on one class.
Prediction CertainPrediction(SeverityClass c);

}  // namespace sitrep

#endif  // SITREP_MODEL_H_
