#ifndef SITREP_MLP_H_
#define SITREP_MLP_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/dataset.h"
#include "sitrep/model.h"
#include "sitrep/standardizer.h"

namespace sitrep {

struct TrainConfig {
  std::vector<int> hidden_layers = {64, 64};
  double learning_rate = 0.05;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 42;

  // Throws ConfigError unless every field is positive.
  void Validate() const;

  // Four hidden layers, i.e. five weight layers.
  static TrainConfig FiveLayerPreset();

  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

// Fully connected layer; `weights` is outputs x inputs, row-major.
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

// Feed-forward classifier: standardizer, ReLU hidden layers, softmax over the
// three severity classes.
class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(std::vector<DenseLayer> layers, Standardizer standardizer,
           std::uint64_t seed, std::string schema_hash = {});

  // He-normal weights, zero biases.
  static MlpModel Initialize(int input_size, std::span<const int> hidden,
                             Standardizer standardizer, std::uint64_t seed);

  std::size_t input_size() const;
  std::vector<int> LayerSizes() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  const Standardizer& standardizer() const { return standardizer_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& schema_hash() const { return schema_hash_; }
  void set_schema_hash(std::string hash) { schema_hash_ = std::move(hash); }

  // Throws ValidationError on a length mismatch or a non-finite value.
  Prediction Predict(std::span<const double> features) const;
  // Forward pass on inputs that are already standardized.
  std::array<double, 3> ProbabilitiesStandardized(std::span<const double> z) const;

  nlohmann::json ToJson() const;
  static MlpModel FromJson(const nlohmann::json& j);
  void Save(const std::string& path) const;
  static MlpModel Load(const std::string& path);

 private:
  std::vector<DenseLayer> layers_;
  Standardizer standardizer_;
  std::uint64_t seed_ = 0;
  std::string schema_hash_;
};

// SeverityModel view of a trained classifier over the full schema.
class ClassifierModel : public SeverityModel {
 public:
  explicit ClassifierModel(std::shared_ptr<const MlpModel> model)
      : model_(std::move(model)) {}

  std::size_t input_size() const override { return model_->input_size(); }
  Prediction Predict(std::span<const double> features) const override {
    return model_->Predict(features);
  }
  const MlpModel& mlp() const { return *model_; }

 private:
  std::shared_ptr<const MlpModel> model_;
};

// Inputs in standardized space.
struct Batch {
  std::vector<std::vector<double>> inputs;
  std::vector<SeverityClass> labels;
};

// Mean cross-entropy over the batch.
double CrossEntropyLoss(const MlpModel& model, const Batch& batch);

// Analytic gradients of CrossEntropyLoss, shaped like model.layers().
std::vector<DenseLayer> LossGradients(const MlpModel& model, const Batch& batch);

using GradientFn =
    std::function<std::vector<DenseLayer>(const MlpModel&, const Batch&)>;

struct GradientCheckOptions {
  double step = 1e-5;
  int max_parameters = 256;
  std::uint64_t seed = 0;
  bool include_biases = true;
};

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-6) over a
// seeded sample of parameters, using central differences.
double GradientCheck(const MlpModel& model, const Batch& batch,
                     const GradientCheckOptions& options = {},
                     const GradientFn& gradients = LossGradients);

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_history;  // training loss before epoch 1, then per epoch
};

// Mini-batch gradient descent with a fixed learning rate. Rows are put in a
// canonical order first, so the result does not depend on input order.
TrainResult TrainMlp(std::span<const std::vector<double>> rows,
                     std::span<const SeverityClass> labels,
                     const TrainConfig& config);

// Trains on every feature of a labeled table. Throws TrainingError for an
// empty or partially labeled table or when a severity class is missing.
MlpModel TrainClassifier(const DatasetTable& table, const TrainConfig& config);

}  // namespace sitrep

#endif  // SITREP_MLP_H_
