#include "sitrep/mlp.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "sitrep/error.h"

namespace sitrep {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMatrix>;
using ConstBias = Eigen::Map<const Eigen::VectorXd>;

constexpr int kFormatVersion = 1;

std::array<double, 3> Softmax(const double* logits) {
  const double m = std::max({logits[0], logits[1], logits[2]});
  std::array<double, 3> p;
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    p[c] = std::exp(logits[c] - m);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  return p;
}

RowMatrix BatchMatrix(const Batch& batch) {
  const auto n = static_cast<Eigen::Index>(batch.inputs.size());
  const auto d = n ? static_cast<Eigen::Index>(batch.inputs[0].size()) : 0;
  RowMatrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(batch.inputs[i].data(), d);
  }
  return x;
}

// Forward pass keeping pre-activations; returns logits.
RowMatrix Forward(const std::vector<DenseLayer>& layers, const RowMatrix& x,
                  std::vector<RowMatrix>* activations,
                  std::vector<RowMatrix>* pre) {
  RowMatrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    ConstWeights w(layer.weights.data(), layer.outputs, layer.inputs);
    ConstBias b(layer.bias.data(), layer.outputs);
    if (activations) activations->push_back(a);
    RowMatrix z = a * w.transpose();
    z.rowwise() += b.transpose();
    if (pre) pre->push_back(z);
    a = (l + 1 < layers.size()) ? RowMatrix(z.cwiseMax(0.0)) : z;
  }
  return a;
}

double MeanCrossEntropy(const RowMatrix& logits,
                        std::span<const SeverityClass> labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, ClassIndex(labels[static_cast<std::size_t>(i)]));
  }
  return total / static_cast<double>(logits.rows());
}

std::vector<DenseLayer> Backward(const std::vector<DenseLayer>& layers,
                                 const RowMatrix& x,
                                 std::span<const SeverityClass> labels) {
  std::vector<RowMatrix> activations, pre;
  RowMatrix logits = Forward(layers, x, &activations, &pre);
  const auto n = logits.rows();
  RowMatrix delta(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto p = Softmax(logits.row(i).data());
    for (int c = 0; c < 3; ++c) delta(i, c) = p[c];
    delta(i, ClassIndex(labels[static_cast<std::size_t>(i)])) -= 1.0;
  }
  delta /= static_cast<double>(n);

  std::vector<DenseLayer> grads(layers.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    auto& g = grads[l];
    g.inputs = layer.inputs;
    g.outputs = layer.outputs;
    RowMatrix dw = delta.transpose() * activations[l];
    g.weights.assign(dw.data(), dw.data() + dw.size());
    Eigen::VectorXd db = delta.colwise().sum().transpose();
    g.bias.assign(db.data(), db.data() + db.size());
    if (l > 0) {
      ConstWeights w(layer.weights.data(), layer.outputs, layer.inputs);
      RowMatrix upstream = delta * w;
      delta = upstream.cwiseProduct(
          RowMatrix((pre[l - 1].array() > 0.0).cast<double>()));
    }
  }
  return grads;
}

nlohmann::json LayerJson(const DenseLayer& l) {
  return {{"inputs", l.inputs},
          {"outputs", l.outputs},
          {"weights", l.weights},
          {"bias", l.bias}};
}

DenseLayer LayerFromJson(const nlohmann::json& j) {
  DenseLayer l;
  l.inputs = j.at("inputs").get<int>();
  l.outputs = j.at("outputs").get<int>();
  l.weights = j.at("weights").get<std::vector<double>>();
  l.bias = j.at("bias").get<std::vector<double>>();
  return l;
}

}  // namespace

void TrainConfig::Validate() const {
  if (hidden_layers.empty()) throw ConfigError("at least one hidden layer is required");
  for (int h : hidden_layers) {
    if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
}

TrainConfig TrainConfig::FiveLayerPreset() {
  TrainConfig c;
  c.hidden_layers = {64, 64, 64, 64};
  return c;
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"hidden_layers", hidden_layers}, {"learning_rate", learning_rate},
          {"epochs", epochs},               {"batch_size", batch_size},
          {"seed", seed}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed training config: ") + e.what());
  }
  c.Validate();
  return c;
}

MlpModel::MlpModel(std::vector<DenseLayer> layers, Standardizer standardizer,
                   std::uint64_t seed, std::string schema_hash)
    : layers_(std::move(layers)),
      standardizer_(std::move(standardizer)),
      seed_(seed),
      schema_hash_(std::move(schema_hash)) {
  if (layers_.empty()) throw ConfigError("an MLP needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.inputs <= 0 || layer.outputs <= 0 ||
        layer.weights.size() != static_cast<std::size_t>(layer.inputs) *
                                    static_cast<std::size_t>(layer.outputs) ||
        layer.bias.size() != static_cast<std::size_t>(layer.outputs)) {
      throw ConfigError("layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (l > 0 && layer.inputs != layers_[l - 1].outputs) {
      throw ConfigError("layer " + std::to_string(l) + " input width mismatch");
    }
  }
  if (layers_.back().outputs != kNumSeverityClasses) {
    throw ConfigError("the output layer must have 3 units");
  }
  if (standardizer_.size() != static_cast<std::size_t>(layers_.front().inputs)) {
    throw ConfigError("standardizer width does not match the input layer");
  }
}

MlpModel MlpModel::Initialize(int input_size, std::span<const int> hidden,
                              Standardizer standardizer, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> sizes = {input_size};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(kNumSeverityClasses);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.inputs = sizes[l];
    layer.outputs = sizes[l + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / layer.inputs));
    layer.weights.resize(static_cast<std::size_t>(layer.inputs) * layer.outputs);
    for (double& w : layer.weights) w = normal(rng);
    layer.bias.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers), std::move(standardizer), seed);
}

std::size_t MlpModel::input_size() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().inputs);
}

std::vector<int> MlpModel::LayerSizes() const {
  std::vector<int> sizes;
  if (layers_.empty()) return sizes;
  sizes.push_back(layers_.front().inputs);
  for (const auto& l : layers_) sizes.push_back(l.outputs);
  return sizes;
}

std::array<double, 3> MlpModel::ProbabilitiesStandardized(
    std::span<const double> z) const {
  std::vector<double> a(z.begin(), z.end()), next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    next.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    for (int o = 0; o < layer.outputs; ++o) {
      const double* row = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      double s = layer.bias[static_cast<std::size_t>(o)];
      for (int i = 0; i < layer.inputs; ++i) s += row[i] * a[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] =
          (l + 1 < layers_.size()) ? std::max(0.0, s) : s;
    }
    a.swap(next);
  }
  return Softmax(a.data());
}

Prediction MlpModel::Predict(std::span<const double> features) const {
  if (features.size() != input_size()) {
    throw ValidationError("classifier expects " + std::to_string(input_size()) +
                          " features, got " + std::to_string(features.size()));
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw ValidationError("feature values must be finite");
  }
  return PredictionFromProbabilities(
      ProbabilitiesStandardized(standardizer_.Transform(features)));
}

nlohmann::json MlpModel::ToJson() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) layers.push_back(LayerJson(l));
  return {{"format", "sitrep.mlp"},
          {"version", kFormatVersion},
          {"layer_sizes", LayerSizes()},
          {"layers", layers},
          {"standardizer", standardizer_.ToJson()},
          {"seed", seed_},
          {"schema_hash", schema_hash_}};
}

MlpModel MlpModel::FromJson(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "sitrep.mlp") {
      throw ConfigError("not an MLP checkpoint");
    }
    if (j.value("version", 0) != kFormatVersion) {
      throw ConfigError("unsupported MLP checkpoint version");
    }
    std::vector<DenseLayer> layers;
    for (const auto& l : j.at("layers")) layers.push_back(LayerFromJson(l));
    return MlpModel(std::move(layers), Standardizer::FromJson(j.at("standardizer")),
                    j.at("seed").get<std::uint64_t>(),
                    j.value("schema_hash", std::string()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed MLP checkpoint: ") + e.what());
  }
}

void MlpModel::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << ToJson().dump() << '\n';
}

MlpModel MlpModel::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  try {
    return FromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
}

double CrossEntropyLoss(const MlpModel& model, const Batch& batch) {
  if (batch.inputs.empty()) throw ValidationError("empty batch");
  return MeanCrossEntropy(Forward(model.layers(), BatchMatrix(batch), nullptr, nullptr),
                          batch.labels);
}

std::vector<DenseLayer> LossGradients(const MlpModel& model, const Batch& batch) {
  if (batch.inputs.empty()) throw ValidationError("empty batch");
  return Backward(model.layers(), BatchMatrix(batch), batch.labels);
}

double GradientCheck(const MlpModel& model, const Batch& batch,
                     const GradientCheckOptions& options,
                     const GradientFn& gradients) {
  if (batch.inputs.empty()) throw ValidationError("gradient check needs a nonempty batch");
  const auto analytic = gradients(model, batch);

  struct Param {
    std::size_t layer;
    bool bias;
    std::size_t index;
  };
  std::vector<Param> params;
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& layer = model.layers()[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) params.push_back({l, false, i});
    if (options.include_biases) {
      for (std::size_t i = 0; i < layer.bias.size(); ++i) params.push_back({l, true, i});
    }
  }
  std::mt19937_64 rng(options.seed);
  std::shuffle(params.begin(), params.end(), rng);
  if (options.max_parameters > 0 &&
      params.size() > static_cast<std::size_t>(options.max_parameters)) {
    params.resize(static_cast<std::size_t>(options.max_parameters));
  }

  MlpModel probe = model;
  double worst = 0.0;
  for (const auto& p : params) {
    auto& layer = probe.mutable_layers()[p.layer];
    double& slot = p.bias ? layer.bias[p.index] : layer.weights[p.index];
    const double original = slot;
    slot = original + options.step;
    const double up = CrossEntropyLoss(probe, batch);
    slot = original - options.step;
    const double down = CrossEntropyLoss(probe, batch);
    slot = original;
    const double numeric = (up - down) / (2.0 * options.step);
    const auto& g = analytic[p.layer];
    const double exact = p.bias ? g.bias[p.index] : g.weights[p.index];
    const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(exact - numeric) / denom);
  }
  return worst;
}

TrainResult TrainMlp(std::span<const std::vector<double>> rows,
                     std::span<const SeverityClass> labels,
                     const TrainConfig& config) {
  config.Validate();
  if (rows.empty()) throw TrainingError("cannot train on an empty table");
  if (rows.size() != labels.size()) throw TrainingError("rows and labels differ in length");
  std::array<std::size_t, 3> counts{};
  for (auto c : labels) ++counts[ClassIndex(c)];
  for (SeverityClass c : kAllSeverityClasses) {
    if (counts[ClassIndex(c)] == 0) {
      throw TrainingError("training data has no " + std::string(SeverityName(c)) +
                          " records");
    }
  }
  const std::size_t width = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != width) throw TrainingError("ragged training rows");
  }

  // Canonical order: by label, then lexicographically by features.
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    return rows[a] < rows[b];
  });
  std::vector<std::vector<double>> sorted_rows;
  std::vector<SeverityClass> sorted_labels;
  sorted_rows.reserve(rows.size());
  for (std::size_t i : order) {
    sorted_rows.push_back(rows[i]);
    sorted_labels.push_back(labels[i]);
  }

  Standardizer standardizer = Standardizer::Fit(sorted_rows);
  const auto n = static_cast<Eigen::Index>(sorted_rows.size());
  RowMatrix x(n, static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto z = standardizer.Transform(sorted_rows[static_cast<std::size_t>(i)]);
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(z.data(), static_cast<Eigen::Index>(width));
  }

  TrainResult result{MlpModel::Initialize(static_cast<int>(width), config.hidden_layers,
                                          standardizer, config.seed),
                     {}};
  auto& layers = result.model.mutable_layers();
  result.loss_history.push_back(
      MeanCrossEntropy(Forward(layers, x, nullptr, nullptr), sorted_labels));

  std::mt19937_64 rng(config.seed ^ 0x5851f42d4c957f2dull);
  std::vector<std::size_t> perm(sorted_rows.size());
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size),
                                                  perm.size());
  RowMatrix xb;
  std::vector<SeverityClass> yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < perm.size()) std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < perm.size(); start += batch) {
      const std::size_t end = std::min(perm.size(), start + batch);
      xb.resize(static_cast<Eigen::Index>(end - start), x.cols());
      yb.clear();
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = x.row(static_cast<Eigen::Index>(perm[k]));
        yb.push_back(sorted_labels[perm[k]]);
      }
      const auto grads = Backward(layers, xb, yb);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
          layers[l].weights[i] -= config.learning_rate * grads[l].weights[i];
        }
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
          layers[l].bias[i] -= config.learning_rate * grads[l].bias[i];
        }
      }
    }
    result.loss_history.push_back(
        MeanCrossEntropy(Forward(layers, x, nullptr, nullptr), sorted_labels));
  }
  return result;
}

MlpModel TrainClassifier(const DatasetTable& table, const TrainConfig& config) {
  if (table.empty()) throw TrainingError("cannot train on an empty table");
  if (!table.fully_labeled()) {
    throw TrainingError("training requires damage_dollars on every record");
  }
  std::vector<std::vector<double>> rows;
  std::vector<SeverityClass> labels;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    rows.push_back(table.record(i).features);
    labels.push_back(*table.label(i));
  }
  MlpModel model = TrainMlp(rows, labels, config).model;
  model.set_schema_hash(table.schema().Hash());
  return model;
}

}  // namespace sitrep
