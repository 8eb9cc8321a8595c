#include "sitrep/scm.h"

#include <cmath>
#include <fstream>
#include <optional>

#include <Eigen/Dense>

#include "sitrep/error.h"

namespace sitrep {

namespace {

constexpr int kFormatVersion = 1;

NodeModel FitNode(const DatasetTable& table, std::size_t node,
                  const std::vector<std::size_t>& parents) {
  NodeModel m;
  m.name = table.schema().feature(node).name;
  m.parents = parents;
  const auto n = static_cast<Eigen::Index>(table.size());
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = table.features(static_cast<std::size_t>(i))[node];

  if (parents.empty()) {
    m.intercept = y.mean();
    m.residual_scale = std::sqrt((y.array() - m.intercept).square().mean());
    return m;
  }

  const auto p = static_cast<Eigen::Index>(parents.size());
  Eigen::MatrixXd x(n, p + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = table.features(static_cast<std::size_t>(i));
    x(i, 0) = 1.0;
    for (Eigen::Index k = 0; k < p; ++k) x(i, k + 1) = row[parents[static_cast<std::size_t>(k)]];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::VectorXd beta;
  if (qr.rank() == p + 1) {
    beta = qr.solve(y);
  } else {
    // Centred ridge so the intercept is not shrunk.
    m.ridge_fallback = true;
    Eigen::RowVectorXd mean_x = x.rightCols(p).colwise().mean();
    const double mean_y = y.mean();
    Eigen::MatrixXd xc = x.rightCols(p).rowwise() - mean_x;
    Eigen::VectorXd yc = y.array() - mean_y;
    Eigen::MatrixXd gram = xc.transpose() * xc;
    gram.diagonal().array() += kRidgeLambda;
    Eigen::VectorXd coef = gram.ldlt().solve(xc.transpose() * yc);
    beta.resize(p + 1);
    beta(0) = mean_y - mean_x.dot(coef);
    beta.tail(p) = coef;
  }
  if (!beta.allFinite()) {
    throw TrainingError("least squares for node '" + m.name + "' produced non-finite coefficients");
  }
  m.intercept = beta(0);
  m.coefficients.assign(beta.data() + 1, beta.data() + beta.size());
  const Eigen::VectorXd residual = y - x * beta;
  m.residual_scale = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
  return m;
}

}  // namespace

double NodeModel::Expected(std::span<const double> values) const {
  double v = intercept;
  for (std::size_t k = 0; k < parents.size(); ++k) v += coefficients[k] * values[parents[k]];
  return v;
}

std::vector<std::pair<std::size_t, double>> ResolveInterventions(
    const FeatureSchema& schema, const InterventionSet& interventions) {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& [name, value] : interventions) {
    if (name == kSeverityNode) {
      throw ValidationError("severity cannot be an intervention target", name);
    }
    const std::size_t idx = schema.IndexOf(name);
    if (!std::isfinite(value)) {
      throw ValidationError("intervention on " + name + " must be finite", name);
    }
    if (value < 0.0) {
      throw ValidationError("intervention on " + name + " must be >= 0, got " +
                                FormatDouble(value),
                            name);
    }
    out.emplace_back(idx, value);
  }
  return out;
}

StructuralModel::StructuralModel(FeatureSchema schema, FeatureDag dag,
                                 std::vector<NodeModel> nodes, MlpModel classifier,
                                 std::uint64_t seed)
    : schema_(std::move(schema)),
      dag_(std::move(dag)),
      nodes_(std::move(nodes)),
      classifier_(std::move(classifier)),
      seed_(seed) {
  if (dag_.feature_count() != schema_.size() || nodes_.size() != schema_.size()) {
    throw ConfigError("structural model does not cover every schema feature");
  }
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    if (nodes_[j].parents != dag_.parents(j) ||
        nodes_[j].coefficients.size() != nodes_[j].parents.size()) {
      throw ConfigError("node model '" + nodes_[j].name + "' does not match the dag");
    }
  }
  if (classifier_.input_size() != severity_parents().size()) {
    throw ConfigError("severity classifier width does not match its parent count");
  }
}

void StructuralModel::CheckFeatures(std::span<const double> features) const {
  if (features.size() != nodes_.size()) {
    throw ValidationError("record has " + std::to_string(features.size()) +
                          " features, model expects " + std::to_string(nodes_.size()));
  }
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (!std::isfinite(features[j])) {
      throw ValidationError("feature " + nodes_[j].name + " is not finite", nodes_[j].name);
    }
  }
}

Prediction StructuralModel::ObservationalPredict(std::span<const double> features) const {
  CheckFeatures(features);
  const auto& parents = severity_parents();
  std::vector<double> x(parents.size());
  for (std::size_t k = 0; k < parents.size(); ++k) x[k] = features[parents[k]];
  return classifier_.Predict(x);
}

std::vector<double> StructuralModel::Abduct(std::span<const double> features) const {
  CheckFeatures(features);
  std::vector<double> noise(nodes_.size());
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    noise[j] = features[j] - nodes_[j].Expected(features);
  }
  return noise;
}

CounterfactualResult StructuralModel::Counterfactual(
    std::span<const double> features, const InterventionSet& interventions) const {
  const auto resolved = ResolveInterventions(schema_, interventions);
  auto result = Counterfactual(features, resolved);
  result.interventions = interventions;
  return result;
}

CounterfactualResult StructuralModel::Counterfactual(
    std::span<const double> features,
    std::span<const std::pair<std::size_t, double>> interventions) const {
  CounterfactualResult r;
  r.noise = Abduct(features);
  r.factual.assign(features.begin(), features.end());
  r.values = r.factual;
  r.clamped.assign(nodes_.size(), false);
  r.intervened.assign(nodes_.size(), false);
  std::vector<std::optional<double>> forced(nodes_.size());
  for (const auto& [idx, value] : interventions) {
    forced[idx] = value;
    r.intervened[idx] = true;
    r.interventions[nodes_[idx].name] = value;
  }

  for (std::size_t node : dag_.topological_order()) {
    if (node == dag_.severity_node()) continue;
    if (forced[node]) {
      r.values[node] = *forced[node];
      continue;
    }
    const auto& m = nodes_[node];
    bool parents_factual = true;
    for (std::size_t p : m.parents) {
      if (r.values[p] != r.factual[p]) {
        parents_factual = false;
        break;
      }
    }
    // Unchanged parents reproduce the factual value exactly; recomputing
    // Expected + u would only add rounding.
    if (parents_factual) continue;
    double v = m.Expected(r.values) + r.noise[node];
    if (v < 0.0) {
      v = 0.0;
      r.clamped[node] = true;
    }
    r.values[node] = v;
  }

  const auto& parents = severity_parents();
  std::vector<double> x(parents.size()), xf(parents.size());
  for (std::size_t k = 0; k < parents.size(); ++k) {
    x[k] = r.values[parents[k]];
    xf[k] = r.factual[parents[k]];
  }
  r.prediction = classifier_.Predict(x);
  r.factual_prediction = classifier_.Predict(xf);
  return r;
}

nlohmann::json StructuralModel::ToJson() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& m : nodes_) {
    std::vector<std::string> parent_names;
    for (std::size_t p : m.parents) parent_names.push_back(nodes_[p].name);
    nodes.push_back({{"name", m.name},
                     {"parents", parent_names},
                     {"coefficients", m.coefficients},
                     {"intercept", m.intercept},
                     {"residual_scale", m.residual_scale},
                     {"ridge_fallback", m.ridge_fallback}});
  }
  return {{"format", "sitrep.scm"},
          {"version", kFormatVersion},
          {"schema_hash", schema_.Hash()},
          {"dag", dag_.source().ToJson()},
          {"seed", seed_},
          {"nodes", nodes},
          {"classifier", classifier_.ToJson()}};
}

StructuralModel StructuralModel::FromJson(const nlohmann::json& j,
                                          const FeatureSchema& schema) {
  try {
    if (j.value("format", std::string()) != "sitrep.scm") {
      throw ConfigError("not an SCM checkpoint");
    }
    if (j.value("version", 0) != kFormatVersion) {
      throw ConfigError("unsupported SCM checkpoint version");
    }
    if (j.at("schema_hash").get<std::string>() != schema.Hash()) {
      throw ConfigError("SCM checkpoint was fitted against a different schema");
    }
    FeatureDag dag = ExpandDag(CausalDag::FromJson(j.at("dag")), schema);
    std::vector<NodeModel> nodes;
    for (const auto& n : j.at("nodes")) {
      NodeModel m;
      m.name = n.at("name").get<std::string>();
      for (const auto& p : n.at("parents")) {
        m.parents.push_back(schema.IndexOf(p.get<std::string>()));
      }
      m.coefficients = n.at("coefficients").get<std::vector<double>>();
      m.intercept = n.at("intercept").get<double>();
      m.residual_scale = n.at("residual_scale").get<double>();
      m.ridge_fallback = n.value("ridge_fallback", false);
      nodes.push_back(std::move(m));
    }
    return StructuralModel(schema, std::move(dag), std::move(nodes),
                           MlpModel::FromJson(j.at("classifier")),
                           j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed SCM checkpoint: ") + e.what());
  }
}

void StructuralModel::Save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << ToJson().dump() << '\n';
}

StructuralModel StructuralModel::Load(const std::string& path,
                                      const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  try {
    return FromJson(nlohmann::json::parse(in), schema);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
}

StructuralModel FitScm(const DatasetTable& table, const FeatureDag& dag,
                       const TrainConfig& config) {
  if (table.empty()) throw TrainingError("cannot fit an SCM on an empty table");
  if (!table.fully_labeled()) {
    throw TrainingError("SCM fitting requires damage_dollars on every record");
  }
  if (dag.feature_count() != table.schema().size()) {
    throw ConfigError("dag does not match the table schema");
  }
  std::vector<NodeModel> nodes;
  nodes.reserve(dag.feature_count());
  for (std::size_t j = 0; j < dag.feature_count(); ++j) {
    nodes.push_back(FitNode(table, j, dag.parents(j)));
  }

  const auto& parents = dag.parents(dag.severity_node());
  std::vector<std::vector<double>> rows;
  std::vector<SeverityClass> labels;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto x = table.features(i);
    std::vector<double> row(parents.size());
    for (std::size_t k = 0; k < parents.size(); ++k) row[k] = x[parents[k]];
    rows.push_back(std::move(row));
    labels.push_back(*table.label(i));
  }
  MlpModel classifier = TrainMlp(rows, labels, config).model;
  classifier.set_schema_hash(table.schema().Hash());
  return StructuralModel(table.schema(), dag, std::move(nodes), std::move(classifier),
                         config.seed);
}

Prediction ScmModel::PredictWithChanges(std::span<const double> factual,
                                        std::span<const double> modified,
                                        std::span<const std::size_t> changed) const {
  std::vector<std::pair<std::size_t, double>> interventions;
  interventions.reserve(changed.size());
  for (std::size_t j : changed) interventions.emplace_back(j, modified[j]);
  return scm_->Counterfactual(factual, interventions).prediction;
}

}  // namespace sitrep
