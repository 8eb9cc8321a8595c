#ifndef SITREP_SCM_H_
#define SITREP_SCM_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/dag.h"
#include "sitrep/dataset.h"
#include "sitrep/mlp.h"
#include "sitrep/model.h"

namespace sitrep {

// Additive-noise linear equation x = intercept + coefficients . parents + u.
struct NodeModel {
  std::string name;
  std::vector<std::size_t> parents;  // schema order
  std::vector<double> coefficients;
  double intercept = 0.0;
  double residual_scale = 0.0;
  bool ridge_fallback = false;

  // `values` is indexed by node.
  double Expected(std::span<const double> values) const;
};

// Feature name -> value to force.
using InterventionSet = std::map<std::string, double>;

struct CounterfactualResult {
  std::vector<double> factual;
  std::vector<double> values;  // counterfactual feature values
  std::vector<double> noise;   // abducted exogenous terms
  std::vector<bool> clamped;   // value fell below zero and was clamped
  std::vector<bool> intervened;
  Prediction factual_prediction;
  Prediction prediction;
  InterventionSet interventions;
};

// Validates targets (known feature, not severity) and values (finite, >= 0).
// Throws ValidationError naming the offending feature.
std::vector<std::pair<std::size_t, double>> ResolveInterventions(
    const FeatureSchema& schema, const InterventionSet& interventions);

// Linear SCM over a FeatureDag whose severity node is an MLP over its parents.
// Counterfactuals follow abduction, action and prediction: noise is inferred
// from the factual record, intervened nodes are pinned with their parent
// edges severed, and the rest is propagated in topological order.
class StructuralModel {
 public:
  StructuralModel(FeatureSchema schema, FeatureDag dag, std::vector<NodeModel> nodes,
                  MlpModel classifier, std::uint64_t seed);

  const FeatureSchema& schema() const { return schema_; }
  const FeatureDag& dag() const { return dag_; }
  const std::vector<NodeModel>& nodes() const { return nodes_; }
  const MlpModel& classifier() const { return classifier_; }
  const std::vector<std::size_t>& severity_parents() const {
    return dag_.parents(dag_.severity_node());
  }
  std::uint64_t seed() const { return seed_; }
  std::string schema_hash() const { return schema_.Hash(); }
  std::size_t feature_count() const { return nodes_.size(); }

  Prediction ObservationalPredict(std::span<const double> features) const;

  // u_j = x_j - E[x_j | parents]. The severity node carries no noise.
  std::vector<double> Abduct(std::span<const double> features) const;

  CounterfactualResult Counterfactual(std::span<const double> features,
                                      const InterventionSet& interventions) const;
  // Index form; `interventions` must already be validated.
  CounterfactualResult Counterfactual(
      std::span<const double> features,
      std::span<const std::pair<std::size_t, double>> interventions) const;

  nlohmann::json ToJson() const;
  // Throws ConfigError when the checkpoint was fitted against another schema.
  static StructuralModel FromJson(const nlohmann::json& j, const FeatureSchema& schema);
  void Save(const std::string& path) const;
  static StructuralModel Load(const std::string& path, const FeatureSchema& schema);

 private:
  void CheckFeatures(std::span<const double> features) const;

  FeatureSchema schema_;
  FeatureDag dag_;
  std::vector<NodeModel> nodes_;
  MlpModel classifier_;
  std::uint64_t seed_ = 0;
};

// Least squares per non-root node (ridge with lambda = 1e-6 when the parent
// matrix is rank deficient), means for roots, and an MLP on the severity
// parents trained with `config`.
StructuralModel FitScm(const DatasetTable& table, const FeatureDag& dag,
                       const TrainConfig& config);

inline constexpr double kRidgeLambda = 1e-6;

// SeverityModel view: predictions are observational, changes are do().
class ScmModel : public SeverityModel {
 public:
  explicit ScmModel(std::shared_ptr<const StructuralModel> scm) : scm_(std::move(scm)) {}

  std::size_t input_size() const override { return scm_->feature_count(); }
  Prediction Predict(std::span<const double> features) const override {
    return scm_->ObservationalPredict(features);
  }
  Prediction PredictWithChanges(std::span<const double> factual,
                                std::span<const double> modified,
                                std::span<const std::size_t> changed) const override;
  const StructuralModel& scm() const { return *scm_; }

 private:
  std::shared_ptr<const StructuralModel> scm_;
};

}  // namespace sitrep

#endif  // SITREP_SCM_H_
