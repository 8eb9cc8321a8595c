#ifndef SITREP_RECOURSE_H_
#define SITREP_RECOURSE_H_

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/feature_space.h"
#include "sitrep/model.h"

namespace sitrep {

struct RecourseRequest {
  std::vector<double> features;
  SeverityClass desired = SeverityClass::kLow;
  int max_features = 5;
  int num_suggestions = 3;
  std::set<std::string> immutable;
  std::uint64_t seed = 0;
};

struct FeatureChange {
  std::size_t feature = 0;
  std::string name;
  double from = 0.0;
  double to = 0.0;

  friend bool operator==(const FeatureChange&, const FeatureChange&) = default;
};

struct RecourseSuggestion {
  std::vector<FeatureChange> changes;  // sorted by feature index
  Prediction result;
  double distance = 0.0;  // standardized L1

  std::size_t changed_count() const { return changes.size(); }
  nlohmann::json ToJson(std::uint64_t seed) const;
  // Resolves feature names against `schema`. Throws ValidationError.
  static RecourseSuggestion FromJson(const nlohmann::json& j, const FeatureSchema& schema);
};

enum class RecourseStatus { kOk, kAlreadyAtDesired, kNoRecourseFound };
std::string_view RecourseStatusName(RecourseStatus status);

struct RecourseResult {
  RecourseStatus status = RecourseStatus::kOk;
  Prediction current;
  SeverityClass desired = SeverityClass::kLow;
  int max_features = 0;
  std::uint64_t seed = 0;
  std::vector<RecourseSuggestion> suggestions;

  nlohmann::json ToJson() const;
};

struct RecourseSearchConfig {
  int population = 200;
  int generations = 50;
  // Bisection steps when pulling each changed value back toward the original.
  int refine_steps = 40;
};

// Genetic search over sparse deltas of at most max_features mutable features.
// Fitness ranks valid before invalid, then standardized-L1 proximity, then
// sparsity (invalid candidates are ranked by probability of the desired
// class). Valid survivors are tightened toward the factual record and
// greedily diversified. Only valid suggestions are returned; an empty list
// carries kNoRecourseFound. Throws ConstraintError when every feature is
// immutable and ValidationError for malformed requests.
RecourseResult GenerateRecourse(const SeverityModel& model, const FeatureSpace& space,
                                const RecourseRequest& request,
                                const RecourseSearchConfig& search = {});

struct RecourseVerdict {
  bool well_formed = true;
  bool reaches_desired = true;
  bool nonnegative = true;
  bool within_budget = true;
  bool respects_immutable = true;
  std::vector<std::string> failures;

  bool ok() const {
    return well_formed && reaches_desired && nonnegative && within_budget &&
           respects_immutable;
  }
  nlohmann::json ToJson() const;
};

// Re-applies the delta and checks class, positivity, budget and immutability.
RecourseVerdict ValidateRecourse(const SeverityModel& model, const FeatureSchema& schema,
                                 const RecourseRequest& request,
                                 const RecourseSuggestion& suggestion);

}  // namespace sitrep

#endif  // SITREP_RECOURSE_H_
