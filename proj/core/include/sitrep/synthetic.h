#ifndef SITREP_SYNTHETIC_H_
#define SITREP_SYNTHETIC_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/dataset.h"
#include "sitrep/schema.h"

namespace sitrep {

// Linear structural equation of one feature:
//   x = max(0, intercept + sum(coef * parent) + noise_sd * N(0, 1))
// Roots are drawn as root_scale * Gamma(2, 1/2) instead.
struct NodeEquation {
  std::string node;
  bool root = true;
  double root_scale = 0.0;
  double intercept = 0.0;
  std::vector<std::pair<std::string, double>> coefficients;
  double noise_sd = 0.0;
};

// log10(damage) = offset + slope * sum(weight * x / scale) + noise * N(0, 1)
struct DamageModel {
  std::vector<std::pair<std::string, double>> weights;
  std::vector<double> scales;  // aligned with weights
  double offset = 0.0;
  double slope = 0.0;
  double noise = 0.0;

  double Score(const FeatureSchema& schema, std::span<const double> x) const;
  // Damage with the noise term set to zero.
  double DeterministicDamage(const FeatureSchema& schema,
                             std::span<const double> x) const;
};

struct SyntheticConfig {
  int counties = 900;
  int events = 3;
  std::string dag = "dag2";
  // Standard deviation of every non-root equation, relative to the node scale.
  double noise_scale = 0.1;
  // Probability that an expanded parent edge carries a nonzero coefficient.
  double edge_density = 0.3;
  double satellite_scale = 1000.0;
  double mention_scale = 5.0;
  std::vector<std::pair<std::string, double>> damage_weights = {
      {"sat_built_to_water", 1.0},
      {"sat_built_to_flooded_vegetation", 0.8},
      {"sat_trees_to_bare", 0.6},
      {"news_infrastructure_mentions", 0.8},
      {"reddit_roof_mentions", 0.5},
      {"news_road_mentions", 0.6},
  };
  double damage_noise = 0.05;
  // Records whose log10 damage lies within this many decades of a class
  // threshold are redrawn, leaving a gap between the classes.
  double label_margin = 0.0;
  // Calibration of the damage function. When absent both are fitted so the
  // 1/3 and 2/3 score quantiles land on the 10k and 100k thresholds.
  std::optional<double> damage_offset;
  std::optional<double> damage_slope;
  // Overrides the sampled equations when non-empty (one per feature).
  std::vector<NodeEquation> equations;
  std::uint64_t seed = 7;

  nlohmann::json ToJson() const;
  static SyntheticConfig FromJson(const nlohmann::json& j);

  // Noise-free labels with a 0.2-decade gap at each threshold, 3000 records.
  static SyntheticConfig Separable();
};

struct GroundTruth {
  std::string dag;
  std::vector<NodeEquation> equations;  // schema order
  DamageModel damage;

  nlohmann::json ToJson() const;
  static GroundTruth FromJson(const nlohmann::json& j);
};

struct SyntheticData {
  DatasetTable table;
  GroundTruth truth;
  SyntheticConfig config;  // with calibration filled in
};

// Samples `counties` records by propagating the ground-truth SCM in
// topological order. Deterministic for a fixed seed. Throws CalibrationError
// when the labels do not cover all three severity classes.
SyntheticData GenerateSynthetic(const SyntheticConfig& config,
                                const FeatureSchema& schema = DefaultSchema());

// Square cells on a lon/lat grid, one per distinct fips in the table.
nlohmann::json SyntheticGeometry(const DatasetTable& table);

}  // namespace sitrep

#endif  // SITREP_SYNTHETIC_H_
