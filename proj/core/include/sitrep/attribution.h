#ifndef SITREP_ATTRIBUTION_H_
#define SITREP_ATTRIBUTION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitrep/feature_space.h"
#include "sitrep/model.h"

namespace sitrep {

enum class AttributionLevel { kFeature, kGroup, kSource };

std::string_view LevelName(AttributionLevel level);
// Throws ValidationError (field "level") for anything but feature/group/source.
AttributionLevel ParseLevel(std::string_view text);

// A named set of features scored jointly.
struct AttributionUnit {
  std::string name;
  std::vector<std::size_t> features;
};

// Feature level: one unit per feature in schema order. Group level: manifest
// order, skipping empty groups. Source level: satellite, news, reddit.
std::vector<AttributionUnit> UnitsForLevel(const FeatureSchema& schema,
                                           AttributionLevel level);

// Necessity of `unit` for the model's factual prediction y* on `record`:
// the fraction of n joint resamples of the unit's features (everything else
// held fixed) whose prediction differs from y*. Throws ValidationError for
// n <= 0 or an empty unit.
double NecessityScore(const SeverityModel& model, std::span<const double> record,
                      std::span<const std::size_t> unit,
                      const PerturbationSampler& sampler, int samples,
                      std::uint64_t seed);

inline constexpr std::size_t kMaxOracleGridSize = 10'000;

// Exact flip fraction over the Cartesian product of `grid` (grid[k] lists the
// candidate values of unit[k]). Throws ValidationError above kMaxOracleGridSize.
double ExhaustiveNecessityOracle(const SeverityModel& model,
                                 std::span<const double> record,
                                 std::span<const std::size_t> unit,
                                 const std::vector<std::vector<double>>& grid);

// Rows from `pool` whose prediction differs from `factual_class`.
std::vector<std::vector<double>> ContrastRows(
    const SeverityModel& model, std::span<const std::vector<double>> pool,
    SeverityClass factual_class);

// Sufficiency: over n contrast rows drawn with replacement, the fraction for
// which transplanting the record's unit values recovers y*. Throws
// ValidationError when no row in `pool` predicts a class other than y*.
double SufficiencyScore(const SeverityModel& model, std::span<const double> record,
                        std::span<const std::size_t> unit,
                        std::span<const std::vector<double>> pool, int samples,
                        std::uint64_t seed);

// Same quantity computed over every contrast row exactly.
double ExhaustiveSufficiencyOracle(const SeverityModel& model,
                                   std::span<const double> record,
                                   std::span<const std::size_t> unit,
                                   std::span<const std::vector<double>> pool);

struct UnitScore {
  std::string unit;
  double alpha = 0.0;
  int n_effective = 0;
  std::size_t order = 0;  // position in UnitsForLevel
};

struct AttributionReport {
  AttributionLevel level = AttributionLevel::kFeature;
  std::string metric = "necessity";
  std::string model_id;
  std::string record_id;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<UnitScore> scores;

  nlohmann::json ToJson() const;
};

struct AttributionOptions {
  int samples = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

// Independent random stream for one unit, so scoring order and parallelism do
// not change results.
std::uint64_t UnitSeed(std::uint64_t seed, std::string_view unit);

AttributionReport ComputeNecessityReport(const SeverityModel& model,
                                         const FeatureSpace& space,
                                         std::span<const double> record,
                                         AttributionLevel level,
                                         const AttributionOptions& options,
                                         std::string model_id = {},
                                         std::string record_id = {});

AttributionReport ComputeSufficiencyReport(const SeverityModel& model,
                                           const FeatureSpace& space,
                                           std::span<const double> record,
                                           std::span<const std::vector<double>> pool,
                                           AttributionLevel level,
                                           const AttributionOptions& options,
                                           std::string model_id = {},
                                           std::string record_id = {});

// Descending by alpha, ties by schema index; at most k entries. Throws
// ValidationError unless the report is feature level.
std::vector<UnitScore> TopKFeatures(const AttributionReport& report,
                                    std::size_t k = 20);

}  // namespace sitrep

#endif  // SITREP_ATTRIBUTION_H_
