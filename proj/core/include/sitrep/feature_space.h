#ifndef SITREP_FEATURE_SPACE_H_
#define SITREP_FEATURE_SPACE_H_

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "sitrep/dataset.h"
#include "sitrep/schema.h"

namespace sitrep {

// Per-feature empirical proposal distribution: uniform over the observed
// values of that feature (duplicates keep their weight).
class PerturbationSampler {
 public:
  PerturbationSampler() = default;
  // Throws ConfigError for an empty or non-finite support.
  explicit PerturbationSampler(std::vector<std::vector<double>> support);
  static PerturbationSampler FromTable(const DatasetTable& table);

  std::size_t feature_count() const { return support_.size(); }
  const std::vector<double>& support(std::size_t j) const { return support_[j]; }
  double min(std::size_t j) const { return sorted_[j].front(); }
  double max(std::size_t j) const { return sorted_[j].back(); }
  // Value at quantile q in [0, 1] (nearest rank).
  double Quantile(std::size_t j, double q) const;

  bool perturbs(std::size_t j) const { return active_.empty() || active_[j]; }
  // Copy that only perturbs `features`. Callers keep the factual value of the
  // others and no randomness is consumed for them.
  PerturbationSampler RestrictedTo(std::span<const std::size_t> features) const;

  double Draw(std::size_t j, std::mt19937_64& rng) const;

 private:
  std::vector<std::vector<double>> support_;
  std::vector<std::vector<double>> sorted_;
  std::vector<bool> active_;  // empty means every feature is active
};

// Schema plus the training-set statistics that attribution and recourse need.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(FeatureSchema schema, PerturbationSampler sampler,
               std::vector<double> scales);
  // Scales are population standard deviations, 1 for constant features.
  static FeatureSpace FromTable(const DatasetTable& table);

  const FeatureSchema& schema() const { return schema_; }
  const PerturbationSampler& sampler() const { return sampler_; }
  const std::vector<double>& scales() const { return scales_; }
  std::size_t size() const { return schema_.size(); }

  // sum_j |a_j - b_j| / scale_j
  double StandardizedL1(std::span<const double> a, std::span<const double> b) const;

 private:
  FeatureSchema schema_;
  PerturbationSampler sampler_;
  std::vector<double> scales_;
};

}  // namespace sitrep

#endif  // SITREP_FEATURE_SPACE_H_
