#include "sitrep/feature_space.h"

#include <algorithm>
#include <cmath>

#include "sitrep/error.h"
#include "sitrep/standardizer.h"

namespace sitrep {

PerturbationSampler::PerturbationSampler(std::vector<std::vector<double>> support)
    : support_(std::move(support)) {
  sorted_.reserve(support_.size());
  for (std::size_t j = 0; j < support_.size(); ++j) {
    if (support_[j].empty()) {
      throw ConfigError("empty proposal support for feature " + std::to_string(j));
    }
    for (double v : support_[j]) {
      if (!std::isfinite(v)) throw ConfigError("proposal support must be finite");
    }
    auto sorted = support_[j];
    std::sort(sorted.begin(), sorted.end());
    sorted_.push_back(std::move(sorted));
  }
}

PerturbationSampler PerturbationSampler::FromTable(const DatasetTable& table) {
  if (table.empty()) throw ConfigError("cannot build proposals from an empty table");
  std::vector<std::vector<double>> support(table.schema().size());
  for (auto& s : support) s.reserve(table.size());
  for (const auto& r : table.records()) {
    for (std::size_t j = 0; j < r.features.size(); ++j) support[j].push_back(r.features[j]);
  }
  return PerturbationSampler(std::move(support));
}

double PerturbationSampler::Quantile(std::size_t j, double q) const {
  const auto& s = sorted_[j];
  q = std::clamp(q, 0.0, 1.0);
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(s.size())));
  return s[rank == 0 ? 0 : rank - 1];
}

PerturbationSampler PerturbationSampler::RestrictedTo(
    std::span<const std::size_t> features) const {
  PerturbationSampler out = *this;
  out.active_.assign(support_.size(), false);
  for (std::size_t j : features) out.active_.at(j) = true;
  return out;
}

double PerturbationSampler::Draw(std::size_t j, std::mt19937_64& rng) const {
  const auto& s = support_[j];
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  return s[pick(rng)];
}

FeatureSpace::FeatureSpace(FeatureSchema schema, PerturbationSampler sampler,
                           std::vector<double> scales)
    : schema_(std::move(schema)), sampler_(std::move(sampler)), scales_(std::move(scales)) {
  if (sampler_.feature_count() != schema_.size() || scales_.size() != schema_.size()) {
    throw ConfigError("feature space components disagree on width");
  }
  for (double s : scales_) {
    if (!(s > 0.0)) throw ConfigError("feature scales must be positive");
  }
}

FeatureSpace FeatureSpace::FromTable(const DatasetTable& table) {
  std::vector<std::vector<double>> rows;
  rows.reserve(table.size());
  for (const auto& r : table.records()) rows.push_back(r.features);
  auto standardizer = Standardizer::Fit(rows);
  return FeatureSpace(table.schema(), PerturbationSampler::FromTable(table),
                      standardizer.scale());
}

double FeatureSpace::StandardizedL1(std::span<const double> a,
                                    std::span<const double> b) const {
  double d = 0.0;
  for (std::size_t j = 0; j < scales_.size(); ++j) d += std::abs(a[j] - b[j]) / scales_[j];
  return d;
}

}  // namespace sitrep
