#include "sitrep/standardizer.h"

#include <cmath>

#include "sitrep/error.h"

namespace sitrep {

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale,
                           std::vector<bool> constant)
    : mean_(std::move(mean)), scale_(std::move(scale)), constant_(std::move(constant)) {
  if (mean_.size() != scale_.size() || mean_.size() != constant_.size()) {
    throw ConfigError("standardizer vectors differ in length");
  }
  for (double s : scale_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ConfigError("standardizer scale entries must be positive");
    }
  }
}

Standardizer Standardizer::Fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw TrainingError("cannot fit a standardizer on zero rows");
  const std::size_t width = rows.front().size();
  std::vector<double> mean(width, 0.0), scale(width, 0.0);
  std::vector<bool> constant(width, false);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < width; ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < width; ++j) {
      const double d = r[j] - mean[j];
      scale[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < width; ++j) {
    scale[j] = std::sqrt(scale[j] / static_cast<double>(rows.size()));
    if (!(scale[j] > 1e-12 * std::max(1.0, std::abs(mean[j])))) {
      scale[j] = 1.0;
      constant[j] = true;
    }
  }
  return Standardizer(std::move(mean), std::move(scale), std::move(constant));
}

Standardizer Standardizer::Identity(std::size_t width) {
  return Standardizer(std::vector<double>(width, 0.0),
                      std::vector<double>(width, 1.0),
                      std::vector<bool>(width, false));
}

void Standardizer::Transform(std::span<const double> in,
                             std::span<double> out) const {
  for (std::size_t j = 0; j < mean_.size(); ++j) {
    out[j] = (in[j] - mean_[j]) / scale_[j];
  }
}

void Standardizer::Inverse(std::span<const double> in,
                           std::span<double> out) const {
  for (std::size_t j = 0; j < mean_.size(); ++j) {
    out[j] = in[j] * scale_[j] + mean_[j];
  }
}

std::vector<double> Standardizer::Transform(std::span<const double> in) const {
  std::vector<double> out(mean_.size());
  Transform(in, out);
  return out;
}

nlohmann::json Standardizer::ToJson() const {
  return {{"mean", mean_}, {"scale", scale_}, {"constant", constant_}};
}

Standardizer Standardizer::FromJson(const nlohmann::json& j) {
  return Standardizer(j.at("mean").get<std::vector<double>>(),
                      j.at("scale").get<std::vector<double>>(),
                      j.at("constant").get<std::vector<bool>>());
}

}  // namespace sitrep
