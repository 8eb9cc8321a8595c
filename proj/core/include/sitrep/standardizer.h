#ifndef SITREP_STANDARDIZER_H_
#define SITREP_STANDARDIZER_H_

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace sitrep {

// Per-feature z-scoring fitted on training rows. Features that are constant in
// training get scale 1 and are flagged.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale,
               std::vector<bool> constant);

  // Population mean and standard deviation of each column.
  static Standardizer Fit(std::span<const std::vector<double>> rows);
  static Standardizer Identity(std::size_t width);

  std::size_t size() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scale() const { return scale_; }
  const std::vector<bool>& constant() const { return constant_; }

  void Transform(std::span<const double> in, std::span<double> out) const;
  void Inverse(std::span<const double> in, std::span<double> out) const;
  std::vector<double> Transform(std::span<const double> in) const;

  nlohmann::json ToJson() const;
  static Standardizer FromJson(const nlohmann::json& j);

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<bool> constant_;
};

}  // namespace sitrep

#endif  // SITREP_STANDARDIZER_H_
