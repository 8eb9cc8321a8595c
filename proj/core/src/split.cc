#include "sitrep/split.h"

#include <algorithm>
#include <random>
#include <string>

#include "sitrep/error.h"

namespace sitrep {

std::vector<std::size_t> SplitPlan::TestIndices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::TrainIndices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

SplitPlan StratifiedKFold(const DatasetTable& table, int k, std::uint64_t seed) {
  if (k < 2) throw SplitError("fold count must be >= 2, got " + std::to_string(k));
  if (!table.fully_labeled()) {
    throw SplitError("stratified split requires every record to be labeled");
  }
  std::array<std::vector<std::size_t>, 3> by_class;
  for (std::size_t i = 0; i < table.size(); ++i) {
    by_class[ClassIndex(*table.label(i))].push_back(i);
  }
  for (SeverityClass c : kAllSeverityClasses) {
    const auto n = by_class[ClassIndex(c)].size();
    if (n < static_cast<std::size_t>(k)) {
      throw SplitError("class " + std::string(SeverityName(c)) + " has " +
                       std::to_string(n) + " records, fewer than k=" +
                       std::to_string(k));
    }
  }

  SplitPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(table.size(), -1);
  std::mt19937_64 rng(seed);
  int next_fold = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i : members) {
      plan.fold_of[i] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return plan;
}

}  // namespace sitrep
