#ifndef SITREP_SPLIT_H_
#define SITREP_SPLIT_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sitrep/dataset.h"

namespace sitrep {

// Fold assignment for k-fold cross-validation.
struct SplitPlan {
  int k = 0;
  std::vector<int> fold_of;  // record index -> fold id in [0, k)
  std::uint64_t seed = 0;

  std::vector<std::size_t> TestIndices(int fold) const;
  std::vector<std::size_t> TrainIndices(int fold) const;
};

// Shuffles each class with `seed`, then deals records round-robin to folds,
// continuing the rotation across classes so fold sizes differ by at most one.
// Throws SplitError when k < 2, the table is unlabeled, or a class has fewer
// than k members.
SplitPlan StratifiedKFold(const DatasetTable& table, int k, std::uint64_t seed);

}  // namespace sitrep

#endif  // SITREP_SPLIT_H_
