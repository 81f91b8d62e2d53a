#pragma once

#include <span>
#include <utility>
#include <vector>

#include "selfkin/model.hpp"

namespace selfkin {

struct PruneResult {
  std::vector<Index> kept_indices;
  Index dropped_count = 0;
  /// Smallest |w_mask| among kept features.
  double threshold_value = 0.0;
  /// Original dimensionality with dropped mask weights set to 0.
  ModelParams zeroed;
  /// Dropped coordinates physically removed from every tensor.
  ModelParams compacted;
};

/// Number of survivors for a fraction: ceil(keep_fraction * n), guarded
/// against products like 0.3 * 10 landing one ulp above an integer.
Index kept_count(Index n, double keep_fraction);

/// Keeps the ceil(keep_fraction * n) features with the largest |w_mask|,
/// ties going to the lower index.
PruneResult threshold_mask(const ModelParams& params, double keep_fraction);

/// Removes every coordinate not in `kept` (strictly increasing).
ModelParams compact(const ModelParams& params, std::span<const Index> kept);

Vec slice(const Vec& x, std::span<const Index> kept);

using ProbePair = std::pair<Vec, Vec>;

/// forward(original with zeroed mask) vs forward(compacted on sliced inputs);
/// true when probabilities agree within `tol` on every probe.
bool verify_prune_equivalence(const ModelParams& original, const PruneResult& result,
                              std::span<const ProbePair> probes, double tol = 1e-12);

}  // namespace selfkin
