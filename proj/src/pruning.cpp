#include "selfkin/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace selfkin {

Index kept_count(Index n, double keep_fraction) {
  const double exact = keep_fraction * static_cast<double>(n);
  auto k = static_cast<Index>(std::ceil(exact));
  if (k > 0 && static_cast<double>(k - 1) >= exact - 1e-9 * static_cast<double>(n)) --k;
  return std::clamp<Index>(k, 1, n);
}

Vec slice(const Vec& x, std::span<const Index> kept) {
  Vec out(static_cast<Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (kept[k] < 0 || kept[k] >= x.size()) throw Error("shape-mismatch");
    out(static_cast<Index>(k)) = x(kept[k]);
  }
  return out;
}

ModelParams compact(const ModelParams& params, std::span<const Index> kept) {
  const auto m = static_cast<Index>(kept.size());
  const Index h = params.n_hidden();
  ModelParams out(ParamBlock<double>::zeros(m, h));
  out.mask = slice(params.mask, kept);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) out.local[j][i] = slice(params.local[j][i], kept);
    for (Index k = 0; k < m; ++k) out.global[j].col(k) = params.global[j].col(kept[static_cast<std::size_t>(k)]);
  }
  return out;
}

PruneResult threshold_mask(const ModelParams& params, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw Error("invalid-fraction");
  if (!params.well_formed()) throw Error("shape-mismatch");
  const Index n = params.n_features();
  const Index keep = kept_count(n, keep_fraction);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::fabs(params.mask(a)) > std::fabs(params.mask(b));
  });

  PruneResult r;
  r.kept_indices.assign(order.begin(), order.begin() + keep);
  std::sort(r.kept_indices.begin(), r.kept_indices.end());
  r.dropped_count = n - keep;
  r.threshold_value = std::fabs(params.mask(order[static_cast<std::size_t>(keep - 1)]));

  r.zeroed = params;
  std::vector<bool> kept_flag(static_cast<std::size_t>(n), false);
  for (Index k : r.kept_indices) kept_flag[static_cast<std::size_t>(k)] = true;
  for (Index t = 0; t < n; ++t)
    if (!kept_flag[static_cast<std::size_t>(t)]) r.zeroed.mask(t) = 0.0;

  r.compacted = compact(params, r.kept_indices);
  return r;
}

bool verify_prune_equivalence(const ModelParams& original, const PruneResult& result,
                              std::span<const ProbePair> probes, double tol) {
  ModelParams zeroed = original;
  std::vector<bool> kept_flag(static_cast<std::size_t>(original.n_features()), false);
  for (Index k : result.kept_indices) kept_flag.at(static_cast<std::size_t>(k)) = true;
  for (Index t = 0; t < zeroed.n_features(); ++t)
    if (!kept_flag[static_cast<std::size_t>(t)]) zeroed.mask(t) = 0.0;

  for (const auto& [x1, x2] : probes) {
    const auto full = forward(zeroed, x1, x2).probs;
    const auto small =
        forward(result.compacted, slice(x1, result.kept_indices), slice(x2, result.kept_indices)).probs;
    if (!(std::fabs(full.first - small.first) <= tol && std::fabs(full.second - small.second) <= tol))
      return false;
  }
  return true;
}

}  // namespace selfkin
