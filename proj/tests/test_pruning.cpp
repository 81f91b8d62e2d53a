#include <doctest.h>

#include <cmath>

#include "selfkin/pruning.hpp"

using namespace selfkin;

namespace {

ModelParams random_model(Index n, Index h, Rng& rng) {
  ModelParams p = init_params(n, h, rng);
  for (Index t = 0; t < n; ++t) p.mask(t) = rng.uniform(-2, 2);
  return p;
}

std::vector<ProbePair> probes(Index n, int count, Rng& rng) {
  std::vector<ProbePair> out;
  for (int k = 0; k < count; ++k) {
    Vec a(n), b(n);
    for (Index t = 0; t < n; ++t) a(t) = std::fabs(rng.normal());
    for (Index t = 0; t < n; ++t) b(t) = std::fabs(rng.normal());
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace

TEST_CASE("threshold_mask keeps the largest magnitudes") {
  Rng rng(1);
  ModelParams p = init_params(4, 2, rng);
  p.mask << 0.1, 0.9, 0.5, 0.7;
  const PruneResult r = threshold_mask(p, 0.5);
  CHECK(r.kept_indices == std::vector<Index>{1, 3});
  CHECK(r.dropped_count == 2);
  CHECK(r.threshold_value == 0.7);
  CHECK(r.compacted.n_features() == 2);
  CHECK(r.zeroed.mask(0) == 0.0);
  CHECK(r.zeroed.mask(2) == 0.0);
  CHECK(r.zeroed.mask(1) == 0.9);

  Rng probe_rng(2);
  const auto pr = probes(4, 10, probe_rng);
  CHECK(verify_prune_equivalence(p, r, pr));
}

TEST_CASE("magnitude ranks negative weights too") {
  Rng rng(1);
  ModelParams p = init_params(4, 2, rng);
  p.mask << -0.9, 0.2, 0.3, -0.1;
  CHECK(threshold_mask(p, 0.5).kept_indices == std::vector<Index>{0, 2});
}

TEST_CASE("keep everything is a bitwise no-op") {
  Rng rng(3);
  const ModelParams p = random_model(9, 3, rng);
  const PruneResult r = threshold_mask(p, 1.0);
  CHECK(r.kept_indices.size() == 9);
  CHECK(r.dropped_count == 0);
  CHECK(r.compacted == p);
  const auto pr = probes(9, 4, rng);
  CHECK(verify_prune_equivalence(p, r, pr));
}

TEST_CASE("ties go to the lower index") {
  Rng rng(4);
  ModelParams p = init_params(4, 2, rng);
  p.mask.setConstant(0.6);
  CHECK(threshold_mask(p, 0.5).kept_indices == std::vector<Index>{0, 1});
  p.mask << 0.6, -0.6, 0.6, 0.6;
  CHECK(threshold_mask(p, 0.75).kept_indices == std::vector<Index>{0, 1, 2});
}

TEST_CASE("kept count is exactly ceil(fraction * n)") {
  CHECK(kept_count(10, 0.3) == 3);
  CHECK(kept_count(5, 0.5) == 3);
  CHECK(kept_count(4096, 0.5) == 2048);
  CHECK(kept_count(3, 1e-9) == 1);
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(40));
    ModelParams p = init_params(n, 2, rng);
    if (trial % 3 == 0) p.mask.setConstant(0.25);
    const double frac = 0.01 * static_cast<double>(1 + rng.below(100));
    const PruneResult r = threshold_mask(p, frac);
    const auto expect = static_cast<Index>(std::ceil(frac * static_cast<double>(n) - 1e-9));
    CHECK(static_cast<Index>(r.kept_indices.size()) == std::max<Index>(1, expect));
    CHECK(static_cast<Index>(r.kept_indices.size()) + r.dropped_count == n);
    CHECK(std::is_sorted(r.kept_indices.begin(), r.kept_indices.end()));
    CHECK(std::adjacent_find(r.kept_indices.begin(), r.kept_indices.end()) == r.kept_indices.end());
  }
}

TEST_CASE("invalid fractions") {
  Rng rng(6);
  const ModelParams p = init_params(4, 2, rng);
  CHECK_THROWS_WITH_AS(threshold_mask(p, 0.0), "invalid-fraction", Error);
  CHECK_THROWS_WITH_AS(threshold_mask(p, 1.5), "invalid-fraction", Error);
  CHECK_THROWS_WITH_AS(threshold_mask(p, std::nan("")), "invalid-fraction", Error);
}

TEST_CASE("compaction removes columns and keeps the rest") {
  Rng rng(7);
  const ModelParams p = random_model(6, 3, rng);
  const std::vector<Index> kept{1, 4};
  const ModelParams c = compact(p, kept);
  CHECK(c.well_formed());
  CHECK(c.mask(1) == p.mask(4));
  CHECK(c.local[1][0](0) == p.local[1][0](1));
  CHECK(c.global[0].col(1) == p.global[0].col(4));
  CHECK(c.global[1].rows() == 3);
}

TEST_CASE("zeroed mask makes outputs independent of dropped inputs") {
  Rng rng(8);
  const ModelParams p = random_model(12, 4, rng);
  const PruneResult r = threshold_mask(p, 0.5);
  auto pr = probes(12, 1, rng);
  Vec a = pr[0].first, b = pr[0].second;
  const auto before = forward(r.zeroed, a, b).probs;
  for (Index t = 0; t < 12; ++t) {
    if (std::find(r.kept_indices.begin(), r.kept_indices.end(), t) != r.kept_indices.end()) continue;
    a(t) += 100.0;
    b(t) -= 3.0;
  }
  CHECK(forward(r.zeroed, a, b).probs == before);
}

TEST_CASE("equivalence holds on random models") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = trial % 2 ? 8 : 64;
    const Index h = trial % 3 ? 4 : 16;
    const ModelParams p = random_model(n, h, rng);
    const PruneResult r = threshold_mask(p, 0.5);
    CHECK(static_cast<Index>(r.kept_indices.size()) == (n + 1) / 2);
    const auto pr = probes(n, 10, rng);
    CHECK(verify_prune_equivalence(p, r, pr));
  }
}

TEST_CASE("perturbed compacted model fails verification") {
  Rng rng(10);
  const ModelParams p = random_model(4, 2, rng);
  PruneResult r = threshold_mask(p, 0.5);
  r.compacted.global[0].col(0).array() += 0.5;
  r.compacted.global[1].col(0).array() -= 0.5;
  const auto pr = probes(4, 10, rng);
  CHECK_FALSE(verify_prune_equivalence(p, r, pr));
}
