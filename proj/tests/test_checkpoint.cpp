#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "selfkin/checkpoint.hpp"
#include "selfkin/error.hpp"
#include "selfkin/pruning.hpp"

using namespace selfkin;
namespace fs = std::filesystem;

namespace {

Checkpoint sample(std::uint64_t seed) {
  Rng rng(seed);
  Checkpoint c;
  c.params = init_params(9, 4, rng);
  // Awkward values that only survive a shortest round-trip writer.
  c.params.mask << 0.1, 1.0 / 3.0, -0.0, 5e-324, 1e308, -2.5, std::nextafter(1.0, 2.0), 0.0, 7.0;
  c.relation = Relation::GMGD;
  c.hyper.lambda_mask = 0.25;
  c.hyper.adam.decay = 1e-3;
  c.hyper.use_mask_layer = false;
  return c;
}

void check_same(const Checkpoint& a, const Checkpoint& b) {
  CHECK(a.params == b.params);
  CHECK(a.relation == b.relation);
  CHECK(a.hyper == b.hyper);
  CHECK(a.kept_indices == b.kept_indices);
  CHECK(a.pruned_from == b.pruned_from);
  for (Index i = 0; i < a.params.mask.size(); ++i)
    CHECK(std::signbit(a.params.mask[i]) == std::signbit(b.params.mask[i]));
}

}  // namespace

TEST_CASE("checkpoint round-trip is value exact") {
  const fs::path dir = fs::temp_directory_path() / "selfkin_tests";
  fs::create_directories(dir);
  const Checkpoint c = sample(1);
  save_checkpoint(c, dir / "model.json");
  check_same(c, load_checkpoint(dir / "model.json"));

  Checkpoint pruned;
  const PruneResult pr = threshold_mask(c.params, 0.5);
  pruned.params = pr.compacted;
  pruned.kept_indices = pr.kept_indices;
  pruned.pruned_from = c.params.n_features();
  pruned.hyper = c.hyper;
  save_checkpoint(pruned, dir / "pruned.json");
  const Checkpoint back = load_checkpoint(dir / "pruned.json");
  check_same(pruned, back);
  CHECK(back.params.n_features() == 5);
  CHECK(!back.relation);

  Checkpoint c2;
  Rng rng(2);
  c2.params = init_params(1, 1, rng);
  check_same(c2, checkpoint_from_json(to_json(c2)));
}

TEST_CASE("malformed checkpoints") {
  const nlohmann::json good = to_json(sample(3));
  CHECK_NOTHROW(checkpoint_from_json(good));

  auto bad = good;
  bad["format"] = "something-else";
  CHECK_THROWS_WITH_AS(checkpoint_from_json(bad), doctest::Contains("bad-checkpoint"), Error);
  bad = good;
  bad["version"] = 2;
  CHECK_THROWS_WITH_AS(checkpoint_from_json(bad), doctest::Contains("bad-checkpoint"), Error);
  bad = good;
  bad["w_mask"].erase(0);
  CHECK_THROWS_WITH_AS(checkpoint_from_json(bad), doctest::Contains("bad-checkpoint"), Error);
  bad = good;
  bad["w_global"]["kin"].erase(0);
  CHECK_THROWS_WITH_AS(checkpoint_from_json(bad), doctest::Contains("bad-checkpoint"), Error);
  bad = good;
  bad.erase("w_local");
  CHECK_THROWS_WITH_AS(checkpoint_from_json(bad), doctest::Contains("bad-checkpoint"), Error);
  bad = good;
  bad["relation"] = "XY";
  CHECK_THROWS_WITH_AS(checkpoint_from_json(bad), doctest::Contains("bad-checkpoint"), Error);
  bad = good;
  bad["kept_indices"] = {0, 1};
  CHECK_THROWS_WITH_AS(checkpoint_from_json(bad), doctest::Contains("bad-checkpoint"), Error);

  const fs::path dir = fs::temp_directory_path() / "selfkin_tests";
  fs::create_directories(dir);
  std::ofstream(dir / "garbage.json") << "{not json";
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "garbage.json"), doctest::Contains("bad-checkpoint"), Error);
  CHECK_THROWS_AS(load_checkpoint(dir / "does-not-exist.json"), Error);
}
