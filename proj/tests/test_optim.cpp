#include <doctest.h>

#include <cmath>

#include "selfkin/optim.hpp"

using namespace selfkin;

namespace {

ModelParams filled(Index n, Index h, double value) {
  ModelParams p(ParamBlock<double>::zeros(n, h));
  for_each_tensor(p, p, [value](auto& a, const auto&) { a.setConstant(value); });
  return p;
}

Gradients filled_grads(Index n, Index h, double value) {
  return Gradients(static_cast<const ParamBlock<double>&>(filled(n, h, value)));
}

}  // namespace

TEST_CASE("first Adam step") {
  ModelParams p = filled(1, 1, 1.0);
  const Gradients g = filled_grads(1, 1, 1.0);
  AdamState s = AdamState::fresh(p);
  const AdamHyper hp;
  adam_step(p, g, s, hp, 1e-4);
  CHECK(s.t == 1);
  CHECK(s.m.mask(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.v.mask(0) == doctest::Approx(0.001).epsilon(1e-15));
  // m_hat = v_hat = 1, so w' = 1 - 1e-4 / (1 + 1e-8).
  const double expected = 1.0 - 1e-4 / (1.0 + 1e-8);
  CHECK(std::fabs(p.mask(0) - expected) <= 1e-15);
  CHECK(std::fabs(p.global[1](0, 0) - expected) <= 1e-15);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  Rng rng(1);
  ModelParams p = init_params(5, 3, rng);
  const ModelParams before = p;
  AdamState s = AdamState::fresh(p);
  adam_step(p, Gradients::zeros_like(p), s, AdamHyper{}, 1e-4);
  CHECK(p == before);
}

TEST_CASE("Adam is deterministic") {
  Rng rng(2);
  const ModelParams p0 = init_params(6, 2, rng);
  Gradients g = Gradients::zeros_like(p0);
  for_each_tensor(g, g, [&](auto& a, const auto&) {
    for (Index k = 0; k < a.size(); ++k) a.data()[k] = rng.normal();
  });
  ModelParams a = p0, b = p0;
  AdamState sa = AdamState::fresh(p0), sb = AdamState::fresh(p0);
  for (int k = 0; k < 5; ++k) {
    adam_step(a, g, sa, AdamHyper{}, 3e-5);
    adam_step(b, g, sb, AdamHyper{}, 3e-5);
  }
  CHECK(a == b);
  CHECK(sa.m == sb.m);
  CHECK(sa.v == sb.v);
}

TEST_CASE("Adam updates stay bounded by a few learning rates") {
  Rng rng(3);
  ModelParams p = init_params(8, 4, rng);
  AdamState s = AdamState::fresh(p);
  for (int step = 0; step < 200; ++step) {
    Gradients g = Gradients::zeros_like(p);
    for_each_tensor(g, g, [&](auto& a, const auto&) {
      for (Index k = 0; k < a.size(); ++k) a.data()[k] = rng.normal() * std::pow(10.0, rng.uniform(-6, 3));
    });
    const ModelParams before = p;
    const double lr = rng.uniform(1e-5, 1e-3);
    adam_step(p, g, s, AdamHyper{}, lr);
    double max_move = 0.0;
    for_each_tensor(p, before, [&](const auto& a, const auto& b) {
      max_move = std::max(max_move, (a - b).cwiseAbs().maxCoeff());
    });
    REQUIRE(max_move <= 3.0 * lr);
    REQUIRE(p.same_shape(s.m));
  }
  CHECK(s.t == 200);
}

TEST_CASE("frozen mask keeps value and moments") {
  Rng rng(4);
  ModelParams p = init_params(4, 2, rng);
  AdamState s = AdamState::fresh(p);
  adam_step(p, filled_grads(4, 2, 0.3), s, AdamHyper{}, 1e-3, UpdateMask{false});
  CHECK(p.mask == Vec::Ones(4));
  CHECK(s.m.mask.isZero(0.0));
  CHECK(!s.m.global[0].isZero(0.0));
}

TEST_CASE("adam_step rejects mismatched shapes") {
  ModelParams p = filled(3, 2, 1.0);
  AdamState s = AdamState::fresh(p);
  CHECK_THROWS_WITH_AS(adam_step(p, filled_grads(4, 2, 1.0), s, AdamHyper{}, 1e-4), "shape-mismatch", Error);
}

TEST_CASE("decay divides the rate by 1 + decay*t") {
  ModelParams a = filled(1, 1, 1.0), b = filled(1, 1, 1.0);
  AdamState sa = AdamState::fresh(a), sb = AdamState::fresh(b);
  AdamHyper decayed;
  decayed.decay = 1.0;
  adam_step(a, filled_grads(1, 1, 1.0), sa, decayed, 2e-4);
  adam_step(b, filled_grads(1, 1, 1.0), sb, AdamHyper{}, 1e-4);
  CHECK(a.mask(0) == b.mask(0));
}

TEST_CASE("lr_schedule") {
  const AdamHyper hp;
  CHECK(lr_schedule(0, 10, hp) == 1e-4);
  CHECK(lr_schedule(9, 10, hp) == 1e-5);
  CHECK(lr_schedule(4, 9, hp) == doctest::Approx(3.1622776601683795e-05).epsilon(1e-12));
  CHECK(lr_schedule(0, 1, hp) == 1e-4);
  double prev = 1.0;
  for (int e = 0; e < 37; ++e) {
    const double lr = lr_schedule(e, 37, hp);
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("AdamHyper validation") {
  AdamHyper hp;
  CHECK_NOTHROW(hp.validate());
  hp.beta1 = 1.0;
  CHECK_THROWS_AS(hp.validate(), Error);
  hp = AdamHyper{};
  hp.lr_end = 1e-3;
  CHECK_THROWS_AS(hp.validate(), Error);
}
