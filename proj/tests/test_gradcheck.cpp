#include <doctest.h>

#include <chrono>
#include <cmath>

#include "selfkin/gradcheck.hpp"

using namespace selfkin;

TEST_CASE("central difference of a quadratic") {
  const double g = central_difference([](double w) { return w * w; }, 3.0, 1e-6);
  CHECK(std::fabs(g - 6.0) <= 1e-6);
}

TEST_CASE("relative error metric") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == 0.5);
  CHECK(relative_error(1.0, 2.0) == relative_error(2.0, 1.0));
  CHECK(relative_error(0.0, 1e-9) == doctest::Approx(0.1));
}

TEST_CASE("reference loss agrees with loss_total") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    ModelParams p = init_params(7, 3, rng);
    for (Index t = 0; t < 7; ++t) p.mask(t) = rng.uniform(-1, 1);
    Vec a(7), b(7);
    for (Index t = 0; t < 7; ++t) {
      a(t) = rng.uniform(0, 2);
      b(t) = rng.uniform(0, 2);
    }
    const Label y = Label::from_kin(trial % 2 == 0);
    const double fast = loss_total(p, forward(p, a, b), y, 1e-3, 0.5).total;
    const auto slow = static_cast<double>(reference_loss(p, a, b, y, 1e-3, 0.5));
    CHECK(fast == doctest::Approx(slow).epsilon(1e-13));
  }
}

TEST_CASE("absent feature has zero mask gradient") {
  Rng rng(22);
  ModelParams p = init_params(4, 3, rng);
  Vec a = Vec::Constant(4, 0.7), b = Vec::Constant(4, 1.3);
  a(2) = 0.0;
  b(2) = 0.0;
  const Gradients g = finite_diff_grad(p, a, b, Label::kin(), 1e-5, 0.0);
  CHECK(g.mask(2) == 0.0);
}

TEST_CASE("analytic gradients match finite differences on random instances") {
  // 100 instances of n=16, h=8 without dropout, every group.
  const GradCheckReport r = run_gradcheck(16, 8, 100, 2024, 1e-4);
  CHECK(r.pass);
  for (const auto& g : r.groups) {
    CHECK(g.checked > 0);
    CHECK(g.max_rel_error < 1e-4);
  }
  CHECK(static_cast<double>(r.skipped()) < 0.2 * static_cast<double>(r.checked() + r.skipped()));
}

TEST_CASE("run_gradcheck examples") {
  const auto start = std::chrono::steady_clock::now();
  const GradCheckReport r = run_gradcheck(16, 8, 20, 1, 1e-4);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(r.pass);
  CHECK(seconds < 5.0);

  CHECK(run_gradcheck(1, 1, 1, 77, 1e-4).pass);
  CHECK_FALSE(run_gradcheck(16, 8, 3, 1, 0.0).pass);
}

TEST_CASE("gradcheck catches a wrong gradient") {
  Rng rng(23);
  ModelParams p = init_params(6, 4, rng);
  Vec a = Vec::Constant(6, 0.9), b = Vec::Constant(6, 0.4);
  const ForwardCache c = forward(p, a, b);
  Gradients g = backward(p, c, Label::kin(), 1e-5, 0.5);
  const Gradients n = finite_diff_grad(p, a, b, Label::kin(), 1e-5, 0.5);
  g.mask(0) *= 1.01;
  CHECK(relative_error(g.mask(0), n.mask(0)) > 1e-3);
}

TEST_CASE("report formatting") {
  const GradCheckReport r = run_gradcheck(4, 2, 2, 5, 1e-4);
  const std::string text = format_report(r);
  CHECK(text.find("global_nonkin") != std::string::npos);
  CHECK(text.find("result=PASS") != std::string::npos);
}
