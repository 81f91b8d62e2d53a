#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "selfkin/model.hpp"

namespace selfkin {

/// Parameter groups with independent gradient blocks.
enum class ParamGroup : int { mask = 0, local_kin, local_nonkin, global_kin, global_nonkin };
inline constexpr int kNumGroups = 5;
const char* group_name(ParamGroup g);

struct GroupStats {
  double max_rel_error = 0.0;
  long long checked = 0;
  long long skipped = 0;
};

struct GradCheckReport {
  std::array<GroupStats, kNumGroups> groups{};
  double tolerance = 0.0;
  int trials = 0;
  int regenerated = 0;
  bool pass = false;

  double max_rel_error() const;
  long long checked() const;
  long long skipped() const;
};

/// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b);

/// Central difference (f(x + eps) - f(x - eps)) / (2 eps).
double central_difference(const std::function<double(double)>& f, double x, double eps);

/// Total loss of one pair recomputed from scratch with plain loops in long
/// double. Shares no code with forward()/loss_total(); dropout is off.
long double reference_loss(const ModelParams& params, const Vec& x1, const Vec& x2,
                           const Label& label, double lambda_cls, double lambda_mask);

/// Numerical gradient of reference_loss for every scalar weight.
Gradients finite_diff_grad(const ModelParams& params, const Vec& x1, const Vec& x2,
                           const Label& label, double lambda_cls, double lambda_mask,
                           double eps = 1e-6);

struct GradCheckOptions {
  double lambda_cls = 1e-5;
  double lambda_mask = 0.5;
  double eps = 1e-6;
  double kink = 1e-3;
  double max_skip_fraction = 0.2;
  int max_regenerations = 5;
};

/// Random instances, analytic backward vs finite_diff_grad on every coordinate.
/// Coordinates whose perturbation moves a preactivation lying within `kink`
/// of zero (or a mask weight within `kink` of zero) are skipped and counted.
GradCheckReport run_gradcheck(Index n_features, Index n_hidden, int trials, std::uint64_t seed,
                              double tolerance, const GradCheckOptions& opts = {});

/// Fixed-field text table, one row per group plus a summary line.
std::string format_report(const GradCheckReport& report);

}  // namespace selfkin
