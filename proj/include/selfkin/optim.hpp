#pragma once

#include "selfkin/model.hpp"

namespace selfkin {

/// Adam hyperparameters. Defaults are the published training settings.
struct AdamHyper {
  double lr_start = 1e-4;
  double lr_end = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double decay = 0.0;

  /// Throws Error("invalid-hyper") when the invariants do not hold.
  void validate() const;
};

struct AdamState {
  ParamBlock<double> m;
  ParamBlock<double> v;
  long long t = 0;

  static AdamState fresh(const ModelParams& params);
};

/// Which tensors an update may touch. Frozen tensors keep their values and
/// moments bitwise.
struct UpdateMask {
  bool mask = true;
};

/// One bias-corrected Adam step in place. The effective rate is
/// lr_now / (1 + decay * t) with t the post-increment step count.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamHyper& hyper, double lr_now, UpdateMask update = {});

/// Log-linear interpolation from lr_start (epoch 0) to lr_end (last epoch).
double lr_schedule(long long epoch, long long total_epochs, const AdamHyper& hyper);

}  // namespace selfkin
