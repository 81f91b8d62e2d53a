#include "selfkin/optim.hpp"

#include <cmath>

namespace selfkin {

void AdamHyper::validate() const {
  const bool ok = beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0 &&
                  lr_end > 0.0 && lr_start >= lr_end && decay >= 0.0;
  if (!ok) throw Error("invalid-hyper");
}

AdamState AdamState::fresh(const ModelParams& params) {
  AdamState s;
  s.m = ParamBlock<double>::zeros(params.n_features(), params.n_hidden());
  s.v = s.m;
  return s;
}

namespace {

template <typename T>
void update_tensor(T& w, const T& g, T& m, T& v, const AdamHyper& hp, double lr, double bc1,
                   double bc2) {
  m = hp.beta1 * m + (1.0 - hp.beta1) * g;
  v = hp.beta2 * v + (1.0 - hp.beta2) * g.cwiseProduct(g);
  const double eps = hp.epsilon;
  w.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

}  // namespace

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamHyper& hyper, double lr_now, UpdateMask update) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v))
    throw Error("shape-mismatch");
  if (!(lr_now > 0.0)) throw Error("invalid-hyper");

  state.t += 1;
  const auto t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(hyper.beta1, t);
  const double bc2 = 1.0 - std::pow(hyper.beta2, t);
  const double lr = hyper.decay > 0.0 ? lr_now / (1.0 + hyper.decay * t) : lr_now;

  if (update.mask)
    update_tensor(params.mask, grads.mask, state.m.mask, state.v.mask, hyper, lr, bc1, bc2);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i)
      update_tensor(params.local[j][i], grads.local[j][i], state.m.local[j][i],
                    state.v.local[j][i], hyper, lr, bc1, bc2);
    update_tensor(params.global[j], grads.global[j], state.m.global[j], state.v.global[j], hyper,
                  lr, bc1, bc2);
  }
}

double lr_schedule(long long epoch, long long total_epochs, const AdamHyper& hyper) {
  if (total_epochs <= 1 || epoch <= 0) return hyper.lr_start;
  if (epoch >= total_epochs - 1) return hyper.lr_end;
  const double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
  const double log_lr = std::log(hyper.lr_start) + frac * (std::log(hyper.lr_end) - std::log(hyper.lr_start));
  return std::exp(log_lr);
}

}  // namespace selfkin
