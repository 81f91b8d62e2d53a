#include "selfkin/model.hpp"

#include <cmath>

namespace selfkin {

namespace {

void fill_uniform(Vec& v, double scale, Rng& rng) {
  for (Index k = 0; k < v.size(); ++k) v(k) = rng.uniform(-scale, scale);
}

void fill_uniform(Mat& m, double scale, Rng& rng) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-scale, scale);
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

Vec ForwardCache::global_input(Branch b) const {
  const int j = idx(b);
  if (!dropout_mask) return x_local[j];
  return x_local[j].cwiseProduct((*dropout_mask)[j]);
}

ModelParams init_params(Index n_features, Index n_hidden, Rng& rng) {
  if (n_features < 1 || n_hidden < 1) throw Error("invalid-shape");
  ModelParams p(ParamBlock<double>::zeros(n_features, n_hidden));
  p.mask.setOnes();
  const double local_scale = 1.0 / std::sqrt(2.0);
  const double global_scale = 1.0 / std::sqrt(static_cast<double>(n_features));
  for (auto& branch : p.local)
    for (auto& v : branch) fill_uniform(v, local_scale, rng);
  for (auto& m : p.global) fill_uniform(m, global_scale, rng);
  return p;
}

ForwardCache forward(const ModelParams& params, const Vec& x1, const Vec& x2,
                     const ForwardOptions& opts, Rng* rng) {
  const Index n = params.n_features();
  if (!params.well_formed() || x1.size() != n || x2.size() != n) throw Error("shape-mismatch");
  if (!(opts.dropout_rate >= 0.0 && opts.dropout_rate < 1.0)) throw Error("invalid-dropout");
  const bool dropout = opts.training && opts.dropout_rate > 0.0;
  if (dropout && rng == nullptr) throw Error("missing-rng");

  ForwardCache c;
  c.mask_applied = opts.apply_mask;
  c.x_features = {x1, x2};
  for (int i = 0; i < 2; ++i)
    c.x_masked[i] = opts.apply_mask ? params.mask.cwiseProduct(c.x_features[i]) : c.x_features[i];

  for (int j = 0; j < 2; ++j) {
    c.local_preact[j] = params.local[j][0].cwiseProduct(c.x_masked[0]) +
                        params.local[j][1].cwiseProduct(c.x_masked[1]);
    c.x_local[j] = relu(c.local_preact[j]);
  }

  if (dropout) {
    const double keep = 1.0 - opts.dropout_rate;
    const double scale = 1.0 / keep;
    std::array<Vec, 2> masks;
    for (auto& m : masks) {
      m.resize(n);
      for (Index t = 0; t < n; ++t) m(t) = rng->uniform() < keep ? scale : 0.0;
    }
    c.dropout_mask = std::move(masks);
  }

  for (Branch b : kBranches) {
    const int j = idx(b);
    c.global_preact[j] = params.global[j] * c.global_input(b);
    c.x_global[j] = relu(c.global_preact[j]);
    c.x_globavg[j] = mean(c.x_global[j]);
  }
  c.probs = softmax2(c.x_globavg[0], c.x_globavg[1]);
  return c;
}

LossBreakdown loss_total(const ModelParams& params, const ForwardCache& cache,
                         const Label& label, double lambda_cls, double lambda_mask) {
  LossBreakdown l;
  for (Branch b : kBranches) {
    const double y = label.y(b);
    if (y != 0.0) l.soft -= y * std::log(clamp_prob(cache.prob(b)));
  }
  double sq = 0.0;
  for (int j = 0; j < 2; ++j) {
    sq += l2_norm_sq(params.local[j][0]) + l2_norm_sq(params.local[j][1]);
    sq += l2_norm_sq(params.global[j]);
  }
  l.reg_classifier = lambda_cls * sq;
  l.reg_mask = lambda_mask / static_cast<double>(params.n_features()) * l1_norm(params.mask);
  l.total = l.soft + l.reg_classifier + l.reg_mask;
  return l;
}

std::array<double, 2> logit_gradient(const ForwardCache& cache, const Label& label) {
  return {cache.probs.first - label.y(Branch::kin), cache.probs.second - label.y(Branch::nonkin)};
}

namespace {

void check_cache(const ModelParams& params, const ForwardCache& cache) {
  const Index n = params.n_features();
  const Index h = params.n_hidden();
  if (!params.well_formed()) throw Error("stale-cache");
  for (int i = 0; i < 2; ++i) {
    if (cache.x_features[i].size() != n || cache.x_masked[i].size() != n) throw Error("stale-cache");
    if (cache.local_preact[i].size() != n || cache.x_local[i].size() != n) throw Error("stale-cache");
    if (cache.global_preact[i].size() != h || cache.x_global[i].size() != h) throw Error("stale-cache");
  }
  // Recomputing the cheap O(n) stages catches mask or local weights that
  // changed after the forward pass.
  for (int i = 0; i < 2; ++i) {
    const Vec masked =
        cache.mask_applied ? Vec(params.mask.cwiseProduct(cache.x_features[i])) : cache.x_features[i];
    if (masked != cache.x_masked[i]) throw Error("stale-cache");
  }
  for (int j = 0; j < 2; ++j) {
    const Vec pre = params.local[j][0].cwiseProduct(cache.x_masked[0]) +
                    params.local[j][1].cwiseProduct(cache.x_masked[1]);
    if (pre != cache.local_preact[j]) throw Error("stale-cache");
  }
}

}  // namespace

Gradients backward(const ModelParams& params, const ForwardCache& cache, const Label& label,
                   double lambda_cls, double lambda_mask) {
  check_cache(params, cache);
  const Index n = params.n_features();
  const auto h = static_cast<double>(params.n_hidden());
  const auto dz = logit_gradient(cache, label);

  Gradients g = Gradients::zeros_like(params);
  std::array<Vec, 2> d_local_pre;
  for (Branch b : kBranches) {
    const int j = idx(b);
    // Averaging spreads dz/h over every hidden unit; the ReLU gate keeps active ones.
    const Vec d_global_pre = (dz[j] / h) * relu_gate(cache.global_preact[j]);
    g.global[j].noalias() = d_global_pre * cache.global_input(b).transpose();

    Vec d_local = params.global[j].transpose() * d_global_pre;
    if (cache.dropout_mask) d_local = d_local.cwiseProduct((*cache.dropout_mask)[j]);
    d_local_pre[j] = d_local.cwiseProduct(relu_gate(cache.local_preact[j]));

    for (int i = 0; i < 2; ++i) g.local[j][i] = d_local_pre[j].cwiseProduct(cache.x_masked[i]);
  }

  if (cache.mask_applied) {
    // Both images and both branches feed the shared mask weight.
    for (int i = 0; i < 2; ++i) {
      const Vec d_masked = d_local_pre[0].cwiseProduct(params.local[0][i]) +
                           d_local_pre[1].cwiseProduct(params.local[1][i]);
      g.mask += d_masked.cwiseProduct(cache.x_features[i]);
    }
  }

  const double two_l2 = 2.0 * lambda_cls;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) g.local[j][i] += two_l2 * params.local[j][i];
    g.global[j] += two_l2 * params.global[j];
  }
  g.mask += (lambda_mask / static_cast<double>(n)) * sign(params.mask);
  return g;
}

}  // namespace selfkin
