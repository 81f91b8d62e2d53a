#include "selfkin/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace selfkin {

namespace {

using LParams = ParamBlock<long double>;

LParams widen(const ModelParams& p) {
  LParams out;
  out.mask = p.mask.cast<long double>();
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) out.local[j][i] = p.local[j][i].cast<long double>();
    out.global[j] = p.global[j].cast<long double>();
  }
  return out;
}

long double reference_loss_wide(const LParams& p, const VecX<long double>& x1,
                                const VecX<long double>& x2, const Label& label,
                                long double lambda_cls, long double lambda_mask) {
  const Index n = p.mask.size();
  const Index h = p.global[0].rows();
  std::array<long double, 2> avg{};
  std::vector<long double> local(static_cast<std::size_t>(n));
  for (int j = 0; j < 2; ++j) {
    for (Index t = 0; t < n; ++t) {
      const long double v = p.local[j][0](t) * (p.mask(t) * x1(t)) +
                            p.local[j][1](t) * (p.mask(t) * x2(t));
      local[static_cast<std::size_t>(t)] = v > 0 ? v : 0;
    }
    long double total = 0;
    for (Index l = 0; l < h; ++l) {
      long double s = 0;
      for (Index t = 0; t < n; ++t) s += p.global[j](l, t) * local[static_cast<std::size_t>(t)];
      total += s > 0 ? s : 0;
    }
    avg[static_cast<std::size_t>(j)] = total / static_cast<long double>(h);
  }
  const long double top = std::max(avg[0], avg[1]);
  const long double e0 = std::exp(avg[0] - top);
  const long double e1 = std::exp(avg[1] - top);
  const long double p_true = (label.is_kin() ? e0 : e1) / (e0 + e1);
  const long double clamped =
      std::clamp(p_true, static_cast<long double>(kProbClamp), 1.0L - kProbClamp);
  long double loss = -std::log(clamped);

  long double sq = 0;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i)
      for (Index t = 0; t < n; ++t) sq += p.local[j][i](t) * p.local[j][i](t);
    for (Index l = 0; l < h; ++l)
      for (Index t = 0; t < n; ++t) sq += p.global[j](l, t) * p.global[j](l, t);
  }
  long double l1 = 0;
  for (Index t = 0; t < n; ++t) l1 += std::fabs(p.mask(t));
  return loss + lambda_cls * sq + lambda_mask / static_cast<long double>(n) * l1;
}

template <typename F>
double probe(long double& slot, long double eps, F&& loss) {
  const long double saved = slot;
  slot = saved + eps;
  const long double up = loss();
  slot = saved - eps;
  const long double down = loss();
  slot = saved;
  return static_cast<double>((up - down) / (2 * eps));
}

}  // namespace

const char* group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::mask: return "mask";
    case ParamGroup::local_kin: return "local_kin";
    case ParamGroup::local_nonkin: return "local_nonkin";
    case ParamGroup::global_kin: return "global_kin";
    case ParamGroup::global_nonkin: return "global_nonkin";
  }
  return "?";
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& g : groups) m = std::max(m, g.max_rel_error);
  return m;
}

long long GradCheckReport::checked() const {
  long long c = 0;
  for (const auto& g : groups) c += g.checked;
  return c;
}

long long GradCheckReport::skipped() const {
  long long c = 0;
  for (const auto& g : groups) c += g.skipped;
  return c;
}

double relative_error(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-8});
  return std::fabs(a - b) / denom;
}

double central_difference(const std::function<double(double)>& f, double x, double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

long double reference_loss(const ModelParams& params, const Vec& x1, const Vec& x2,
                           const Label& label, double lambda_cls, double lambda_mask) {
  if (!params.well_formed() || x1.size() != params.n_features() ||
      x2.size() != params.n_features())
    throw Error("shape-mismatch");
  return reference_loss_wide(widen(params), x1.cast<long double>(), x2.cast<long double>(),
                             label, lambda_cls, lambda_mask);
}

Gradients finite_diff_grad(const ModelParams& params, const Vec& x1, const Vec& x2,
                           const Label& label, double lambda_cls, double lambda_mask, double eps) {
  if (!params.well_formed() || x1.size() != params.n_features() ||
      x2.size() != params.n_features())
    throw Error("shape-mismatch");
  LParams p = widen(params);
  const VecX<long double> a = x1.cast<long double>();
  const VecX<long double> b = x2.cast<long double>();
  const auto loss = [&] { return reference_loss_wide(p, a, b, label, lambda_cls, lambda_mask); };
  const long double step = eps;

  Gradients g = Gradients::zeros_like(params);
  for (Index t = 0; t < p.mask.size(); ++t) g.mask(t) = probe(p.mask(t), step, loss);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i)
      for (Index t = 0; t < p.local[j][i].size(); ++t)
        g.local[j][i](t) = probe(p.local[j][i](t), step, loss);
    for (Index l = 0; l < p.global[j].rows(); ++l)
      for (Index t = 0; t < p.global[j].cols(); ++t)
        g.global[j](l, t) = probe(p.global[j](l, t), step, loss);
  }
  return g;
}

namespace {

struct Instance {
  ModelParams params;
  Vec x1, x2;
  Label label = Label::kin();
};

Instance sample_instance(Index n, Index h, Rng& rng) {
  Instance in;
  in.params = ModelParams(ParamBlock<double>::zeros(n, h));
  const double gscale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index t = 0; t < n; ++t) in.params.mask(t) = rng.uniform(-1.5, 1.5);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i)
      for (Index t = 0; t < n; ++t) in.params.local[j][i](t) = rng.uniform(-1.0, 1.0);
    for (Index l = 0; l < h; ++l)
      for (Index t = 0; t < n; ++t) in.params.global[j](l, t) = rng.uniform(-gscale, gscale) * 2.0;
  }
  in.x1.resize(n);
  in.x2.resize(n);
  for (Index t = 0; t < n; ++t) in.x1(t) = std::fabs(rng.normal());
  for (Index t = 0; t < n; ++t) in.x2(t) = std::fabs(rng.normal());
  in.label = Label::from_kin(rng.below(2) == 0);
  return in;
}

/// Per-coordinate kink flags laid out like Gradients (1 = skip).
struct KinkMap {
  ParamBlock<double> skip;
  long long total = 0;
  long long skipped = 0;
};

KinkMap kink_map(const ModelParams& p, const ForwardCache& c, double kink) {
  const Index n = p.n_features();
  const Index h = p.n_hidden();
  KinkMap k;
  k.skip = ParamBlock<double>::zeros(n, h);
  std::array<bool, 2> global_near{};
  for (int j = 0; j < 2; ++j)
    global_near[j] = (c.global_preact[j].cwiseAbs().array() < kink).any();

  const auto local_kinky = [&](int j, Index t) {
    const double pre = c.local_preact[j](t);
    return std::fabs(pre) < kink || (pre > 0 && global_near[j]);
  };
  for (int j = 0; j < 2; ++j) {
    for (Index l = 0; l < h; ++l)
      if (std::fabs(c.global_preact[j](l)) < kink) k.skip.global[j].row(l).setOnes();
    for (Index t = 0; t < n; ++t)
      if (local_kinky(j, t)) k.skip.local[j][0](t) = k.skip.local[j][1](t) = 1.0;
  }
  for (Index t = 0; t < n; ++t)
    if (std::fabs(p.mask(t)) < kink || local_kinky(0, t) || local_kinky(1, t)) k.skip.mask(t) = 1.0;

  for_each_tensor(k.skip, k.skip, [&](const auto& s, const auto&) {
    k.total += s.size();
    k.skipped += static_cast<long long>(s.sum());
  });
  return k;
}

template <typename T>
void accumulate(GroupStats& stats, const T& analytic, const T& numeric, const T& skip) {
  for (Index r = 0; r < analytic.rows(); ++r)
    for (Index col = 0; col < analytic.cols(); ++col) {
      if (skip(r, col) != 0.0) {
        ++stats.skipped;
        continue;
      }
      ++stats.checked;
      stats.max_rel_error =
          std::max(stats.max_rel_error, relative_error(analytic(r, col), numeric(r, col)));
    }
}

}  // namespace

GradCheckReport run_gradcheck(Index n_features, Index n_hidden, int trials, std::uint64_t seed,
                              double tolerance, const GradCheckOptions& opts) {
  if (n_features < 1 || n_hidden < 1 || trials < 1) throw Error("invalid-shape");
  GradCheckReport report;
  report.tolerance = tolerance;
  report.trials = trials;
  Rng rng(seed);

  for (int trial = 0; trial < trials; ++trial) {
    Instance in;
    ForwardCache cache;
    KinkMap kinks;
    for (int attempt = 0;; ++attempt) {
      in = sample_instance(n_features, n_hidden, rng);
      cache = forward(in.params, in.x1, in.x2);
      kinks = kink_map(in.params, cache, opts.kink);
      const double frac = static_cast<double>(kinks.skipped) / static_cast<double>(kinks.total);
      if (frac < opts.max_skip_fraction || attempt >= opts.max_regenerations) break;
      ++report.regenerated;
    }

    const Gradients analytic = backward(in.params, cache, in.label, opts.lambda_cls, opts.lambda_mask);
    const Gradients numeric = finite_diff_grad(in.params, in.x1, in.x2, in.label, opts.lambda_cls,
                                               opts.lambda_mask, opts.eps);
    auto& g = report.groups;
    accumulate(g[0], analytic.mask, numeric.mask, kinks.skip.mask);
    for (int i = 0; i < 2; ++i) {
      accumulate(g[1], analytic.local[0][i], numeric.local[0][i], kinks.skip.local[0][i]);
      accumulate(g[2], analytic.local[1][i], numeric.local[1][i], kinks.skip.local[1][i]);
    }
    accumulate(g[3], analytic.global[0], numeric.global[0], kinks.skip.global[0]);
    accumulate(g[4], analytic.global[1], numeric.global[1], kinks.skip.global[1]);
  }

  report.pass = report.checked() > 0 && report.max_rel_error() < tolerance;
  return report;
}

std::string format_report(const GradCheckReport& report) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%-14s %14s %10s %10s\n", "group", "max_rel_err", "checked",
                "skipped");
  os << line;
  for (int k = 0; k < kNumGroups; ++k) {
    const auto& s = report.groups[static_cast<std::size_t>(k)];
    std::snprintf(line, sizeof line, "%-14s %14.6e %10lld %10lld\n",
                  group_name(static_cast<ParamGroup>(k)), s.max_rel_error, s.checked, s.skipped);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-14s %14.6e %10lld %10lld\n", "all", report.max_rel_error(),
                report.checked(), report.skipped());
  os << line;
  std::snprintf(line, sizeof line, "trials=%d regenerated=%d tolerance=%.3e result=%s\n",
                report.trials, report.regenerated, report.tolerance, report.pass ? "PASS" : "FAIL");
  os << line;
  return os.str();
}

}  // namespace selfkin
