#pragma once

#include <array>
#include <optional>
#include <utility>

#include "selfkin/numerics.hpp"
#include "selfkin/rng.hpp"

namespace selfkin {

/// Class branches of the head. Index 0 is kin, index 1 is non-kin.
enum class Branch : int { kin = 0, nonkin = 1 };
inline constexpr std::array<Branch, 2> kBranches{Branch::kin, Branch::nonkin};
constexpr int idx(Branch b) { return static_cast<int>(b); }

/// Trainable tensors of the head, templated on scalar so Gradients and the
/// Adam moments reuse the same layout.
///
///   mask               n_features, shared by both images
///   local[branch][img] n_features, one weight per feature location, no bias
///   global[branch]     n_hidden x n_features, no bias
template <typename Scalar>
struct ParamBlock {
  VecX<Scalar> mask;
  std::array<std::array<VecX<Scalar>, 2>, 2> local;
  std::array<MatX<Scalar>, 2> global;

  Index n_features() const { return mask.size(); }
  Index n_hidden() const { return global[0].rows(); }

  static ParamBlock zeros(Index n_features, Index n_hidden) {
    ParamBlock p;
    p.mask = VecX<Scalar>::Zero(n_features);
    for (auto& branch : p.local)
      for (auto& v : branch) v = VecX<Scalar>::Zero(n_features);
    for (auto& m : p.global) m = MatX<Scalar>::Zero(n_hidden, n_features);
    return p;
  }

  bool same_shape(const ParamBlock& o) const {
    if (mask.size() != o.mask.size()) return false;
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i)
        if (local[j][i].size() != o.local[j][i].size()) return false;
      if (global[j].rows() != o.global[j].rows() || global[j].cols() != o.global[j].cols())
        return false;
    }
    return true;
  }

  /// True when every tensor has the shape implied by mask and global[0].
  bool well_formed() const {
    const Index n = n_features();
    const Index h = n_hidden();
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i)
        if (local[j][i].size() != n) return false;
      if (global[j].rows() != h || global[j].cols() != n) return false;
    }
    return n > 0 && h > 0;
  }

  bool operator==(const ParamBlock&) const = default;
};

/// Applies f(a_tensor, b_tensor) to every matching tensor pair, in the fixed
/// order mask, local (kin 1, kin 2, nonkin 1, nonkin 2), global (kin, nonkin).
template <typename A, typename B, typename F>
void for_each_tensor(A& a, B& b, F&& f) {
  f(a.mask, b.mask);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) f(a.local[j][i], b.local[j][i]);
  for (int j = 0; j < 2; ++j) f(a.global[j], b.global[j]);
}

struct ModelParams : ParamBlock<double> {
  ModelParams() = default;
  explicit ModelParams(ParamBlock<double> block) : ParamBlock<double>(std::move(block)) {}
};

struct Gradients : ParamBlock<double> {
  Gradients() = default;
  explicit Gradients(ParamBlock<double> block) : ParamBlock<double>(std::move(block)) {}
  static Gradients zeros_like(const ModelParams& p) {
    return Gradients(ParamBlock<double>::zeros(p.n_features(), p.n_hidden()));
  }
};

/// One-hot pair label. kin is (1, 0), non-kin is (0, 1).
class Label {
 public:
  static Label kin() { return Label(true); }
  static Label nonkin() { return Label(false); }
  static Label from_kin(bool is_kin) { return Label(is_kin); }

  bool is_kin() const { return kin_; }
  double y(Branch b) const { return (b == Branch::kin) == kin_ ? 1.0 : 0.0; }
  bool operator==(const Label&) const = default;

 private:
  explicit Label(bool kin) : kin_(kin) {}
  bool kin_;
};

struct LossBreakdown {
  double soft = 0.0;
  double reg_classifier = 0.0;
  double reg_mask = 0.0;
  double total = 0.0;
};

struct ForwardOptions {
  double dropout_rate = 0.0;
  bool training = false;
  /// When false the mask layer is skipped entirely (x_masked = x_features).
  bool apply_mask = true;
};

/// Intermediate activations of one pair. Arrays indexed by image are [0]=first
/// image, [1]=second; arrays indexed by branch use idx(Branch).
struct ForwardCache {
  std::array<Vec, 2> x_features;
  std::array<Vec, 2> x_masked;
  std::array<Vec, 2> local_preact;
  std::array<Vec, 2> x_local;
  /// Inverted-dropout factors (0 or 1/keep) per branch; empty in eval mode.
  std::optional<std::array<Vec, 2>> dropout_mask;
  std::array<Vec, 2> global_preact;
  std::array<Vec, 2> x_global;
  std::array<double, 2> x_globavg{};
  std::pair<double, double> probs{0.5, 0.5};
  bool mask_applied = true;

  double prob(Branch b) const { return b == Branch::kin ? probs.first : probs.second; }
  /// Input of the global layer: x_local with dropout applied.
  Vec global_input(Branch b) const;
};

/// w_mask = 1; local and global weights uniform in +-1/sqrt(fan_in) with
/// fan_in 2 for the local layer and n_features for the global layer.
ModelParams init_params(Index n_features, Index n_hidden, Rng& rng);

ForwardCache forward(const ModelParams& params, const Vec& x1, const Vec& x2,
                     const ForwardOptions& opts = {}, Rng* rng = nullptr);

inline constexpr double kProbClamp = 1e-12;

LossBreakdown loss_total(const ModelParams& params, const ForwardCache& cache,
                         const Label& label, double lambda_cls, double lambda_mask);

Gradients backward(const ModelParams& params, const ForwardCache& cache, const Label& label,
                   double lambda_cls, double lambda_mask);

/// d soft / d x_globavg per branch: prob - y.
std::array<double, 2> logit_gradient(const ForwardCache& cache, const Label& label);

}  // namespace selfkin
