#include "selfkin/train.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

namespace selfkin {

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) throw Error("invalid-config", "epochs and batch must be >= 1");
  if (lambda_cls < 0.0 || lambda_mask < 0.0) throw Error("invalid-config", "lambdas must be >= 0");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("invalid-config", "dropout in [0,1)");
  if (early_stop_patience < 0) throw Error("invalid-config", "patience");
  adam.validate();
}

void write_train_log(const TrainLog& log, std::ostream& os) {
  os << "epoch,lr,train_loss,soft_loss,train_acc,val_acc\n";
  os << std::setprecision(17);
  for (const auto& e : log.epochs)
    os << e.epoch << ',' << e.lr << ',' << e.train_loss << ',' << e.soft_loss << ',' << e.train_acc
       << ',' << e.val_acc << '\n';
}

void write_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("io-error", path.string());
  write_train_log(log, os);
}

Prediction predict(const ModelParams& params, const Vec& x1, const Vec& x2) {
  const auto cache = forward(params, x1, x2);
  return {cache.probs.first > 0.5, cache.probs};
}

double accuracy(const ModelParams& params, const std::vector<PairSample>& pairs,
                const FeatureStore& store) {
  if (pairs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& p : pairs)
    if (predict(params, store.at(p.id1), store.at(p.id2)).kin == p.kin) ++correct;
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

namespace {

struct ResolvedPair {
  const Vec* x1;
  const Vec* x2;
  Label label;
};

std::vector<ResolvedPair> resolve(const std::vector<PairSample>& pairs, const FeatureStore& store) {
  std::vector<ResolvedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({&store.at(p.id1), &store.at(p.id2), Label::from_kin(p.kin)});
  return out;
}

void add_into(Gradients& acc, const Gradients& g) {
  for_each_tensor(acc, g, [](auto& a, const auto& b) { a += b; });
}

void scale(Gradients& g, double s) {
  for_each_tensor(g, g, [s](auto& a, const auto&) { a *= s; });
}

}  // namespace

FitResult fit(const TrainConfig& config, const std::vector<PairSample>& train_pairs,
              const std::vector<PairSample>& val_pairs, const FeatureStore& store,
              ModelParams init, const EpochCallback& on_epoch) {
  config.validate();
  if (train_pairs.empty()) throw Error("empty-dataset");
  if (!init.well_formed() || init.n_features() != store.dim()) throw Error("shape-mismatch");

  const auto train = resolve(train_pairs, store);
  resolve(val_pairs, store);  // fail fast on unknown IDs
  const auto& selection_pairs = val_pairs.empty() ? train_pairs : val_pairs;

  Rng rng(config.seed);
  ModelParams params = std::move(init);
  AdamState state = AdamState::fresh(params);
  const ForwardOptions opts{config.dropout_rate, true, config.use_mask_layer};
  const UpdateMask update{config.use_mask_layer};

  FitResult result{params, {}};
  double best_val = -1.0;
  int since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config.epochs, config.adam);
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);

    double loss_sum = 0.0;
    double soft_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      Gradients acc = Gradients::zeros_like(params);
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = train[order[k]];
        const ForwardCache cache = forward(params, *s.x1, *s.x2, opts, &rng);
        const LossBreakdown loss = loss_total(params, cache, s.label, config.lambda_cls, config.lambda_mask);
        loss_sum += loss.total;
        soft_sum += loss.soft;
        if ((cache.probs.first > 0.5) == s.label.is_kin()) ++correct;
        add_into(acc, backward(params, cache, s.label, config.lambda_cls, config.lambda_mask));
      }
      scale(acc, 1.0 / static_cast<double>(end - start));
      adam_step(params, acc, state, config.adam, lr, update);
    }

    const auto n = static_cast<double>(train.size());
    EpochLog entry{epoch, lr, loss_sum / n, soft_sum / n, static_cast<double>(correct) / n,
                   accuracy(params, selection_pairs, store)};
    result.log.epochs.push_back(entry);
    if (on_epoch) on_epoch(entry, params);

    if (entry.val_acc > best_val) {
      best_val = entry.val_acc;
      result.params = params;
      result.log.best_epoch = epoch;
      since_best = 0;
    } else if (config.early_stop_patience > 0 && ++since_best >= config.early_stop_patience) {
      break;
    }
  }
  return result;
}

}  // namespace selfkin
