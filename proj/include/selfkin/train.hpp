#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <vector>

#include "selfkin/data.hpp"
#include "selfkin/model.hpp"
#include "selfkin/optim.hpp"

namespace selfkin {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 1;
  double dropout_rate = 0.8;
  double lambda_cls = 1e-5;
  double lambda_mask = 0.5;
  /// false: w_mask stays at its initial value and receives no updates.
  bool use_mask_layer = true;
  std::uint64_t seed = 1;
  /// Epochs without a validation improvement before stopping; 0 disables.
  int early_stop_patience = 5;
  AdamHyper adam;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double soft_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  bool operator==(const EpochLog&) const = default;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  /// Index into `epochs` of the returned parameters.
  int best_epoch = -1;
  bool operator==(const TrainLog&) const = default;
};

/// CSV with header epoch,lr,train_loss,soft_loss,train_acc,val_acc.
void write_train_log(const TrainLog& log, std::ostream& os);
void write_train_log(const TrainLog& log, const std::filesystem::path& path);

struct FitResult {
  ModelParams params;
  TrainLog log;
};

/// Called after each epoch with that epoch's log and the current parameters.
using EpochCallback = std::function<void(const EpochLog&, const ModelParams&)>;

/// Mini-batch training: per-epoch seeded shuffle, batch-mean gradients, Adam
/// with the log-linear rate schedule, early stopping on validation accuracy.
/// Returns the parameters of the best validation epoch (first on ties). With
/// no validation pairs, accuracy on the training pairs stands in.
FitResult fit(const TrainConfig& config, const std::vector<PairSample>& train_pairs,
              const std::vector<PairSample>& val_pairs, const FeatureStore& store,
              ModelParams init, const EpochCallback& on_epoch = {});

struct Prediction {
  bool kin = false;
  std::pair<double, double> probs;
};

/// Eval-mode forward; kin only when p_kin > 0.5 strictly.
Prediction predict(const ModelParams& params, const Vec& x1, const Vec& x2);

/// Fraction of pairs whose prediction matches the label; 0 for an empty list.
double accuracy(const ModelParams& params, const std::vector<PairSample>& pairs,
                const FeatureStore& store);

}  // namespace selfkin
