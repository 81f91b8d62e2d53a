#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "selfkin/data.hpp"
#include "selfkin/model.hpp"
#include "selfkin/optim.hpp"

namespace selfkin {

/// Training settings recorded next to the weights under "hyper".
struct CheckpointHyper {
  AdamHyper adam;
  double lambda_cls = 1e-5;
  double lambda_mask = 0.5;
  double dropout_rate = 0.8;
  bool use_mask_layer = true;
  bool operator==(const CheckpointHyper& o) const;
};

struct Checkpoint {
  ModelParams params;
  std::optional<Relation> relation;
  CheckpointHyper hyper;
  /// Set on pruned models: surviving original indices and original width.
  std::optional<std::vector<Index>> kept_indices;
  std::optional<Index> pruned_from;
};

/// {"format":"selfkin-model","version":1,"n_features","n_hidden","relation",
///  "hyper":{...},"w_mask":[...],"w_local":{"kin":[[img1],[img2]],"nonkin":...},
///  "w_global":{"kin":[[row]...],"nonkin":...}} plus "kept_indices" and
/// "pruned_from" when pruned. Doubles use shortest round-trip form.
nlohmann::json to_json(const Checkpoint& ckpt);
/// Throws "bad-checkpoint" on a wrong format tag, version, or shape.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace selfkin
