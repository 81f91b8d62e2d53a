#include "selfkin/checkpoint.hpp"

#include <fstream>

namespace selfkin {

using nlohmann::json;

bool CheckpointHyper::operator==(const CheckpointHyper& o) const {
  return adam.lr_start == o.adam.lr_start && adam.lr_end == o.adam.lr_end &&
         adam.beta1 == o.adam.beta1 && adam.beta2 == o.adam.beta2 && adam.epsilon == o.adam.epsilon &&
         adam.decay == o.adam.decay && lambda_cls == o.lambda_cls && lambda_mask == o.lambda_mask &&
         dropout_rate == o.dropout_rate && use_mask_layer == o.use_mask_layer;
}

namespace {

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

Vec vec_from(const json& j, Index n) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Index>(values.size()) != n) throw Error("bad-checkpoint", "vector length");
  return Eigen::Map<const Vec>(values.data(), n);
}

Mat mat_from(const json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) throw Error("bad-checkpoint", "matrix rows");
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) m.row(r) = vec_from(j[static_cast<std::size_t>(r)], cols).transpose();
  return m;
}

constexpr const char* kBranchKeys[2] = {"kin", "nonkin"};

}  // namespace

json to_json(const Checkpoint& ckpt) {
  const ModelParams& p = ckpt.params;
  json j;
  j["format"] = "selfkin-model";
  j["version"] = 1;
  j["n_features"] = p.n_features();
  j["n_hidden"] = p.n_hidden();
  j["relation"] = ckpt.relation ? json(std::string(relation_code(*ckpt.relation))) : json(nullptr);
  const auto& h = ckpt.hyper;
  j["hyper"] = {{"lr_start", h.adam.lr_start},   {"lr_end", h.adam.lr_end},
                {"beta1", h.adam.beta1},         {"beta2", h.adam.beta2},
                {"epsilon", h.adam.epsilon},     {"decay", h.adam.decay},
                {"lambda_cls", h.lambda_cls},    {"lambda_mask", h.lambda_mask},
                {"dropout", h.dropout_rate},     {"use_mask_layer", h.use_mask_layer}};
  j["w_mask"] = vec_json(p.mask);
  for (int b = 0; b < 2; ++b) {
    j["w_local"][kBranchKeys[b]] = json::array({vec_json(p.local[b][0]), vec_json(p.local[b][1])});
    j["w_global"][kBranchKeys[b]] = mat_json(p.global[b]);
  }
  if (ckpt.kept_indices) j["kept_indices"] = *ckpt.kept_indices;
  if (ckpt.pruned_from) j["pruned_from"] = *ckpt.pruned_from;
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.at("format") != "selfkin-model") throw Error("bad-checkpoint", "format");
    if (j.at("version") != 1) throw Error("bad-checkpoint", "version");
    const auto n = j.at("n_features").get<Index>();
    const auto h = j.at("n_hidden").get<Index>();
    if (n < 1 || h < 1) throw Error("bad-checkpoint", "dimensions");

    Checkpoint c;
    c.params = ModelParams(ParamBlock<double>::zeros(n, h));
    if (!j.at("relation").is_null()) {
      const auto rel = parse_relation(j.at("relation").get<std::string>());
      if (!rel) throw Error("bad-checkpoint", "relation");
      c.relation = rel;
    }
    const json& hy = j.at("hyper");
    c.hyper.adam.lr_start = hy.at("lr_start");
    c.hyper.adam.lr_end = hy.at("lr_end");
    c.hyper.adam.beta1 = hy.at("beta1");
    c.hyper.adam.beta2 = hy.at("beta2");
    c.hyper.adam.epsilon = hy.at("epsilon");
    c.hyper.adam.decay = hy.at("decay");
    c.hyper.lambda_cls = hy.at("lambda_cls");
    c.hyper.lambda_mask = hy.at("lambda_mask");
    c.hyper.dropout_rate = hy.at("dropout");
    c.hyper.use_mask_layer = hy.value("use_mask_layer", true);

    c.params.mask = vec_from(j.at("w_mask"), n);
    for (int b = 0; b < 2; ++b) {
      const json& loc = j.at("w_local").at(kBranchKeys[b]);
      if (!loc.is_array() || loc.size() != 2) throw Error("bad-checkpoint", "w_local");
      c.params.local[b][0] = vec_from(loc[0], n);
      c.params.local[b][1] = vec_from(loc[1], n);
      c.params.global[b] = mat_from(j.at("w_global").at(kBranchKeys[b]), h, n);
    }
    if (j.contains("kept_indices")) {
      c.kept_indices = j.at("kept_indices").get<std::vector<Index>>();
      if (static_cast<Index>(c.kept_indices->size()) != n) throw Error("bad-checkpoint", "kept_indices");
    }
    if (j.contains("pruned_from")) c.pruned_from = j.at("pruned_from").get<Index>();
    return c;
  } catch (const json::exception& e) {
    throw Error("bad-checkpoint", e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("io-error", path.string());
  os << to_json(ckpt).dump() << '\n';
  if (!os) throw Error("io-error", path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("io-error", path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw Error("bad-checkpoint", e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace selfkin
