#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfkin/numerics.hpp"

namespace selfkin {

/// FIW relation types, in the order used by every report.
enum class Relation : int { BB = 0, SS, SIBS, FD, FS, MD, MS, GFGD, GFGS, GMGD, GMGS };
inline constexpr int kNumRelations = 11;
inline constexpr std::array<Relation, kNumRelations> kRelations{
    Relation::BB, Relation::SS, Relation::SIBS, Relation::FD, Relation::FS, Relation::MD,
    Relation::MS, Relation::GFGD, Relation::GFGS, Relation::GMGD, Relation::GMGS};

std::string_view relation_code(Relation r);
std::optional<Relation> parse_relation(std::string_view code);

/// Face-ID to descriptor map. Vectors are held in f64 and written as f32.
class FeatureStore {
 public:
  explicit FeatureStore(Index dim = 0) : dim_(dim) {}

  Index dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.count(id) != 0; }

  /// Throws "shape-mismatch" on a wrong length and "duplicate-id" on reuse.
  void add(const std::string& id, Vec v);
  /// Throws "unknown-face-id".
  const Vec& at(const std::string& id) const;

  const std::map<std::string, Vec>& entries() const { return vectors_; }
  bool operator==(const FeatureStore&) const = default;

 private:
  Index dim_;
  std::map<std::string, Vec> vectors_;
};

/// Binary layout, little-endian: "SKFV", u32 version=1, u32 count, u32 dim,
/// then per record u16 id_len, id bytes, dim x f32.
void save_features(const FeatureStore& store, const std::filesystem::path& path);
FeatureStore load_features(const std::filesystem::path& path);

struct PairSample {
  std::string id1;
  std::string id2;
  bool kin = false;
  Relation relation = Relation::BB;
  bool operator==(const PairSample&) const = default;
};

/// CSV with header "id1,id2,label,relation"; label 1 = kin, 0 = non-kin.
std::vector<PairSample> parse_pairs(std::string_view text);
std::vector<PairSample> load_pairs(const std::filesystem::path& path);
void save_pairs(const std::vector<PairSample>& pairs, const std::filesystem::path& path);

std::vector<PairSample> filter_relation(const std::vector<PairSample>& pairs, Relation r);

enum class SynthProjection { random, identity };

struct SynthConfig {
  Index dim = 64;
  Index latent_dim = 8;
  double noise_sigma = 0.3;
  Index pairs_per_class = 1000;
  std::uint64_t seed = 5;
  /// identity requires latent_dim == dim.
  SynthProjection projection = SynthProjection::random;
};

struct SynthData {
  FeatureStore store;
  std::vector<PairSample> pairs;
};

/// Kin pair: two faces A z + e with one shared latent z. Non-kin: independent
/// latents. A is dim x latent_dim with N(0, 1/latent_dim) entries, e is
/// N(0, sigma^2). Pairs alternate kin/non-kin; relations cycle through the
/// eleven codes per class.
SynthData gen_synthetic(const SynthConfig& cfg);

/// Moves the last `per_class` kin and last `per_class` non-kin pairs into the
/// second list, preserving order.
std::pair<std::vector<PairSample>, std::vector<PairSample>> split_holdout(
    const std::vector<PairSample>& pairs, std::size_t per_class);

double cosine_similarity(const Vec& a, const Vec& b);

}  // namespace selfkin
