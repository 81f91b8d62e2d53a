#include "selfkin/data.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "selfkin/rng.hpp"

namespace selfkin {

static_assert(std::endian::native == std::endian::little, "feature I/O assumes a little-endian host");

namespace {

constexpr std::array<std::string_view, kNumRelations> kCodes{
    "BB", "SS", "SIBS", "FD", "FS", "MD", "MS", "GFGD", "GFGS", "GMGD", "GMGS"};
constexpr char kMagic[4] = {'S', 'K', 'F', 'V'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T))) throw Error("corrupt-file", "truncated");
  return value;
}

std::string trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return std::string(s);
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim_cr(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view relation_code(Relation r) { return kCodes.at(static_cast<std::size_t>(r)); }

std::optional<Relation> parse_relation(std::string_view code) {
  for (int k = 0; k < kNumRelations; ++k)
    if (kCodes[static_cast<std::size_t>(k)] == code) return static_cast<Relation>(k);
  return std::nullopt;
}

void FeatureStore::add(const std::string& id, Vec v) {
  if (v.size() != dim_) throw Error("shape-mismatch", id);
  if (!vectors_.emplace(id, std::move(v)).second) throw Error("duplicate-id", id);
}

const Vec& FeatureStore::at(const std::string& id) const {
  const auto it = vectors_.find(id);
  if (it == vectors_.end()) throw Error("unknown-face-id", id);
  return it->second;
}

void save_features(const FeatureStore& store, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("io-error", path.string());
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(store.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(store.dim()));
  for (const auto& [id, v] : store.entries()) {
    if (id.size() > 0xFFFF) throw Error("id-too-long", id);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (Index t = 0; t < v.size(); ++t) put<float>(os, static_cast<float>(v(t)));
  }
  if (!os) throw Error("io-error", path.string());
}

FeatureStore load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("io-error", path.string());
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw Error("not-a-feature-file");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw Error("corrupt-file", "version " + std::to_string(version));
  const auto count = get<std::uint32_t>(is);
  const auto dim = get<std::uint32_t>(is);

  FeatureStore store(static_cast<Index>(dim));
  std::vector<float> buf(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const auto len = get<std::uint16_t>(is);
    std::string id(len, '\0');
    if (!is.read(id.data(), len)) throw Error("corrupt-file", "truncated");
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(dim * sizeof(float))))
      throw Error("corrupt-file", "record " + std::to_string(r) + " shorter than dim");
    Vec v(static_cast<Index>(dim));
    for (std::uint32_t t = 0; t < dim; ++t) v(t) = static_cast<double>(buf[t]);
    if (store.contains(id)) throw Error("corrupt-file", "duplicate id " + id);
    store.add(id, std::move(v));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw Error("corrupt-file", "trailing bytes");
  return store;
}

std::vector<PairSample> parse_pairs(std::string_view text) {
  std::vector<PairSample> pairs;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_cr(line).empty()) continue;
    const auto fields = split_csv(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"id1", "id2", "label", "relation"})
        throw Error("bad-header", std::to_string(line_no));
      header_seen = true;
      continue;
    }
    const std::string where = std::to_string(line_no);
    if (fields.size() != 4) throw Error("bad-row", where);
    PairSample p;
    p.id1 = fields[0];
    p.id2 = fields[1];
    if (p.id1.empty() || p.id2.empty() || p.id1 == p.id2) throw Error("bad-row", where);
    if (fields[2] == "1") p.kin = true;
    else if (fields[2] == "0") p.kin = false;
    else throw Error("bad-label", where);
    const auto rel = parse_relation(fields[3]);
    if (!rel) throw Error("unknown-relation", where);
    p.relation = *rel;
    pairs.push_back(std::move(p));
  }
  if (!header_seen) throw Error("bad-header", "missing");
  return pairs;
}

std::vector<PairSample> load_pairs(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("io-error", path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_pairs(ss.str());
}

void save_pairs(const std::vector<PairSample>& pairs, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("io-error", path.string());
  os << "id1,id2,label,relation\n";
  for (const auto& p : pairs)
    os << p.id1 << ',' << p.id2 << ',' << (p.kin ? 1 : 0) << ',' << relation_code(p.relation) << '\n';
  if (!os) throw Error("io-error", path.string());
}

std::vector<PairSample> filter_relation(const std::vector<PairSample>& pairs, Relation r) {
  std::vector<PairSample> out;
  for (const auto& p : pairs)
    if (p.relation == r) out.push_back(p);
  return out;
}

SynthData gen_synthetic(const SynthConfig& cfg) {
  if (cfg.dim < 1 || cfg.latent_dim < 1 || cfg.latent_dim > cfg.dim || !(cfg.noise_sigma >= 0.0))
    throw Error("invalid-config");
  if (cfg.pairs_per_class < 1) throw Error("invalid-config", "pairs_per_class");
  if (cfg.projection == SynthProjection::identity && cfg.latent_dim != cfg.dim)
    throw Error("invalid-config", "identity projection needs latent_dim == dim");

  Rng rng(cfg.seed);
  Mat a;
  if (cfg.projection == SynthProjection::identity) {
    a = Mat::Identity(cfg.dim, cfg.dim);
  } else {
    a.resize(cfg.dim, cfg.latent_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
    for (Index r = 0; r < a.rows(); ++r)
      for (Index c = 0; c < a.cols(); ++c) a(r, c) = scale * rng.normal();
  }

  const auto latent = [&] {
    Vec z(cfg.latent_dim);
    for (Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
    return z;
  };
  const auto face = [&](const Vec& z) {
    Vec f = a * z;
    if (cfg.noise_sigma > 0.0)
      for (Index k = 0; k < f.size(); ++k) f(k) += cfg.noise_sigma * rng.normal();
    // Round through f32 so the in-memory store matches what the file holds.
    for (Index k = 0; k < f.size(); ++k) f(k) = static_cast<double>(static_cast<float>(f(k)));
    return f;
  };

  SynthData out{FeatureStore(cfg.dim), {}};
  std::array<std::size_t, 2> per_class_count{};
  for (Index k = 0; k < 2 * cfg.pairs_per_class; ++k) {
    const bool kin = (k % 2) == 0;
    const std::string base = "s" + std::to_string(k);
    const Vec z1 = latent();
    const Vec z2 = kin ? z1 : latent();
    out.store.add(base + "a", face(z1));
    out.store.add(base + "b", face(z2));
    auto& n = per_class_count[kin ? 0 : 1];
    out.pairs.push_back({base + "a", base + "b", kin, kRelations[n % kNumRelations]});
    ++n;
  }
  return out;
}

std::pair<std::vector<PairSample>, std::vector<PairSample>> split_holdout(
    const std::vector<PairSample>& pairs, std::size_t per_class) {
  std::array<std::size_t, 2> total{};
  for (const auto& p : pairs) ++total[p.kin ? 0 : 1];
  std::array<std::size_t, 2> seen{};
  std::pair<std::vector<PairSample>, std::vector<PairSample>> out;
  for (const auto& p : pairs) {
    const std::size_t c = p.kin ? 0 : 1;
    const bool hold = seen[c] + per_class >= total[c];
    ++seen[c];
    (hold ? out.second : out.first).push_back(p);
  }
  return out;
}

double cosine_similarity(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error("shape-mismatch");
  const double denom = a.norm() * b.norm();
  return denom > 0.0 ? a.dot(b) / denom : 0.0;
}

}  // namespace selfkin
