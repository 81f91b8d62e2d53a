#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "selfkin/data.hpp"
#include "selfkin/image.hpp"

namespace selfkin {

/// Source of per-face descriptors standing in for the frozen face network.
class DescriptorBackend {
 public:
  virtual ~DescriptorBackend() = default;
  virtual Index dim() const = 0;
  /// Lookup by face ID. Backends without a store throw "unsupported".
  virtual Vec describe(const std::string& id) const;
  /// Embedding of an image. Backends without an image path throw "unsupported".
  virtual Vec describe(const RasterImage& img) const;
};

/// Precomputed embeddings, e.g. real face-network features written in the
/// feature-file format.
class FileBackend final : public DescriptorBackend {
 public:
  explicit FileBackend(FeatureStore store) : store_(std::move(store)) {}
  Index dim() const override { return store_.dim(); }
  Vec describe(const std::string& id) const override { return store_.at(id); }
  using DescriptorBackend::describe;
  const FeatureStore& store() const { return store_; }

 private:
  FeatureStore store_;
};

/// Deterministic stand-in: pixels scaled to [0,1], a seeded Gaussian
/// projection P (dim x W*H*C, entries N(0, 1/(W*H*C))), then ReLU.
class ToyProjectionBackend final : public DescriptorBackend {
 public:
  ToyProjectionBackend(Index dim, std::uint64_t seed, int width, int height, int channels);
  Index dim() const override { return projection_.rows(); }
  Vec describe(const RasterImage& img) const override;
  using DescriptorBackend::describe;

 private:
  int width_;
  int height_;
  int channels_;
  Mat projection_;
};

}  // namespace selfkin
