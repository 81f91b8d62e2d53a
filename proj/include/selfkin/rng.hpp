#pragma once

#include <array>
#include <cstdint>

namespace selfkin {

/// Portable deterministic generator: xoshiro256** with its state filled from
/// splitmix64(seed). Streams are bit-identical on every platform; nothing
/// here touches <random> distributions, whose outputs are implementation
/// defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) built from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound); rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (cosine branch only, two uniforms per draw).
  double normal();

  /// Independent child stream; consumes one draw from this stream.
  Rng split() { return Rng(next_u64()); }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace selfkin
