#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "selfkin/rng.hpp"

namespace selfkin {

/// 8-bit raster, row-major, channels interleaved.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  static RasterImage blank(int width, int height, int channels, std::uint8_t value = 0);
  std::uint8_t& at(int x, int y, int c) {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  bool valid() const;
  bool operator==(const RasterImage&) const = default;
};

/// Binary PGM (P5) or PPM (P6) with maxval 255. Comments are allowed in the header.
RasterImage read_pnm(const std::filesystem::path& path);
void write_pnm(const RasterImage& img, const std::filesystem::path& path);

/// round(255 * (v / 255)^gamma), halves rounded up, clamped to [0, 255].
std::uint8_t gamma_level(std::uint8_t v, double gamma);
RasterImage apply_gamma(const RasterImage& img, double gamma);
RasterImage flip_horizontal(const RasterImage& img);

/// Augmentation cases 1..5: gamma 2, gamma 1/2, flip, flip + gamma 2,
/// flip + gamma 1/2. Anything else throws "bad-augment-case".
RasterImage augment_image(const RasterImage& img, int aug_case);

/// Uniform over 1..5. With include_identity the range is 0..5 and 0 means
/// "leave the image as is"; augment_image itself rejects 0.
int pick_augmentation(Rng& rng, bool include_identity = false);

}  // namespace selfkin
