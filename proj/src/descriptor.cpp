#include "selfkin/descriptor.hpp"

#include <cmath>

namespace selfkin {

Vec DescriptorBackend::describe(const std::string&) const { throw Error("unsupported", "id lookup"); }

Vec DescriptorBackend::describe(const RasterImage&) const { throw Error("unsupported", "image input"); }

ToyProjectionBackend::ToyProjectionBackend(Index dim, std::uint64_t seed, int width, int height,
                                           int channels)
    : width_(width), height_(height), channels_(channels) {
  if (dim < 1 || width < 1 || height < 1 || (channels != 1 && channels != 3))
    throw Error("invalid-shape");
  const Index in = static_cast<Index>(width) * height * channels;
  const double scale = 1.0 / std::sqrt(static_cast<double>(in));
  Rng rng(seed);
  projection_.resize(dim, in);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < in; ++c) projection_(r, c) = scale * rng.normal();
}

Vec ToyProjectionBackend::describe(const RasterImage& img) const {
  if (!img.valid() || img.width != width_ || img.height != height_ || img.channels != channels_)
    throw Error("shape-mismatch");
  Vec x(static_cast<Index>(img.pixels.size()));
  for (std::size_t k = 0; k < img.pixels.size(); ++k) x(static_cast<Index>(k)) = img.pixels[k] / 255.0;
  return relu(projection_ * x);
}

}  // namespace selfkin
