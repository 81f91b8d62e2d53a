#include "selfkin/image.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "selfkin/error.hpp"

namespace selfkin {

RasterImage RasterImage::blank(int width, int height, int channels, std::uint8_t value) {
  if (!(width > 0 && height > 0 && (channels == 1 || channels == 3))) throw Error("shape-mismatch");
  RasterImage img{width, height, channels, {}};
  img.pixels.assign(static_cast<std::size_t>(width) * height * channels, value);
  return img;
}

bool RasterImage::valid() const {
  return width > 0 && height > 0 && (channels == 1 || channels == 3) &&
         pixels.size() == static_cast<std::size_t>(width) * height * channels;
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int header_int(std::istream& is) {
  const std::string tok = header_token(is);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw Error("bad-image", "header");
  return std::stoi(tok);
}

}  // namespace

RasterImage read_pnm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("io-error", path.string());
  const std::string magic = header_token(is);
  int channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw Error("bad-image", "unsupported magic " + magic);
  const int width = header_int(is);
  const int height = header_int(is);
  const int maxval = header_int(is);
  if (width <= 0 || height <= 0) throw Error("bad-image", "geometry");
  if (maxval != 255) throw Error("bad-image", "maxval must be 255");

  RasterImage img = RasterImage::blank(width, height, channels);
  if (!is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size())))
    throw Error("bad-image", "truncated");
  return img;
}

void write_pnm(const RasterImage& img, const std::filesystem::path& path) {
  if (!img.valid()) throw Error("shape-mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("io-error", path.string());
  os << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!os) throw Error("io-error", path.string());
}

std::uint8_t gamma_level(std::uint8_t v, double gamma) {
  const double out = std::floor(255.0 * std::pow(v / 255.0, gamma) + 0.5);
  return static_cast<std::uint8_t>(std::clamp(out, 0.0, 255.0));
}

RasterImage apply_gamma(const RasterImage& img, double gamma) {
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[static_cast<std::size_t>(v)] = gamma_level(static_cast<std::uint8_t>(v), gamma);
  RasterImage out = img;
  for (auto& p : out.pixels) p = lut[p];
  return out;
}

RasterImage flip_horizontal(const RasterImage& img) {
  RasterImage out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(img.width - 1 - x, y, c) = img.at(x, y, c);
  return out;
}

RasterImage augment_image(const RasterImage& img, int aug_case) {
  if (!img.valid()) throw Error("shape-mismatch");
  switch (aug_case) {
    case 1: return apply_gamma(img, 2.0);
    case 2: return apply_gamma(img, 0.5);
    case 3: return flip_horizontal(img);
    case 4: return apply_gamma(flip_horizontal(img), 2.0);
    case 5: return apply_gamma(flip_horizontal(img), 0.5);
    default: throw Error("bad-augment-case", std::to_string(aug_case));
  }
}

int pick_augmentation(Rng& rng, bool include_identity) {
  return include_identity ? static_cast<int>(rng.below(6)) : 1 + static_cast<int>(rng.below(5));
}

}  // namespace selfkin
