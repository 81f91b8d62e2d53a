#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "selfkin/error.hpp"
#include "selfkin/image.hpp"

using namespace selfkin;
namespace fs = std::filesystem;

namespace {

RasterImage random_image(int w, int h, int c, Rng& rng) {
  RasterImage img = RasterImage::blank(w, h, c);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

}  // namespace

TEST_CASE("gamma levels") {
  CHECK(gamma_level(128, 2.0) == 64);
  for (double g : {2.0, 0.5}) {
    CHECK(gamma_level(0, g) == 0);
    CHECK(gamma_level(255, g) == 255);
  }
}

TEST_CASE("gamma 1/2 then gamma 2 returns within two levels") {
  int worst = 0;
  for (int v = 0; v < 256; ++v) {
    const auto x = static_cast<std::uint8_t>(v);
    worst = std::max(worst, std::abs(gamma_level(gamma_level(x, 0.5), 2.0) - v));
  }
  CHECK(worst <= 2);
}

TEST_CASE("gamma 2 then gamma 1/2 loses the darkest levels") {
  // Squaring first maps 1..15 to 0, so this order cannot be inverted.
  int worst = 0;
  for (int v = 0; v < 256; ++v) {
    const auto x = static_cast<std::uint8_t>(v);
    worst = std::max(worst, std::abs(gamma_level(gamma_level(x, 2.0), 0.5) - v));
  }
  CHECK(worst == 11);
}

TEST_CASE("flip is an involution") {
  Rng rng(1);
  for (int c : {1, 3}) {
    const RasterImage img = random_image(7, 5, c, rng);
    CHECK(augment_image(augment_image(img, 3), 3) == img);
    const RasterImage f = flip_horizontal(img);
    CHECK(f.at(0, 2, c - 1) == img.at(6, 2, c - 1));
  }
}

TEST_CASE("augmentation cases") {
  Rng rng(2);
  const RasterImage img = random_image(4, 3, 3, rng);
  CHECK(augment_image(img, 1) == apply_gamma(img, 2.0));
  CHECK(augment_image(img, 2) == apply_gamma(img, 0.5));
  CHECK(augment_image(img, 4) == apply_gamma(flip_horizontal(img), 2.0));
  CHECK(augment_image(img, 5) == apply_gamma(flip_horizontal(img), 0.5));
  // Per-pixel maps commute with a flip.
  CHECK(augment_image(img, 4) == flip_horizontal(apply_gamma(img, 2.0)));

  RasterImage extremes = RasterImage::blank(2, 1, 1);
  extremes.pixels = {0, 255};
  for (int c = 1; c <= 5; ++c) {
    const RasterImage out = augment_image(extremes, c);
    CHECK(std::count(out.pixels.begin(), out.pixels.end(), 0) == 1);
    CHECK(std::count(out.pixels.begin(), out.pixels.end(), 255) == 1);
  }
  for (int c : {0, 6, -1}) CHECK_THROWS_WITH_AS(augment_image(img, c), doctest::Contains("bad-augment-case"), Error);
}

TEST_CASE("pick_augmentation is uniform over five cases") {
  Rng a(3), b(3);
  std::array<int, 6> counts{};
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const int c = pick_augmentation(a);
    REQUIRE(c == pick_augmentation(b));
    REQUIRE(c >= 1);
    REQUIRE(c <= 5);
    ++counts[static_cast<std::size_t>(c)];
  }
  double chi2 = 0.0;
  for (int c = 1; c <= 5; ++c) {
    const double freq = counts[static_cast<std::size_t>(c)] / static_cast<double>(n);
    CHECK(std::fabs(freq - 0.2) < 0.01);
    const double diff = counts[static_cast<std::size_t>(c)] - n / 5.0;
    chi2 += diff * diff / (n / 5.0);
  }
  // 99.9th percentile of chi-square with 4 degrees of freedom.
  CHECK(chi2 < 18.47);

  Rng c(4);
  bool saw_identity = false;
  for (int k = 0; k < 1000; ++k) saw_identity |= pick_augmentation(c, true) == 0;
  CHECK(saw_identity);
}

TEST_CASE("PNM round-trip") {
  Rng rng(5);
  const fs::path dir = fs::temp_directory_path() / "selfkin_tests";
  fs::create_directories(dir);
  for (int c : {1, 3}) {
    const RasterImage img = random_image(9, 4, c, rng);
    const fs::path path = dir / (c == 1 ? "img.pgm" : "img.ppm");
    write_pnm(img, path);
    CHECK(read_pnm(path) == img);
  }
}

TEST_CASE("PNM header comments and errors") {
  const fs::path dir = fs::temp_directory_path() / "selfkin_tests";
  fs::create_directories(dir);
  const fs::path path = dir / "comment.pgm";
  {
    std::ofstream os(path, std::ios::binary);
    os << "P5\n# made by hand\n2 1\n255\n";
    os.put(static_cast<char>(10)).put(static_cast<char>(200));
  }
  const RasterImage img = read_pnm(path);
  CHECK(img.width == 2);
  CHECK(img.pixels == std::vector<std::uint8_t>{10, 200});

  {
    std::ofstream os(path, std::ios::binary);
    os << "P2\n2 1\n255\n10 200\n";
  }
  CHECK_THROWS_WITH_AS(read_pnm(path), doctest::Contains("bad-image"), Error);
  {
    std::ofstream os(path, std::ios::binary);
    os << "P5\n2 1\n65535\n";
  }
  CHECK_THROWS_WITH_AS(read_pnm(path), doctest::Contains("bad-image"), Error);
  {
    std::ofstream os(path, std::ios::binary);
    os << "P6\n2 2\n255\nabc";
  }
  CHECK_THROWS_WITH_AS(read_pnm(path), doctest::Contains("bad-image"), Error);
}
