#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rgbt/common.hpp"
#include "rgbt/image_io.hpp"
#include "rgbt/imaging.hpp"

namespace fs = std::filesystem;
using namespace rgbt;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("rgbt_imaging_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Definition-level erosion: a pixel survives iff the whole disc around it
// lies inside the mask (out of frame counts as background).
Mask erode_by_definition(const Mask& mask, int radius) {
  Mask out = Mask::zeros(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy)
        for (int dx = -radius; dx <= radius && keep; ++dx) {
          if (dx * dx + dy * dy > radius * radius) continue;
          int nx = x + dx, ny = y + dy;
          keep = nx >= 0 && ny >= 0 && nx < mask.width && ny < mask.height &&
                 mask.get(nx, ny);
        }
      if (keep) out.set(x, y, true);
    }
  return out;
}

Mask random_mask(Rng& rng, int w, int h, double density) {
  Mask m = Mask::zeros(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, rng.uniform() < density);
  return m;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("erosion of a rectangle shaves the disc radius off each side") {
  Mask rect = Mask::zeros(20, 16);
  for (int y = 3; y < 13; ++y)
    for (int x = 2; x < 16; ++x) rect.set(x, y, true);  // 14 x 10
  Mask eroded = erode(rect, 2);
  CHECK(eroded.count() == 10 * 6);
  CHECK(eroded.get(4, 5));
  CHECK_FALSE(eroded.get(3, 5));
  CHECK(erode(rect, 0).count() == rect.count());
  CHECK_THROWS_AS(erode(rect, -1), std::invalid_argument);
}

TEST_CASE("erosion matches its definition on random masks") {
  Rng rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    int w = static_cast<int>(rng.uniform_int(1, 32));
    int h = static_cast<int>(rng.uniform_int(1, 32));
    int radius = static_cast<int>(rng.uniform_int(0, 3));
    Mask m = random_mask(rng, w, h, rng.uniform(0.2, 0.9));
    Mask fast = erode(m, radius);
    Mask slow = erode_by_definition(m, radius);
    REQUIRE(fast.same_shape(slow));
    INFO("trial ", trial, " ", w, "x", h, " r=", radius);
    CHECK(fast.bits == slow.bits);
  }
}

TEST_CASE("contour band partitions the mask") {
  Rng rng(13);
  Mask m = random_mask(rng, 24, 24, 0.7);
  Mask interior = erode(m, 2);
  Mask band = contour_band(m, interior);
  CHECK(band.count() + interior.count() == m.count());
  for (size_t i = 0; i < m.bits.size(); ++i) {
    CHECK((band.bits[i] && interior.bits[i]) == false);
    CHECK((band.bits[i] || interior.bits[i]) == (m.bits[i] != 0));
  }

  Mask not_subset = Mask::zeros(24, 24);
  not_subset.set(0, 0, true);
  m.set(0, 0, false);
  CHECK_THROWS_AS(contour_band(m, not_subset), std::invalid_argument);
}

TEST_CASE("masked mean averages exactly the selected pixels") {
  TemperatureGrid g = TemperatureGrid::zeros(4, 2);
  for (int x = 0; x < 4; ++x) {
    g.at(x, 0) = 10.0 + x;
    g.at(x, 1) = 100.0;
  }
  Mask m = Mask::zeros(4, 2);
  m.set(0, 0, true);
  m.set(3, 0, true);
  CHECK(masked_mean(g, m) == doctest::Approx(11.5));
  Mask empty = Mask::zeros(4, 2);
  CHECK_THROWS_AS(masked_mean(g, empty), std::runtime_error);
  Mask wrong = Mask::zeros(3, 2);
  CHECK_THROWS_AS(masked_mean(g, wrong), std::invalid_argument);
}

TEST_CASE("box spans form a normalized partition of the source axis") {
  for (auto [src, dst] : {std::pair{10, 4}, {384, 96}, {7, 7}, {13, 5}}) {
    auto spans = box_spans(src, dst);
    REQUIRE(static_cast<int>(spans.size()) == dst);
    CHECK(spans.front().begin == 0);
    CHECK(spans.back().end == src);
    for (int i = 0; i < dst; ++i) {
      double sum = 0.0;
      for (double w : spans[i].weights) sum += w;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      if (i > 0) CHECK(spans[i].begin >= spans[i - 1].end - 1);
    }
  }
}

TEST_CASE("downscale keeps constants and the global mean") {
  SUBCASE("identity when the size already matches") {
    Rng rng(3);
    TemperatureGrid g = TemperatureGrid::zeros(9, 5);
    for (auto& v : g.celsius) v = rng.uniform(0.0, 50.0);
    TemperatureGrid same = downscale(g, 9, 5);
    CHECK(same.celsius == g.celsius);
  }
  SUBCASE("constant grid stays constant under fractional ratios") {
    TemperatureGrid g = TemperatureGrid::zeros(13, 7);
    for (auto& v : g.celsius) v = 36.25;
    TemperatureGrid d = downscale(g, 5, 3);
    for (double v : d.celsius) CHECK(v == doctest::Approx(36.25).epsilon(1e-12));
  }
  SUBCASE("global mean is preserved") {
    Rng rng(17);
    TemperatureGrid g = TemperatureGrid::zeros(37, 23);
    double sum = 0.0;
    for (auto& v : g.celsius) {
      v = rng.uniform(10.0, 60.0);
      sum += v;
    }
    TemperatureGrid d = downscale(g, 9, 4);
    double dsum = 0.0;
    for (double v : d.celsius) dsum += v;
    CHECK(dsum / d.celsius.size() ==
          doctest::Approx(sum / g.celsius.size()).epsilon(1e-9));
  }
  SUBCASE("phone-camera frame to sensor resolution") {
    ImageU8 big = ImageU8::zeros(4032, 3024, 1);
    Rng rng(29);
    uint64_t sum = 0;
    for (auto& p : big.pixels) {
      p = static_cast<uint8_t>(rng.uniform_int(0, 255));
      sum += p;
    }
    ImageU8 small = downscale(big, 384, 288);
    REQUIRE(small.width == 384);
    REQUIRE(small.height == 288);
    double small_sum = 0;
    for (auto p : small.pixels) small_sum += p;
    double big_mean = static_cast<double>(sum) / big.pixels.size();
    CHECK(small_sum / small.pixels.size() ==
          doctest::Approx(big_mean).epsilon(0.005));  // quantization only
  }
  SUBCASE("constant bytes survive exactly") {
    ImageU8 img = ImageU8::zeros(10, 10, 3);
    for (auto& p : img.pixels) p = 77;
    ImageU8 d = downscale(img, 4, 3);
    for (auto p : d.pixels) CHECK(p == 77);
  }
  SUBCASE("upscaling is refused") {
    TemperatureGrid g = TemperatureGrid::zeros(4, 4);
    CHECK_THROWS_AS(downscale(g, 8, 4), std::invalid_argument);
    CHECK_THROWS_AS(downscale(g, 4, 0), std::invalid_argument);
  }
}

TEST_CASE("16-bit PGM round trip is exact") {
  fs::path dir = fresh_dir("pgm");
  ImageU16 img = ImageU16::zeros(6, 4);
  Rng rng(5);
  for (auto& p : img.pixels)
    p = static_cast<uint16_t>(rng.uniform_int(0, 65535));
  write_pgm16(dir / "a.pgm", img);
  PgmFile back = read_pgm(dir / "a.pgm");
  CHECK(back.maxval == 65535);
  REQUIRE(back.image.width == 6);
  REQUIRE(back.image.height == 4);
  CHECK(back.image.pixels == img.pixels);

  std::ofstream(dir / "bad.pgm") << "P5\n4 4\n";
  CHECK_THROWS_AS(read_pgm(dir / "bad.pgm"), std::runtime_error);
  CHECK_THROWS_AS(read_pgm(dir / "absent.pgm"), std::runtime_error);
}

TEST_CASE("mask PGM uses maxval 1") {
  fs::path dir = fresh_dir("maskpgm");
  Mask m = Mask::zeros(5, 3);
  m.set(1, 1, true);
  m.set(4, 2, true);
  write_mask_pgm(dir / "m.pgm", m);
  PgmFile back = read_pgm(dir / "m.pgm");
  CHECK(back.maxval == 1);
  CHECK(back.image.at(1, 1) == 1);
  CHECK(back.image.at(0, 0) == 0);
  CHECK(back.image.at(4, 2) == 1);
}

TEST_CASE("PNG round trip is exact and writes are deterministic") {
  fs::path dir = fresh_dir("png");
  ImageU8 img = ImageU8::zeros(9, 7, 3);
  Rng rng(23);
  for (auto& p : img.pixels)
    p = static_cast<uint8_t>(rng.uniform_int(0, 255));
  write_png_rgb8(dir / "a.png", img);
  write_png_rgb8(dir / "b.png", img);
  CHECK(file_bytes(dir / "a.png") == file_bytes(dir / "b.png"));
  ImageU8 back = read_png_rgb8(dir / "a.png");
  REQUIRE(back.same_shape(img));
  CHECK(back.pixels == img.pixels);
  CHECK_THROWS_AS(read_png_rgb8(dir / "absent.png"), std::runtime_error);
}

TEST_CASE("horizontal concatenation lays parts left to right") {
  ImageU16 a = ImageU16::zeros(2, 2);
  ImageU16 b = ImageU16::zeros(3, 2);
  a.at(1, 0) = 7;
  b.at(0, 1) = 9;
  ImageU16 cat = concat_horizontal(std::vector<const ImageU16*>{&a, &b});
  REQUIRE(cat.width == 5);
  REQUIRE(cat.height == 2);
  CHECK(cat.at(1, 0) == 7);
  CHECK(cat.at(2, 1) == 9);

  ImageU16 tall = ImageU16::zeros(2, 3);
  CHECK_THROWS_AS(concat_horizontal(std::vector<const ImageU16*>{&a, &tall}),
                  std::invalid_argument);
}
