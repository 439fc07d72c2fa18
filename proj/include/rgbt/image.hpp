#pragma once

#include <cstdint>
#include <vector>

namespace rgbt {

// Interleaved 8-bit raster, row-major. channels is 1 or 3.
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  static ImageU8 zeros(int width, int height, int channels);

  uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const ImageU8& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// Single-channel 16-bit raster (raw thermal counts).
struct ImageU16 {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> pixels;

  static ImageU16 zeros(int width, int height);

  uint16_t& at(int x, int y) {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  uint16_t at(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
};

// Decoded temperatures in Celsius.
struct TemperatureGrid {
  int width = 0;
  int height = 0;
  std::vector<double> celsius;

  static TemperatureGrid zeros(int width, int height);

  double& at(int x, int y) {
    return celsius[static_cast<size_t>(y) * width + x];
  }
  double at(int x, int y) const {
    return celsius[static_cast<size_t>(y) * width + x];
  }
};

// Binary region, one byte per pixel (0 or 1).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  static Mask zeros(int width, int height);

  bool get(int x, int y) const {
    return bits[static_cast<size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits[static_cast<size_t>(y) * width + x] = v ? 1 : 0;
  }
  size_t count() const;
  bool same_shape(const Mask& o) const {
    return width == o.width && height == o.height;
  }
};

// Side-by-side concatenation, left to right. All parts must share height
// (and channel count for ImageU8).
ImageU8 concat_horizontal(const std::vector<const ImageU8*>& parts);
ImageU16 concat_horizontal(const std::vector<const ImageU16*>& parts);

}  // namespace rgbt
