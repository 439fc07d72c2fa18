#include "rgbt/image.hpp"

#include <cstring>
#include <numeric>
#include <stdexcept>

namespace rgbt {

ImageU8 ImageU8::zeros(int width, int height, int channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw std::invalid_argument("ImageU8::zeros: bad dimensions");
  ImageU8 img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.pixels.assign(static_cast<size_t>(width) * height * channels, 0);
  return img;
}

ImageU16 ImageU16::zeros(int width, int height) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("ImageU16::zeros: bad dimensions");
  ImageU16 img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<size_t>(width) * height, 0);
  return img;
}

TemperatureGrid TemperatureGrid::zeros(int width, int height) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("TemperatureGrid::zeros: bad dimensions");
  TemperatureGrid g;
  g.width = width;
  g.height = height;
  g.celsius.assign(static_cast<size_t>(width) * height, 0.0);
  return g;
}

Mask Mask::zeros(int width, int height) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("Mask::zeros: bad dimensions");
  Mask m;
  m.width = width;
  m.height = height;
  m.bits.assign(static_cast<size_t>(width) * height, 0);
  return m;
}

size_t Mask::count() const {
  return std::accumulate(bits.begin(), bits.end(), size_t{0},
                         [](size_t acc, uint8_t b) { return acc + (b != 0); });
}

ImageU8 concat_horizontal(const std::vector<const ImageU8*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_horizontal: no parts");
  int height = parts[0]->height;
  int channels = parts[0]->channels;
  int total = 0;
  for (const ImageU8* p : parts) {
    if (p->height != height || p->channels != channels)
      throw std::invalid_argument("concat_horizontal: mismatched parts");
    total += p->width;
  }
  ImageU8 out = ImageU8::zeros(total, height, channels);
  for (int y = 0; y < height; ++y) {
    size_t dst = static_cast<size_t>(y) * total * channels;
    for (const ImageU8* p : parts) {
      size_t row_bytes = static_cast<size_t>(p->width) * channels;
      std::memcpy(out.pixels.data() + dst,
                  p->pixels.data() + static_cast<size_t>(y) * row_bytes,
                  row_bytes);
      dst += row_bytes;
    }
  }
  return out;
}

ImageU16 concat_horizontal(const std::vector<const ImageU16*>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_horizontal: no parts");
  int height = parts[0]->height;
  int total = 0;
  for (const ImageU16* p : parts) {
    if (p->height != height)
      throw std::invalid_argument("concat_horizontal: mismatched parts");
    total += p->width;
  }
  ImageU16 out = ImageU16::zeros(total, height);
  for (int y = 0; y < height; ++y) {
    size_t dst = static_cast<size_t>(y) * total;
    for (const ImageU16* p : parts) {
      std::memcpy(out.pixels.data() + dst,
                  p->pixels.data() + static_cast<size_t>(y) * p->width,
                  static_cast<size_t>(p->width) * sizeof(uint16_t));
      dst += p->width;
    }
  }
  return out;
}

}  // namespace rgbt
