#include "rgbt/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rgbt {

namespace {

std::vector<std::pair<int, int>> disc_offsets(int radius) {
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
  return offsets;
}

}  // namespace

Mask erode(const Mask& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("erode: negative radius");
  if (mask.width <= 0 || mask.height <= 0)
    throw std::invalid_argument("erode: empty mask");
  if (radius == 0) return mask;

  auto offsets = disc_offsets(radius);
  Mask out = Mask::zeros(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.get(x, y)) continue;
      bool keep = true;
      for (const auto& [dx, dy] : offsets) {
        int nx = x + dx;
        int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height ||
            !mask.get(nx, ny)) {
          keep = false;
          break;
        }
      }
      if (keep) out.set(x, y, true);
    }
  }
  return out;
}

Mask contour_band(const Mask& mask, const Mask& eroded) {
  if (!mask.same_shape(eroded))
    throw std::invalid_argument("contour_band: shape mismatch");
  Mask band = Mask::zeros(mask.width, mask.height);
  for (size_t i = 0; i < mask.bits.size(); ++i) {
    if (eroded.bits[i] && !mask.bits[i])
      throw std::invalid_argument("contour_band: eroded mask is not a subset");
    band.bits[i] = (mask.bits[i] && !eroded.bits[i]) ? 1 : 0;
  }
  return band;
}

double masked_mean(const TemperatureGrid& grid, const Mask& mask) {
  if (grid.width != mask.width || grid.height != mask.height)
    throw std::invalid_argument("masked_mean: shape mismatch");
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < mask.bits.size(); ++i) {
    if (mask.bits[i]) {
      sum += grid.celsius[i];
      ++count;
    }
  }
  if (count == 0) throw std::runtime_error("masked_mean: empty region");
  return sum / static_cast<double>(count);
}

std::vector<BoxSpan> box_spans(int src_size, int dst_size) {
  // output pixel i covers source interval [i*scale, (i+1)*scale)
  double scale = static_cast<double>(src_size) / dst_size;
  std::vector<BoxSpan> spans(dst_size);
  for (int i = 0; i < dst_size; ++i) {
    double lo = i * scale;
    double hi = (i + 1) * scale;
    BoxSpan& s = spans[i];
    s.begin = static_cast<int>(std::floor(lo));
    s.end = static_cast<int>(std::ceil(hi - 1e-12));
    if (s.end > src_size) s.end = src_size;
    s.weights.resize(s.end - s.begin);
    for (int p = s.begin; p < s.end; ++p) {
      double cover = std::min<double>(p + 1, hi) - std::max<double>(p, lo);
      s.weights[p - s.begin] = cover / scale;
    }
  }
  return spans;
}

namespace {

void check_downscale_dims(int sw, int sh, int tw, int th) {
  if (tw <= 0 || th <= 0)
    throw std::invalid_argument("downscale: bad target dimensions");
  if (sw < tw || sh < th)
    throw std::invalid_argument("downscale: source smaller than target");
}

}  // namespace

ImageU8 downscale(const ImageU8& src, int target_width, int target_height) {
  check_downscale_dims(src.width, src.height, target_width, target_height);
  if (src.width == target_width && src.height == target_height) return src;

  auto cols = box_spans(src.width, target_width);
  auto rows = box_spans(src.height, target_height);
  ImageU8 out = ImageU8::zeros(target_width, target_height, src.channels);
  for (int oy = 0; oy < target_height; ++oy) {
    const BoxSpan& ry = rows[oy];
    for (int ox = 0; ox < target_width; ++ox) {
      const BoxSpan& rx = cols[ox];
      for (int c = 0; c < src.channels; ++c) {
        double acc = 0.0;
        for (int sy = ry.begin; sy < ry.end; ++sy) {
          double wy = ry.weights[sy - ry.begin];
          for (int sx = rx.begin; sx < rx.end; ++sx)
            acc += wy * rx.weights[sx - rx.begin] * src.at(sx, sy, c);
        }
        double v = std::llround(acc);
        out.at(ox, oy, c) =
            static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
      }
    }
  }
  return out;
}

TemperatureGrid downscale(const TemperatureGrid& src, int target_width,
                          int target_height) {
  check_downscale_dims(src.width, src.height, target_width, target_height);
  if (src.width == target_width && src.height == target_height) return src;

  auto cols = box_spans(src.width, target_width);
  auto rows = box_spans(src.height, target_height);
  TemperatureGrid out = TemperatureGrid::zeros(target_width, target_height);
  for (int oy = 0; oy < target_height; ++oy) {
    const BoxSpan& ry = rows[oy];
    for (int ox = 0; ox < target_width; ++ox) {
      const BoxSpan& rx = cols[ox];
      double acc = 0.0;
      for (int sy = ry.begin; sy < ry.end; ++sy) {
        double wy = ry.weights[sy - ry.begin];
        for (int sx = rx.begin; sx < rx.end; ++sx)
          acc += wy * rx.weights[sx - rx.begin] * src.at(sx, sy);
      }
      out.at(ox, oy) = acc;
    }
  }
  return out;
}

}  // namespace rgbt
