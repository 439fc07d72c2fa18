#include "rgbt/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace rgbt {

namespace {

void require_image(const Tensor& img, const char* who) {
  if (img.rank() != 3)
    throw std::invalid_argument(std::string(who) + ": expected H x W x C");
}

}  // namespace

AugmentPolicy AugmentPolicy::single_frame() { return AugmentPolicy{}; }

AugmentPolicy AugmentPolicy::day_strip() {
  AugmentPolicy p;
  p.allow_hflip = false;
  p.max_rotation_deg = 5.0;
  return p;
}

AugmentPolicy AugmentPolicy::none() {
  AugmentPolicy p;
  p.allow_hflip = false;
  p.allow_vflip = false;
  p.shift_fraction = 0.0;
  p.max_rotation_deg = 0.0;
  return p;
}

Tensor flip_horizontal(const Tensor& img) {
  require_image(img, "flip_horizontal");
  int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Tensor out = Tensor::zeros(img.shape);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) out(y, x, k) = img(y, w - 1 - x, k);
  return out;
}

Tensor flip_vertical(const Tensor& img) {
  require_image(img, "flip_vertical");
  int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Tensor out = Tensor::zeros(img.shape);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) out(y, x, k) = img(h - 1 - y, x, k);
  return out;
}

Tensor shift_image(const Tensor& img, int dx, int dy) {
  require_image(img, "shift_image");
  int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Tensor out = Tensor::zeros(img.shape);
  for (int y = 0; y < h; ++y) {
    int sy = y - dy;
    if (sy < 0 || sy >= h) continue;
    for (int x = 0; x < w; ++x) {
      int sx = x - dx;
      if (sx < 0 || sx >= w) continue;
      for (int k = 0; k < c; ++k) out(y, x, k) = img(sy, sx, k);
    }
  }
  return out;
}

Tensor rotate_image(const Tensor& img, double degrees) {
  require_image(img, "rotate_image");
  int h = img.dim(0), w = img.dim(1), c = img.dim(2);
  double rad = degrees * 3.14159265358979323846 / 180.0;
  double cs = std::cos(rad), sn = std::sin(rad);
  double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  Tensor out = Tensor::zeros(img.shape);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // inverse map: rotate the output sample point back into the source
      double rx = x - cx, ry = y - cy;
      double sx = cs * rx + sn * ry + cx;
      double sy = -sn * rx + cs * ry + cy;
      int x0 = static_cast<int>(std::floor(sx));
      int y0 = static_cast<int>(std::floor(sy));
      double fx = sx - x0, fy = sy - y0;
      for (int k = 0; k < c; ++k) {
        double acc = 0.0;
        for (int oy = 0; oy <= 1; ++oy) {
          for (int ox = 0; ox <= 1; ++ox) {
            int px = x0 + ox, py = y0 + oy;
            if (px < 0 || py < 0 || px >= w || py >= h) continue;
            double wgt = (ox ? fx : 1 - fx) * (oy ? fy : 1 - fy);
            acc += wgt * img(py, px, k);
          }
        }
        out(y, x, k) = acc;
      }
    }
  }
  return out;
}

Tensor augment(const Tensor& img, const AugmentPolicy& policy, Rng& rng) {
  require_image(img, "augment");
  Tensor out = img;
  if (policy.allow_hflip && rng.coin()) out = flip_horizontal(out);
  if (policy.allow_vflip && rng.coin()) out = flip_vertical(out);
  if (policy.max_rotation_deg > 0.0) {
    double angle = rng.uniform(-policy.max_rotation_deg, policy.max_rotation_deg);
    if (angle != 0.0) out = rotate_image(out, angle);
  }
  if (policy.shift_fraction > 0.0) {
    int w = img.dim(1), h = img.dim(0);
    int max_dx = static_cast<int>(std::lround(policy.shift_fraction * w));
    int max_dy = static_cast<int>(std::lround(policy.shift_fraction * h));
    int dx = max_dx > 0 ? static_cast<int>(rng.uniform_int(-max_dx, max_dx)) : 0;
    int dy = max_dy > 0 ? static_cast<int>(rng.uniform_int(-max_dy, max_dy)) : 0;
    if (dx != 0 || dy != 0) out = shift_image(out, dx, dy);
  }
  return out;
}

}  // namespace rgbt
