#pragma once

#include "rgbt/common.hpp"
#include "rgbt/tensor.hpp"

namespace rgbt {

// Random geometric jitter for training images (H x W x C tensors).
// Backgrounds are already black after segmentation, so vacated pixels are
// zero-filled.
struct AugmentPolicy {
  bool allow_hflip = true;
  bool allow_vflip = true;
  double shift_fraction = 0.10;  // of each dimension, rounded to pixels
  double max_rotation_deg = 20.0;

  // Day-strip inputs keep time running left to right, so mirroring is off
  // and rotation stays small.
  static AugmentPolicy single_frame();
  static AugmentPolicy day_strip();
  static AugmentPolicy none();
};

Tensor flip_horizontal(const Tensor& img);
Tensor flip_vertical(const Tensor& img);
Tensor shift_image(const Tensor& img, int dx, int dy);
Tensor rotate_image(const Tensor& img, double degrees);  // bilinear, zero fill

// Samples one jittered copy. A no-op policy returns the input bit-for-bit.
Tensor augment(const Tensor& img, const AugmentPolicy& policy, Rng& rng);

}  // namespace rgbt
