#pragma once

#include "rgbt/image.hpp"

namespace rgbt {

// Annotated masks carry a little slop around the true plant, so thermal
// statistics are taken after shaving the rim off.
constexpr int kDefaultErosionRadius = 2;

// Morphological erosion with a disc structuring element of the given radius
// (offsets with dx^2 + dy^2 <= r^2; radius 1 is the 4-neighbourhood plus
// center). Pixels outside the frame count as background, so regions touching
// the border shrink there too. radius 0 returns the input unchanged.
Mask erode(const Mask& mask, int radius);

// Pixels of `mask` that erosion removed: mask AND NOT eroded.
// `eroded` must be a subset of `mask`.
Mask contour_band(const Mask& mask, const Mask& eroded);

// Mean of grid values under the mask. Throws on an empty region.
double masked_mean(const TemperatureGrid& grid, const Mask& mask);

// Area-averaging (box filter) downscale. Source must be at least as large as
// the target in both dimensions; fractional scale ratios are handled by
// weighting partially covered source pixels, so total intensity is preserved.
ImageU8 downscale(const ImageU8& src, int target_width, int target_height);
TemperatureGrid downscale(const TemperatureGrid& src, int target_width,
                          int target_height);

// Source pixel span contributing to one output pixel along one axis.
struct BoxSpan {
  int begin = 0;
  int end = 0;  // exclusive
  std::vector<double> weights;
};

std::vector<BoxSpan> box_spans(int src_size, int dst_size);

}  // namespace rgbt
