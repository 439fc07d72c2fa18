#pragma once

#include <filesystem>

#include "rgbt/image.hpp"

namespace rgbt {

// Binary PGM (P5). Thermal frames use maxval 65535 with big-endian samples
// per the netpbm spec; mask dumps use maxval 1.

struct PgmFile {
  ImageU16 image;
  int maxval = 0;
};

PgmFile read_pgm(const std::filesystem::path& path);
void write_pgm16(const std::filesystem::path& path, const ImageU16& image);
void write_mask_pgm(const std::filesystem::path& path, const Mask& mask);

// 8-bit RGB PNG via libpng. Reading expands palette/gray and strips alpha so
// callers always get a 3-channel image. Writing is deterministic for a given
// input (fixed filter and compression settings).
ImageU8 read_png_rgb8(const std::filesystem::path& path);
void write_png_rgb8(const std::filesystem::path& path, const ImageU8& image);

}  // namespace rgbt
