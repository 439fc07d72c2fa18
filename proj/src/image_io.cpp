#include "rgbt/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace rgbt {

namespace {

// Reads one PGM header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_pgm_int(std::istream& in, const std::string& what,
                  const std::string& path) {
  std::string tok = next_pgm_token(in);
  if (tok.empty())
    throw std::runtime_error(path + ": truncated PGM header (" + what + ")");
  for (char ch : tok)
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw std::runtime_error(path + ": bad PGM " + what + " '" + tok + "'");
  return std::stoi(tok);
}

struct PngReadCtx {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCtx {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace

PgmFile read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PGM: " + path.string());
  std::string magic = next_pgm_token(in);
  if (magic != "P5")
    throw std::runtime_error(path.string() + ": not a binary PGM (" + magic +
                             ")");
  int width = parse_pgm_int(in, "width", path.string());
  int height = parse_pgm_int(in, "height", path.string());
  int maxval = parse_pgm_int(in, "maxval", path.string());
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error(path.string() + ": bad PGM dimensions");
  // exactly one whitespace byte separates header and raster
  PgmFile out;
  out.maxval = maxval;
  out.image = ImageU16::zeros(width, height);
  size_t n = static_cast<size_t>(width) * height;
  if (maxval > 255) {
    std::vector<uint8_t> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (static_cast<size_t>(in.gcount()) != raw.size())
      throw std::runtime_error(path.string() + ": truncated PGM raster");
    for (size_t i = 0; i < n; ++i)
      out.image.pixels[i] =
          static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  } else {
    std::vector<uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), raw.size());
    if (static_cast<size_t>(in.gcount()) != raw.size())
      throw std::runtime_error(path.string() + ": truncated PGM raster");
    for (size_t i = 0; i < n; ++i) out.image.pixels[i] = raw[i];
  }
  return out;
}

void write_pgm16(const std::filesystem::path& path, const ImageU16& image) {
  if (image.width <= 0 || image.height <= 0)
    throw std::invalid_argument("write_pgm16: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM: " + path.string());
  out << "P5\n" << image.width << " " << image.height << "\n65535\n";
  std::vector<uint8_t> raw(image.pixels.size() * 2);
  for (size_t i = 0; i < image.pixels.size(); ++i) {
    raw[2 * i] = static_cast<uint8_t>(image.pixels[i] >> 8);
    raw[2 * i + 1] = static_cast<uint8_t>(image.pixels[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), raw.size());
  if (!out) throw std::runtime_error("short write: " + path.string());
}

void write_mask_pgm(const std::filesystem::path& path, const Mask& mask) {
  if (mask.width <= 0 || mask.height <= 0)
    throw std::invalid_argument("write_mask_pgm: empty mask");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM: " + path.string());
  out << "P5\n" << mask.width << " " << mask.height << "\n1\n";
  out.write(reinterpret_cast<const char*>(mask.bits.data()), mask.bits.size());
  if (!out) throw std::runtime_error("short write: " + path.string());
}

ImageU8 read_png_rgb8(const std::filesystem::path& path) {
  PngReadCtx ctx;
  ctx.fp = std::fopen(path.string().c_str(), "rb");
  if (!ctx.fp) throw std::runtime_error("cannot open PNG: " + path.string());
  ctx.png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw std::runtime_error("png_create_read_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw std::runtime_error("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png)))
    throw std::runtime_error("failed to decode PNG: " + path.string());

  png_init_io(ctx.png, ctx.fp);
  png_read_info(ctx.png, ctx.info);

  png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
  png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
  int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  int color_type = png_get_color_type(ctx.png, ctx.info);

  if (bit_depth == 16) png_set_strip_16(ctx.png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(ctx.png);
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS))
    png_set_tRNS_to_alpha(ctx.png);
  if (color_type == PNG_COLOR_TYPE_GRAY ||
      color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  if (png_get_channels(ctx.png, ctx.info) != 3)
    throw std::runtime_error(path.string() + ": unsupported PNG layout");

  ImageU8 img = ImageU8::zeros(static_cast<int>(w), static_cast<int>(h), 3);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = img.pixels.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return img;
}

void write_png_rgb8(const std::filesystem::path& path, const ImageU8& image) {
  if (image.channels != 3)
    throw std::invalid_argument("write_png_rgb8: image must have 3 channels");
  PngWriteCtx ctx;
  ctx.fp = std::fopen(path.string().c_str(), "wb");
  if (!ctx.fp) throw std::runtime_error("cannot write PNG: " + path.string());
  ctx.png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw std::runtime_error("png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw std::runtime_error("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png)))
    throw std::runtime_error("failed to encode PNG: " + path.string());

  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, image.width, image.height, 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  // pinned settings keep output bytes stable across runs
  png_set_compression_level(ctx.png, 6);
  png_set_filter(ctx.png, 0, PNG_FILTER_SUB);
  png_write_info(ctx.png, ctx.info);

  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y)
    rows[y] = const_cast<png_bytep>(image.pixels.data() +
                                    static_cast<size_t>(y) * image.width * 3);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

}  // namespace rgbt
