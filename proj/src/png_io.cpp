#include "uwr/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "uwr/error.hpp"

namespace uwr {

namespace {

struct FileCloser {
  FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  (void)msg;
  longjmp(png_jmpbuf(png), 1);
}

void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace

Image load_png(const std::string& path) {
  FileCloser fc;
  fc.f = std::fopen(path.c_str(), "rb");
  if (!fc.f) throw ValidationError("load_png: cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_fn, png_warn_fn);
  if (!png) throw std::runtime_error("load_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("load_png: out of memory");
  }

  std::vector<png_byte> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("load_png: failed to decode " + path);
  }

  png_init_io(png, fc.f);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  bytes.resize(static_cast<size_t>(h) * w * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(h), static_cast<int>(w));
  const long n = img.pixels();
  for (long i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c)
      img.data[static_cast<size_t>(c) * n + i] = bytes[i * 3 + c] / 255.0;
  return img;
}

void save_png(const std::string& path, const Image& img) {
  const long n = img.pixels();
  std::vector<png_byte> bytes(static_cast<size_t>(n) * 3);
  for (long i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(img.data[static_cast<size_t>(c) * n + i], 0.0, 1.0);
      bytes[i * 3 + c] = static_cast<png_byte>(std::lround(v * 255.0));
    }

  FileCloser fc;
  fc.f = std::fopen(path.c_str(), "wb");
  if (!fc.f) throw ValidationError("save_png: cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_fn, png_warn_fn);
  if (!png) throw std::runtime_error("save_png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("save_png: out of memory");
  }

  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = bytes.data() + static_cast<size_t>(y) * img.width * 3;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("save_png: failed to encode " + path);
  }

  png_init_io(png, fc.f);
  // Fixed encoder settings keep output byte-identical across runs.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace uwr
