#include "resyn/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "resyn/common.hpp"

namespace resyn::png_io {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void check_dims(int width, int height, size_t pixel_count, int channels) {
  require(width >= 1 && height >= 1, "png: dims must be >= 1");
  require(pixel_count == static_cast<size_t>(width) * height * channels,
          "png: pixel buffer size mismatch");
}

void write_png_impl(const std::string& path, const uint8_t* rows_packed,
                    int width, int height, int bit_depth, int color_type,
                    size_t row_bytes) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("png: cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png: create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("png: create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png: write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> row_ptrs(static_cast<size_t>(height));
  for (int y = 0; y < height; ++y)
    row_ptrs[static_cast<size_t>(y)] =
        const_cast<png_bytep>(rows_packed + static_cast<size_t>(y) * row_bytes);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

PngImage read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("png: cannot open: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png: create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png: create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png: decode failed: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);
  const int channels = (color_type == PNG_COLOR_TYPE_GRAY) ? 1 : 3;
  require(color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_RGB,
          "png: unsupported color type in " + path);

  const size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<uint8_t> raw(row_bytes * height);
  std::vector<png_bytep> row_ptrs(height);
  for (png_uint_32 y = 0; y < height; ++y)
    row_ptrs[y] = raw.data() + static_cast<size_t>(y) * row_bytes;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PngImage out;
  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.channels = channels;
  out.bit_depth = bit_depth;
  out.pixels.resize(static_cast<size_t>(width) * height * channels);
  if (bit_depth == 16) {
    // PNG stores 16-bit samples big-endian.
    for (size_t i = 0; i < out.pixels.size(); ++i)
      out.pixels[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  } else {
    for (size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = raw[i];
  }
  return out;
}

void write_png_gray8(const std::string& path, const std::vector<uint8_t>& pixels,
                     int width, int height) {
  check_dims(width, height, pixels.size(), 1);
  write_png_impl(path, pixels.data(), width, height, 8, PNG_COLOR_TYPE_GRAY,
                 static_cast<size_t>(width));
}

void write_png_gray16(const std::string& path, const std::vector<uint16_t>& pixels,
                      int width, int height) {
  check_dims(width, height, pixels.size(), 1);
  std::vector<uint8_t> packed(pixels.size() * 2);
  for (size_t i = 0; i < pixels.size(); ++i) {
    packed[2 * i] = static_cast<uint8_t>(pixels[i] >> 8);
    packed[2 * i + 1] = static_cast<uint8_t>(pixels[i] & 0xFF);
  }
  write_png_impl(path, packed.data(), width, height, 16, PNG_COLOR_TYPE_GRAY,
                 static_cast<size_t>(width) * 2);
}

void write_png_rgb8(const std::string& path, const std::vector<uint8_t>& pixels,
                    int width, int height) {
  check_dims(width, height, pixels.size(), 3);
  write_png_impl(path, pixels.data(), width, height, 8, PNG_COLOR_TYPE_RGB,
                 static_cast<size_t>(width) * 3);
}

}  // namespace resyn::png_io
