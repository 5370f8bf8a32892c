#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace resyn::png_io {

// Decoded image; pixels are widened to uint16_t regardless of source depth.
// channels is 1 (gray) or 3 (rgb); alpha and palette inputs are converted.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  int bit_depth = 8;
  std::vector<uint16_t> pixels;  // row-major, interleaved
};

PngImage read_png(const std::string& path);

void write_png_gray8(const std::string& path, const std::vector<uint8_t>& pixels,
                     int width, int height);
void write_png_gray16(const std::string& path, const std::vector<uint16_t>& pixels,
                      int width, int height);
void write_png_rgb8(const std::string& path, const std::vector<uint8_t>& pixels,
                    int width, int height);

}  // namespace resyn::png_io
