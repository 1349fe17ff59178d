#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cpc {

// 8-bit RGB raster, row-major, no padding.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 255);

  std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  bool operator==(const RgbImage&) const = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

// Any PNG colour type / bit depth is converted to 8-bit RGB (alpha dropped over white).
RgbImage read_png(const std::filesystem::path& path);

// Reads only the IHDR chunk.
ImageSize png_size(const std::filesystem::path& path);

// Deterministic encoding: fixed zlib level and filter, no time or text chunks.
void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace cpc
