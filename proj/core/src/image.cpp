#include "cpc/image.hpp"

#include <png.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include "cpc/error.hpp"

namespace cpc {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) { throw ImageDecodeFailure(msg); }
void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace

RgbImage::RgbImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {}

ImageSize png_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageDecodeFailure("cannot open " + path.string());
  std::array<unsigned char, 24> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  static constexpr std::array<unsigned char, 8> kSig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() != static_cast<std::streamsize>(head.size()) ||
      !std::equal(kSig.begin(), kSig.end(), head.begin()) ||
      std::string_view(reinterpret_cast<const char*>(head.data()) + 12, 4) != "IHDR") {
    throw ImageDecodeFailure("not a PNG: " + path.string());
  }
  auto be32 = [&](std::size_t off) {
    return static_cast<int>((std::uint32_t{head[off]} << 24) | (std::uint32_t{head[off + 1]} << 16) |
                            (std::uint32_t{head[off + 2]} << 8) | std::uint32_t{head[off + 3]});
  };
  return {be32(16), be32(20)};
}

RgbImage read_png(const std::filesystem::path& path) {
  File fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw ImageDecodeFailure("cannot open " + path.string());
  std::array<unsigned char, 8> sig{};
  if (std::fread(sig.data(), 1, sig.size(), fp.get()) != sig.size() || png_sig_cmp(sig.data(), 0, 8) != 0) {
    throw ImageDecodeFailure("not a PNG: " + path.string());
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                           png_warning_handler);
  if (png == nullptr) throw ImageDecodeFailure("libpng allocation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  if (channels != 3 && channels != 4) {
    throw ImageDecodeFailure("unexpected channel layout in " + path.string());
  }

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * h * channels);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = raw.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(png, rows.data());

  RgbImage image(w, h, 0);
  if (channels == 3) {
    image.pixels = std::move(raw);
  } else {
    // Composite over white.
    for (std::size_t i = 0, n = static_cast<std::size_t>(w) * h; i < n; ++i) {
      const unsigned a = raw[i * 4 + 3];
      for (std::size_t c = 0; c < 3; ++c) {
        image.pixels[i * 3 + c] = static_cast<std::uint8_t>((raw[i * 4 + c] * a + 255u * (255u - a) + 127u) / 255u);
      }
    }
  }
  png_read_end(png, nullptr);
  return image;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw ImageDecodeFailure("refusing to encode an invalid raster");
  }
  File fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoFailure("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                            png_warning_handler);
  if (png == nullptr) throw IoFailure("libpng allocation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
  }
  png_write_end(png, nullptr);
  if (std::fflush(fp.get()) != 0) throw IoFailure("cannot flush " + path.string());
}

}  // namespace cpc
