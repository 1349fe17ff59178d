#include <algorithm>

#include "cpc/error.hpp"
#include "cpc/pairgen.hpp"

namespace cpc::pairgen {

int stroke_width(int image_width, int image_height) {
  // round(0.003 * m) in integer arithmetic, halves rounded up.
  const long long m = std::max(image_width, image_height);
  return static_cast<int>(std::max<long long>(2, (3 * m + 500) / 1000));
}

OutlineGeometry outline_geometry(int image_width, int image_height, const corpus::BoundingBox& box) {
  OutlineGeometry g;
  const int w = stroke_width(image_width, image_height);
  g.stroke = w;

  auto low = [&](int edge, int limit) {
    const int outer = std::max(0, edge - 2 * w);
    return std::pair{outer, std::min(limit, outer + w)};
  };
  auto high = [&](int edge, int limit) {
    const int outer = std::min(limit, edge + 2 * w);
    return std::pair{outer, std::max(0, outer - w)};
  };
  const auto [ox0, ix0] = low(box.x_min, image_width);
  const auto [oy0, iy0] = low(box.y_min, image_height);
  const auto [ox1, ix1] = high(box.x_max, image_width);
  const auto [oy1, iy1] = high(box.y_max, image_height);
  g.outer = {ox0, oy0, ox1, oy1};
  // Tiny images can squeeze the interior away entirely.
  g.inner = {ix0, iy0, std::max(ix0, ix1), std::max(iy0, iy1)};
  return g;
}

void draw_outline(RgbImage& image, const corpus::BoundingBox& box) {
  const auto g = outline_geometry(image.width, image.height, box);
  for (int y = g.outer.y_min; y < g.outer.y_max; ++y) {
    const bool inner_row = y >= g.inner.y_min && y < g.inner.y_max;
    for (int x = g.outer.x_min; x < g.outer.x_max; ++x) {
      if (inner_row && x >= g.inner.x_min && x < g.inner.x_max) {
        x = g.inner.x_max - 1;
        continue;
      }
      auto* p = image.at(x, y);
      p[0] = 255;
      p[1] = 0;
      p[2] = 0;
    }
  }
}

std::filesystem::path render_visual_prompt(const std::filesystem::path& plain_image,
                                           const corpus::BoundingBox& box, const std::filesystem::path& out) {
  auto image = read_png(plain_image);
  if (!box.within(image.width, image.height)) {
    throw BoxOutOfBounds("[" + std::to_string(box.x_min) + ", " + std::to_string(box.y_min) + ", " +
                         std::to_string(box.x_max) + ", " + std::to_string(box.y_max) + "] in " +
                         std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  draw_outline(image, box);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  write_png(out, image);
  return out;
}

}  // namespace cpc::pairgen
