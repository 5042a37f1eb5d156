#include "travkit/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "travkit/image_io.hpp"

namespace travkit {

namespace {

void put(RgbImage& img, int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  const std::size_t o = (static_cast<std::size_t>(y) * img.width + x) * 3;
  img.rgb[o] = r;
  img.rgb[o + 1] = g;
  img.rgb[o + 2] = b;
}

}  // namespace

RgbImage render_overlay(const TravGridMap& map, const std::vector<Eigen::Vector2d>& path,
                        double hard_geo_threshold) {
  const int w = map.cells_x(), h = map.cells_y();
  RgbImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  for (int iy = 0; iy < h; ++iy) {
    const int row = h - 1 - iy;
    for (int ix = 0; ix < w; ++ix) {
      const float geo = map.geometric().at(ix, iy);
      const float hgt = map.height().at(ix, iy);
      if (!has_data(hgt) && !has_data(geo)) {
        put(img, ix, row, 90, 90, 90);
      } else if (has_data(geo) && geo < hard_geo_threshold) {
        put(img, ix, row, 120, 20, 20);
      } else {
        const double sem = std::clamp(static_cast<double>(map.semantic_or_neutral(ix, iy)), 0.0, 1.0);
        put(img, ix, row, 20, static_cast<std::uint8_t>(60 + 180 * sem), 30);
      }
    }
  }

  auto to_px = [&](const Eigen::Vector2d& p) {
    const Eigen::Vector2d c = (p - map.origin()) / map.resolution();
    return Eigen::Vector2d(c.x(), h - c.y());
  };
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Eigen::Vector2d a = to_px(path[i - 1]), b = to_px(path[i]);
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() * 2)));
    for (int k = 0; k <= n; ++k) {
      const Eigen::Vector2d q = a + (b - a) * (static_cast<double>(k) / n);
      put(img, static_cast<int>(std::floor(q.x())), static_cast<int>(std::floor(q.y())), 40, 80, 255);
    }
  }
  if (!path.empty()) {
    for (const auto& [p, bright] : {std::pair{path.front(), true}, std::pair{path.back(), false}}) {
      const Eigen::Vector2d c = to_px(p);
      for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
          put(img, static_cast<int>(c.x()) + dx, static_cast<int>(c.y()) + dy, 255, bright ? 255 : 140, 0);
        }
      }
    }
  }
  return img;
}

void write_overlay(const std::filesystem::path& file, const TravGridMap& map,
                   const std::vector<Eigen::Vector2d>& path, double hard_geo_threshold) {
  write_png_rgb(file, render_overlay(map, path, hard_geo_threshold));
}

}  // namespace travkit
