#include "travkit/gridmap.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "travkit/errors.hpp"

namespace travkit {
namespace {

int cell_count(double size, double resolution) {
  if (!(size > 0.0) || !(resolution > 0.0)) {
    throw InvalidParameter("map size and resolution must be positive");
  }
  const double n = size / resolution;
  const long long rounded = std::llround(n);
  if (rounded <= 0 || std::abs(n - static_cast<double>(rounded)) > 1e-6 * std::max(1.0, n)) {
    throw InvalidParameter("map size must be an integer multiple of the resolution");
  }
  return static_cast<int>(rounded);
}

constexpr char kMagic[8] = {'T', 'R', 'A', 'V', 'M', 'A', 'P', '1'};

}  // namespace

TravGridMap::TravGridMap(double size_x, double size_y, double resolution, Eigen::Vector2d origin)
    : nx_(cell_count(size_x, resolution)),
      ny_(cell_count(size_y, resolution)),
      resolution_(resolution),
      origin_(origin),
      height_(nx_, ny_, kNoData),
      semantic_(nx_, ny_, kNoData),
      geometric_(nx_, ny_, kNoData),
      counts_(nx_, ny_, 0) {}

TravGridMap TravGridMap::centered_at(const Eigen::Vector2d& center, double size, double resolution) {
  return TravGridMap(size, size, resolution, center - Eigen::Vector2d(size / 2.0, size / 2.0));
}

bool TravGridMap::cell_of(const Eigen::Vector2d& world, int& ix, int& iy) const {
  const double fx = std::floor((world.x() - origin_.x()) / resolution_);
  const double fy = std::floor((world.y() - origin_.y()) / resolution_);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < nx_ && fy < ny_)) return false;
  ix = static_cast<int>(fx);
  iy = static_cast<int>(fy);
  return true;
}

Eigen::Vector2d TravGridMap::cell_center(int ix, int iy) const {
  return origin_ + Eigen::Vector2d((ix + 0.5) * resolution_, (iy + 0.5) * resolution_);
}

void TravGridMap::shift_cells(int dx, int dy) {
  auto shift = [&](auto& layer, auto empty) {
    auto old = layer;
    std::fill(layer.pixels().begin(), layer.pixels().end(), empty);
    for (int y = 0; y < ny_; ++y) {
      const int sy = y + dy;
      if (sy < 0 || sy >= ny_) continue;
      for (int x = 0; x < nx_; ++x) {
        const int sx = x + dx;
        if (sx >= 0 && sx < nx_) layer.at(x, y) = old.at(sx, sy);
      }
    }
  };
  shift(height_, kNoData);
  shift(semantic_, kNoData);
  shift(geometric_, kNoData);
  shift(counts_, std::uint32_t{0});
  origin_ += Eigen::Vector2d(dx * resolution_, dy * resolution_);
}

void TravGridMap::recenter(const Eigen::Vector2d& center) {
  const Eigen::Vector2d target = center - Eigen::Vector2d(size_x() / 2.0, size_y() / 2.0);
  const Eigen::Vector2d delta = (target - origin_) / resolution_;
  shift_cells(static_cast<int>(std::lround(delta.x())), static_cast<int>(std::lround(delta.y())));
}

std::vector<LabeledPoint> unproject(const DepthImage& depth, const Raster<float>& trav,
                                    const CameraModel& camera, const Pose& pose) {
  require_same_shape("unproject depth vs traversability", depth, trav);
  std::vector<LabeledPoint> out;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const float d = depth.at(u, v);
      if (!(d > 0.0f) || !std::isfinite(d)) continue;
      out.push_back({unproject_pixel(u, v, d, pose, camera), trav.at(u, v)});
    }
  }
  return out;
}

AccumulateStats accumulate(TravGridMap& map, const std::vector<LabeledPoint>& points) {
  AccumulateStats stats;
  const std::size_t ncell = static_cast<std::size_t>(map.cells_x()) * map.cells_y();
  std::vector<std::int64_t> winner(ncell, -1);
  std::vector<std::uint32_t> hits(ncell, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    int ix, iy;
    if (!map.cell_of(points[i].position.head<2>(), ix, iy) || !std::isfinite(points[i].position.z())) {
      ++stats.dropped;
      continue;
    }
    ++stats.binned;
    const std::size_t c = static_cast<std::size_t>(iy) * map.cells_x() + ix;
    ++hits[c];
    if (winner[c] < 0 || points[i].position.z() >= points[static_cast<std::size_t>(winner[c])].position.z()) {
      winner[c] = static_cast<std::int64_t>(i);
    }
  }
  for (std::size_t c = 0; c < ncell; ++c) {
    if (winner[c] < 0) continue;
    const auto& p = points[static_cast<std::size_t>(winner[c])];
    map.height().data()[c] = static_cast<float>(p.position.z());
    map.semantic().data()[c] = p.traversability;
    map.counts().data()[c] += hits[c];
  }
  return stats;
}

void geometric_traversability(TravGridMap& map, double step_max, double slope_max) {
  const auto& h = map.height();
  auto& g = map.geometric();
  const int nx = map.cells_x(), ny = map.cells_y();
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const float hc = h.at(x, y);
      if (!has_data(hc)) {
        g.at(x, y) = kNoData;
        continue;
      }
      double step = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !h.contains(x + dx, y + dy)) continue;
          const float hn = h.at(x + dx, y + dy);
          if (has_data(hn)) step = std::max(step, std::abs(static_cast<double>(hn) - hc));
        }
      }
      const double slope = std::atan(step / map.resolution());
      g.at(x, y) = (step <= step_max && slope <= slope_max) ? 1.0f : 0.0f;
    }
  }
}

DepthImage depth_from_millimeters(const Raster<std::uint16_t>& mm) {
  DepthImage d(mm.width(), mm.height());
  for (std::size_t i = 0; i < mm.size(); ++i) d.data()[i] = static_cast<float>(mm.data()[i]) * 0.001f;
  return d;
}

namespace {

void write_layer(std::ofstream& out, std::span<const float> layer) {
  static_assert(std::endian::native == std::endian::little, "map files are little-endian");
  out.write(reinterpret_cast<const char*>(layer.data()),
            static_cast<std::streamsize>(layer.size() * sizeof(float)));
}

}  // namespace

void save_map(const std::filesystem::path& path, const TravGridMap& map) {
  nlohmann::ordered_json header;
  header["format"] = "travkit-gridmap";
  header["version"] = 1;
  header["size"] = {map.size_x(), map.size_y()};
  header["resolution"] = map.resolution();
  header["origin"] = {map.origin().x(), map.origin().y()};
  header["cells"] = {map.cells_x(), map.cells_y()};
  header["layers"] = {"height", "semantic", "geometric", "count"};
  header["dtype"] = "float32-le";
  header["order"] = "row-major, row = cell y";
  header["no_data"] = "NaN";
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write map " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const auto len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_layer(out, map.height().pixels());
  write_layer(out, map.semantic().pixels());
  write_layer(out, map.geometric().pixels());
  std::vector<float> counts(map.counts().pixels().begin(), map.counts().pixels().end());
  write_layer(out, counts);
}

TravGridMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open map " + path.string());
  char magic[8];
  std::uint32_t len = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0 ||
      !in.read(reinterpret_cast<char*>(&len), sizeof(len)) || len > (1u << 20)) {
    throw InputError(path.string() + " is not a travkit grid map");
  }
  std::string text(len, '\0');
  in.read(text.data(), len);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("corrupt map header in " + path.string() + ": " + e.what());
  }
  TravGridMap map(header.at("size")[0].get<double>(), header.at("size")[1].get<double>(),
                  header.at("resolution").get<double>(),
                  Eigen::Vector2d(header.at("origin")[0].get<double>(), header.at("origin")[1].get<double>()));
  auto read_layer = [&](std::span<float> layer) {
    if (!in.read(reinterpret_cast<char*>(layer.data()),
                 static_cast<std::streamsize>(layer.size() * sizeof(float)))) {
      throw InputError("truncated map file " + path.string());
    }
  };
  const auto layers = header.at("layers").get<std::vector<std::string>>();
  std::vector<float> scratch(static_cast<std::size_t>(map.cells_x()) * map.cells_y());
  for (const auto& name : layers) {
    if (name == "height") {
      read_layer(map.height().pixels());
    } else if (name == "semantic") {
      read_layer(map.semantic().pixels());
    } else if (name == "geometric") {
      read_layer(map.geometric().pixels());
    } else if (name == "count") {
      read_layer(scratch);
      for (std::size_t i = 0; i < scratch.size(); ++i) {
        map.counts().data()[i] = static_cast<std::uint32_t>(scratch[i]);
      }
    } else {
      read_layer(scratch);  // unknown layer, skipped
    }
  }
  return map;
}

}  // namespace travkit
