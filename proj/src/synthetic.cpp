#include "travkit/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "travkit/adapters.hpp"
#include "travkit/errors.hpp"
#include "travkit/fusion.hpp"
#include "travkit/image_io.hpp"

namespace travkit::synthetic {

namespace fs = std::filesystem;

std::map<int, std::string> scene_vocabulary() {
  return {{kSky, "sky"}, {kSidewalk, "sidewalk"}, {kRoad, "road"}, {kCrosswalk, "crosswalk"},
          {kTerrain, "terrain"}};
}

CameraModel sequence_camera(const SequenceOptions& o) {
  CameraModel cam;
  cam.fx = cam.fy = o.focal;
  cam.cx = o.width / 2.0;
  cam.cy = o.height / 2.0;
  cam.width = o.width;
  cam.height = o.height;
  return cam;
}

namespace {

// Camera looking along world +x, pitched down, then yawed about world z.
Eigen::Matrix3d walker_rotation(double pitch, double yaw) {
  const double s = std::sin(pitch), c = std::cos(pitch);
  Eigen::Matrix3d r0;
  r0.col(0) = Eigen::Vector3d(0, -1, 0);
  r0.col(1) = Eigen::Vector3d(-s, 0, -c);
  r0.col(2) = Eigen::Vector3d(c, 0, -s);
  return Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix() * r0;
}

std::uint32_t hash2(int a, int b) {
  std::uint32_t h = static_cast<std::uint32_t>(a) * 0x9E3779B1u ^ static_cast<std::uint32_t>(b) * 0x85EBCA77u;
  h ^= h >> 15;
  h *= 0x2C1B3C6Du;
  h ^= h >> 12;
  return h;
}

std::array<std::uint8_t, 3> shade(SceneClass cls, double x, double y) {
  switch (cls) {
    case kSidewalk: {
      const bool joint = std::fmod(std::abs(x), 0.5) < 0.03 || std::fmod(std::abs(y), 0.5) < 0.03;
      return joint ? std::array<std::uint8_t, 3>{140, 136, 128} : std::array<std::uint8_t, 3>{178, 172, 160};
    }
    case kRoad:
      return {68, 68, 74};
    case kCrosswalk: {
      const bool stripe = static_cast<int>(std::floor(y / 0.5)) % 2 == 0;
      return stripe ? std::array<std::uint8_t, 3>{236, 236, 230} : std::array<std::uint8_t, 3>{68, 68, 74};
    }
    case kTerrain: {
      const auto n = static_cast<int>(hash2(static_cast<int>(std::floor(x * 10)), static_cast<int>(std::floor(y * 10))) % 30);
      return {static_cast<std::uint8_t>(70 + n), static_cast<std::uint8_t>(118 + n), 52};
    }
    case kSky:
    default:
      return {140, 185, 235};
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

}  // namespace

Trajectory sequence_trajectory(const SequenceOptions& o) {
  std::vector<Pose> poses;
  for (std::size_t i = 0; i < o.frames; ++i) {
    const double t = static_cast<double>(i) * o.frame_interval;
    Pose p;
    p.timestamp = t;
    p.position = Eigen::Vector3d(o.walking_speed * t, 0.08 * std::sin(1.3 * t),
                                 o.camera_height + 0.015 * std::sin(4.0 * t));
    p.rotation = walker_rotation(o.pitch, 0.04 * std::sin(0.9 * t));
    poses.push_back(p);
  }
  return Trajectory(std::move(poses));
}

SceneClass ground_class(double x, double y) {
  if (y >= -1.0 && y <= 1.0) return kSidewalk;
  if (y < -1.0 && y >= -4.5) return (x >= 7.0 && x <= 9.0) ? kCrosswalk : kRoad;
  return kTerrain;
}

RenderedFrame render_frame(const Pose& pose, const CameraModel& cam, double max_depth) {
  RenderedFrame f;
  f.rgb = RgbImage{cam.width, cam.height,
                   std::vector<std::uint8_t>(static_cast<std::size_t>(cam.width) * cam.height * 3)};
  f.classes = Raster<std::uint8_t>(cam.width, cam.height, kSky);
  f.depth = Raster<float>(cam.width, cam.height, 0.0f);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d ray = pose.rotation * Eigen::Vector3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      SceneClass cls = kSky;
      double gx = 0, gy = 0;
      if (ray.z() < -1e-9) {
        const double t = -pose.position.z() / ray.z();  // camera-frame depth (ray has unit z in camera)
        gx = pose.position.x() + t * ray.x();
        gy = pose.position.y() + t * ray.y();
        cls = ground_class(gx, gy);
        if (t <= max_depth) f.depth.at(u, v) = static_cast<float>(t);
      }
      f.classes.at(u, v) = cls;
      const auto c = shade(cls, gx, gy);
      const std::size_t o = (static_cast<std::size_t>(v) * cam.width + u) * 3;
      f.rgb.rgb[o] = c[0];
      f.rgb.rgb[o + 1] = c[1];
      f.rgb.rgb[o + 2] = c[2];
    }
  }
  return f;
}

void write_sequence(const fs::path& dir, const SequenceOptions& o) {
  const CameraModel cam = sequence_camera(o);
  const Trajectory traj = sequence_trajectory(o);
  for (const char* sub : {"frames", "fixtures", "gt", "depth"}) fs::create_directories(dir / sub);
  save_camera(dir / "camera.json", cam);
  save_tum_trajectory(dir / "trajectory.txt", traj);
  save_vocabulary(dir / "fixtures" / "vocabulary.json", scene_vocabulary());
  write_text(dir / "policy.json", "{\n  \"preset\": \"urban\"\n}\n");

  for (std::size_t i = 0; i < traj.size(); ++i) {
    const std::string stem = frame_stem(i);
    const RenderedFrame f = render_frame(traj[i], cam, o.max_depth);
    write_png_rgb(dir / "frames" / (stem + ".png"), f.rgb);

    const fs::path fx = dir / "fixtures" / stem;
    fs::create_directories(fx / "masks");
    write_png_gray8(fx / "semantic.png", f.classes);

    BinaryMask sidewalk(cam.width, cam.height), road(cam.width, cam.height), tiny(cam.width, cam.height);
    BinaryMask gt(cam.width, cam.height);
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        const auto c = f.classes.at(u, v);
        sidewalk.at(u, v) = c == kSidewalk;
        road.at(u, v) = c == kRoad;
        gt.at(u, v) = c == kSidewalk || c == kCrosswalk;
      }
    }
    // A detached speck the contour filter has to remove.
    bool speck_ok = true;
    for (int v = 2; v <= 8 && speck_ok; ++v) {
      for (int u = 2; u <= 8; ++u) speck_ok = speck_ok && f.classes.at(u, v) != kSidewalk;
    }
    if (speck_ok) {
      for (int v = 3; v <= 7; ++v) {
        for (int u = 3; u <= 7; ++u) sidewalk.at(u, v) = 1;
      }
    }
    // Below the area threshold.
    for (int v = cam.height - 8; v < cam.height - 2; ++v) {
      for (int u = cam.width / 2 - 3; u < cam.width / 2 + 3; ++u) tiny.at(u, v) = 1;
    }
    write_mask_png(fx / "masks" / "0.png", sidewalk);
    write_mask_png(fx / "masks" / "1.png", road);
    write_mask_png(fx / "masks" / "2.png", tiny);
    write_text(fx / "scores.json", "[0.9, 0.95, 0.99]\n");
    write_mask_png(dir / "gt" / (stem + ".png"), gt);

    Raster<std::uint16_t> mm(cam.width, cam.height);
    for (std::size_t k = 0; k < mm.size(); ++k) {
      mm.data()[k] = static_cast<std::uint16_t>(std::lround(std::min(f.depth.data()[k], 65.0f) * 1000.0f));
    }
    write_png_gray16(dir / "depth" / (stem + ".png"), mm);
  }
}

TravGridMap corridor_map(double resolution) {
  TravGridMap map(10.0, 10.0, resolution, Eigen::Vector2d::Zero());
  struct Box {
    double x0, x1, y0, y1;
    float sem;
  };
  const Box boxes[] = {
      {1.5, 2.5, 4.4, 5.6, 1.0f},   // start pad
      {5.5, 6.5, 4.4, 5.6, 1.0f},   // goal pad
      {2.5, 5.5, 4.4, 5.6, 0.25f},  // road, straight
      {1.5, 2.5, 5.6, 8.0, 1.0f},   // sidewalk detour
      {2.5, 5.5, 7.0, 8.0, 1.0f},
      {5.5, 6.5, 5.6, 8.0, 1.0f},
  };
  for (int iy = 0; iy < map.cells_y(); ++iy) {
    for (int ix = 0; ix < map.cells_x(); ++ix) {
      const Eigen::Vector2d c = map.cell_center(ix, iy);
      map.height().at(ix, iy) = 0.5f;
      map.semantic().at(ix, iy) = 0.0f;
      map.geometric().at(ix, iy) = 0.0f;
      for (const auto& b : boxes) {
        if (c.x() >= b.x0 && c.x() < b.x1 && c.y() >= b.y0 && c.y() < b.y1) {
          map.height().at(ix, iy) = 0.0f;
          map.semantic().at(ix, iy) = b.sem;
          map.geometric().at(ix, iy) = 1.0f;
        }
      }
    }
  }
  return map;
}

Pose2 corridor_start() { return {2.0, 5.0, 0.0}; }
Pose2 corridor_goal() { return {6.0, 5.0, 0.0}; }

}  // namespace travkit::synthetic
