#include "travkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "travkit/errors.hpp"

namespace travkit {

Pose Pose::from_quaternion(double timestamp, const Eigen::Vector3d& position,
                           const Eigen::Quaterniond& q) {
  Pose p;
  p.timestamp = timestamp;
  p.position = position;
  p.rotation = q.normalized().toRotationMatrix();
  return p;
}

Eigen::Isometry3d Pose::world_from_camera() const {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = rotation;
  T.translation() = position;
  return T;
}

Eigen::Isometry3d Pose::camera_from_world() const {
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  T.linear() = rotation.transpose();
  T.translation() = -(rotation.transpose() * position);
  return T;
}

bool Pose::is_valid_rotation(double tol) const {
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= std::max(tol, 1e-9);
}

Trajectory::Trajectory(std::vector<Pose> keyframes) : keyframes_(std::move(keyframes)) {
  if (keyframes_.empty()) throw InvalidParameter("trajectory must contain at least one keyframe");
  for (std::size_t i = 0; i < keyframes_.size(); ++i) {
    if (!keyframes_[i].is_valid_rotation(1e-9)) {
      throw InvalidParameter("keyframe " + std::to_string(i) + " has a non-orthonormal rotation");
    }
    if (i > 0 && !(keyframes_[i].timestamp > keyframes_[i - 1].timestamp)) {
      throw InvalidParameter("trajectory timestamps must be strictly increasing (keyframe " +
                             std::to_string(i) + ")");
    }
  }
}

void CameraModel::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw InvalidParameter("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidParameter("camera image size must be positive");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height)) {
    throw InvalidParameter("camera principal point must lie inside the image");
  }
}

Eigen::Matrix3d CameraModel::K() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

FootstepSet extract_footsteps(const Trajectory& trajectory, const IndexRange& window,
                              double camera_height) {
  if (!std::isfinite(camera_height) || camera_height < 0.0) {
    throw InvalidParameter("camera height must be a non-negative distance");
  }
  if (window.last >= trajectory.size() || window.first > window.last) {
    throw IndexError("footstep window out of range");
  }
  FootstepSet out;
  out.points_world.reserve(window.count());
  const Eigen::Vector3d drop(0.0, 0.0, camera_height);
  for (std::size_t i = window.first; i <= window.last; ++i) {
    out.points_world.push_back(trajectory[i].position - drop);
  }
  return out;
}

FootstepSet extract_footsteps(const Trajectory& trajectory, double camera_height) {
  if (trajectory.size() == 0) return {};
  return extract_footsteps(trajectory, IndexRange{0, trajectory.size() - 1}, camera_height);
}

IndexRange select_window(const Trajectory& trajectory, std::size_t frame_index, double horizon) {
  if (frame_index >= trajectory.size()) {
    throw IndexError("frame index " + std::to_string(frame_index) + " outside trajectory of " +
                     std::to_string(trajectory.size()) + " keyframes");
  }
  if (!(horizon > 0.0)) throw InvalidParameter("time horizon must be positive");
  const double t_end = trajectory[frame_index].timestamp + horizon;
  const auto& kf = trajectory.keyframes();
  // Timestamps are strictly increasing, so the window is contiguous.
  auto past = std::upper_bound(kf.begin() + static_cast<std::ptrdiff_t>(frame_index), kf.end(), t_end,
                               [](double t, const Pose& p) { return t < p.timestamp; });
  return IndexRange{frame_index, static_cast<std::size_t>(past - kf.begin()) - 1};
}

double camera_depth(const Eigen::Vector3d& point_world, const Pose& pose) {
  return pose.rotation.col(2).dot(point_world - pose.position);
}

std::optional<Eigen::Vector2d> project_point(const Eigen::Vector3d& point_world, const Pose& pose,
                                             const CameraModel& camera, double near_plane) {
  const Eigen::Vector3d pc = pose.rotation.transpose() * (point_world - pose.position);
  if (!(pc.z() > near_plane)) return std::nullopt;
  return Eigen::Vector2d(camera.fx * pc.x() / pc.z() + camera.cx,
                         camera.fy * pc.y() / pc.z() + camera.cy);
}

PixelPoints project_points(const FootstepSet& points, const Pose& pose, const CameraModel& camera,
                           std::size_t frame_index, double near_plane) {
  PixelPoints out;
  out.frame_index = frame_index;
  out.points.reserve(points.points_world.size());
  for (const auto& p : points.points_world) {
    auto px = project_point(p, pose, camera, near_plane);
    if (px && camera.in_image(px->x(), px->y())) out.points.push_back(*px);
  }
  return out;
}

Eigen::Vector3d unproject_pixel(double u, double v, double depth, const Pose& pose,
                                const CameraModel& camera) {
  const Eigen::Vector3d pc((u - camera.cx) / camera.fx * depth, (v - camera.cy) / camera.fy * depth,
                           depth);
  return pose.rotation * pc + pose.position;
}

PixelPoints farthest_point_sample(const PixelPoints& points, std::size_t count) {
  if (points.points.empty()) throw EmptyInput("farthest point sampling needs at least one point");
  if (count == 0) throw InvalidParameter("farthest point sampling count must be >= 1");
  const auto& pts = points.points;
  if (pts.size() <= count) return points;

  std::size_t seed = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[seed];
    if (a.y() > b.y() || (a.y() == b.y() && a.x() < b.x())) seed = i;
  }

  PixelPoints out;
  out.frame_index = points.frame_index;
  out.points.reserve(count);
  std::vector<double> min_d2(pts.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> taken(pts.size(), false);
  std::size_t current = seed;
  for (;;) {
    out.points.push_back(pts[current]);
    taken[current] = true;
    if (out.points.size() == count) break;
    std::size_t best = pts.size();
    double best_d2 = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (taken[i]) continue;
      const Eigen::Vector2d d = pts[i] - pts[current];
      const double d2 = d.x() * d.x() + d.y() * d.y();
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2) {
        best_d2 = min_d2[i];
        best = i;
      }
    }
    current = best;
  }
  return out;
}

Trajectory load_tum_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trajectory file " + path.string());
  std::vector<Pose> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw InputError(path.string() + ":" + std::to_string(lineno) +
                       ": expected 'timestamp tx ty tz qx qy qz qw'");
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (q.norm() < 1e-12) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": zero quaternion");
    }
    poses.push_back(Pose::from_quaternion(t, {tx, ty, tz}, q));
  }
  return Trajectory(std::move(poses));
}

void save_tum_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write trajectory file " + path.string());
  out << std::setprecision(17);
  for (const auto& p : trajectory.keyframes()) {
    Eigen::Quaterniond q(p.rotation);
    out << p.timestamp << ' ' << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z()
        << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w() << '\n';
  }
}

CameraModel load_camera(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open camera file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    CameraModel cam;
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.validate();
    return cam;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed camera file " + path.string() + ": " + e.what());
  }
}

void save_camera(const std::filesystem::path& path, const CameraModel& camera) {
  nlohmann::ordered_json j;
  j["fx"] = camera.fx;
  j["fy"] = camera.fy;
  j["cx"] = camera.cx;
  j["cy"] = camera.cy;
  j["width"] = camera.width;
  j["height"] = camera.height;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write camera file " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace travkit
