#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace travkit {

inline constexpr double kDefaultNearPlane = 0.05;  // m, camera-frame depth cutoff

/// Camera pose in the gravity-aligned world frame (z up). `rotation` maps
/// camera-frame vectors into the world frame; `position` is the optical
/// center. Camera frame is x right, y down, z forward.
struct Pose {
  double timestamp = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d position = Eigen::Vector3d::Zero();

  static Pose from_quaternion(double timestamp, const Eigen::Vector3d& position,
                              const Eigen::Quaterniond& q);

  Eigen::Isometry3d world_from_camera() const;
  Eigen::Isometry3d camera_from_world() const;
  bool is_valid_rotation(double tol = 1e-9) const;
};

class Trajectory {
 public:
  Trajectory() = default;
  /// Throws InvalidParameter if empty, timestamps are not strictly increasing,
  /// or a rotation is not orthonormal.
  explicit Trajectory(std::vector<Pose> keyframes);

  std::size_t size() const { return keyframes_.size(); }
  const Pose& operator[](std::size_t i) const { return keyframes_[i]; }
  const std::vector<Pose>& keyframes() const { return keyframes_; }

 private:
  std::vector<Pose> keyframes_;
};

struct CameraModel {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const;
  Eigen::Matrix3d K() const;
  bool in_image(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u < static_cast<double>(width) && v < static_cast<double>(height);
  }
};

struct FootstepSet {
  std::vector<Eigen::Vector3d> points_world;
};

struct PixelPoints {
  std::vector<Eigen::Vector2d> points;
  std::size_t frame_index = 0;
};

/// Inclusive index range [first, last].
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const { return last - first + 1; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// footstep_i = position_i - [0, 0, camera_height]. camera_height == 0 is
/// accepted as the identity case; negative heights throw InvalidParameter.
FootstepSet extract_footsteps(const Trajectory& trajectory, double camera_height);
/// Same as above restricted to the keyframes in `window`.
FootstepSet extract_footsteps(const Trajectory& trajectory, const IndexRange& window,
                              double camera_height);

/// Keyframes j with t(frame) <= t(j) <= t(frame) + horizon.
IndexRange select_window(const Trajectory& trajectory, std::size_t frame_index, double horizon);

/// Projects world points into the image of `pose`. Points closer than
/// `near_plane` along the optical axis, or outside the image, are dropped.
PixelPoints project_points(const FootstepSet& points, const Pose& pose, const CameraModel& camera,
                           std::size_t frame_index = 0, double near_plane = kDefaultNearPlane);

/// Single point projection; nullopt when behind the near plane.
std::optional<Eigen::Vector2d> project_point(const Eigen::Vector3d& point_world, const Pose& pose,
                                             const CameraModel& camera,
                                             double near_plane = kDefaultNearPlane);

/// Camera-frame depth (z) of a world point.
double camera_depth(const Eigen::Vector3d& point_world, const Pose& pose);

/// World point seen at pixel (u, v) with camera-frame depth `depth`.
Eigen::Vector3d unproject_pixel(double u, double v, double depth, const Pose& pose,
                                const CameraModel& camera);

/// Greedy max-min subset. Seed is the point with the largest v (ties: smallest
/// u, then first in input order); subsequent picks take the point with the
/// largest squared distance to the selection, ties going to the earliest
/// input index. Returns all points unchanged when |points| <= count.
PixelPoints farthest_point_sample(const PixelPoints& points, std::size_t count);

// File formats.
Trajectory load_tum_trajectory(const std::filesystem::path& path);
void save_tum_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);
CameraModel load_camera(const std::filesystem::path& path);
void save_camera(const std::filesystem::path& path, const CameraModel& camera);

}  // namespace travkit
