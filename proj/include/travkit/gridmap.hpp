#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "travkit/geometry.hpp"
#include "travkit/raster.hpp"

namespace travkit {

inline constexpr double kDefaultMapSize = 10.0;          // m
inline constexpr double kDefaultMapResolution = 0.025;   // m / cell
inline constexpr double kDefaultStepMax = 0.15;          // m
inline constexpr double kDefaultSlopeMax = 0.6;          // rad
inline constexpr float kNoData = std::numeric_limits<float>::quiet_NaN();
/// Semantic value planners substitute for cells without semantic data.
inline constexpr double kNeutralSemantic = 0.5;

inline bool has_data(float v) { return !std::isnan(v); }

/// Depth in meters per pixel, 0 = invalid.
using DepthImage = Raster<float>;

struct LabeledPoint {
  Eigen::Vector3d position;  // world frame
  float traversability = 0.0f;
};

struct AccumulateStats {
  std::size_t binned = 0;
  std::size_t dropped = 0;
};

/// Dual-layer 2.5D grid map (height + semantic traversability) with a derived
/// geometric traversability layer. Cell (ix, iy) covers
/// [origin.x + ix*res, origin.x + (ix+1)*res) x [origin.y + iy*res, ...).
class TravGridMap {
 public:
  TravGridMap(double size_x = kDefaultMapSize, double size_y = kDefaultMapSize,
              double resolution = kDefaultMapResolution,
              Eigen::Vector2d origin = Eigen::Vector2d::Zero());
  /// Map of default size whose center is at `center`.
  static TravGridMap centered_at(const Eigen::Vector2d& center, double size = kDefaultMapSize,
                                 double resolution = kDefaultMapResolution);

  int cells_x() const { return nx_; }
  int cells_y() const { return ny_; }
  double resolution() const { return resolution_; }
  double size_x() const { return nx_ * resolution_; }
  double size_y() const { return ny_ * resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }

  bool cell_of(const Eigen::Vector2d& world, int& ix, int& iy) const;
  bool contains(const Eigen::Vector2d& world) const {
    int ix, iy;
    return cell_of(world, ix, iy);
  }
  Eigen::Vector2d cell_center(int ix, int iy) const;

  Raster<float>& height() { return height_; }
  const Raster<float>& height() const { return height_; }
  Raster<float>& semantic() { return semantic_; }
  const Raster<float>& semantic() const { return semantic_; }
  Raster<float>& geometric() { return geometric_; }
  const Raster<float>& geometric() const { return geometric_; }
  Raster<std::uint32_t>& counts() { return counts_; }
  const Raster<std::uint32_t>& counts() const { return counts_; }

  /// Semantic value with no-data replaced by the neutral value.
  double semantic_or_neutral(int ix, int iy) const {
    const float s = semantic_.at(ix, iy);
    return has_data(s) ? s : kNeutralSemantic;
  }

  /// Moves the origin by whole cells; values in the overlap keep their world
  /// position, newly exposed cells become no-data.
  void shift_cells(int dx, int dy);
  /// Recenters on `center`, snapping the shift to whole cells.
  void recenter(const Eigen::Vector2d& center);

 private:
  int nx_, ny_;
  double resolution_;
  Eigen::Vector2d origin_;
  Raster<float> height_, semantic_, geometric_;
  Raster<std::uint32_t> counts_;
};

/// Lifts every valid-depth pixel into the world with its traversability.
std::vector<LabeledPoint> unproject(const DepthImage& depth, const Raster<float>& trav,
                                    const CameraModel& camera, const Pose& pose);

/// Bins points into cells. Within the batch the highest point of a cell wins
/// (equal heights: the later point); the winner overwrites the cell's height
/// and semantic value. Points outside the map are counted as dropped.
AccumulateStats accumulate(TravGridMap& map, const std::vector<LabeledPoint>& points);

/// step = max |dh| to 8-neighbours with data, slope = atan(step / res);
/// 1 when step <= step_max and slope <= slope_max, else 0. Cells without
/// height stay no-data; isolated cells get 1.
void geometric_traversability(TravGridMap& map, double step_max = kDefaultStepMax,
                              double slope_max = kDefaultSlopeMax);

/// Converts a 16-bit millimeter depth PNG raster into meters.
DepthImage depth_from_millimeters(const Raster<std::uint16_t>& mm);

void save_map(const std::filesystem::path& path, const TravGridMap& map);
TravGridMap load_map(const std::filesystem::path& path);

}  // namespace travkit
