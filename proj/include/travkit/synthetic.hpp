#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "travkit/geometry.hpp"
#include "travkit/gridmap.hpp"
#include "travkit/planner.hpp"
#include "travkit/raster.hpp"

// Deterministic synthetic data: a walker on a sidewalk next to a road with a
// crosswalk, rendered by ray casting a flat ground plane, plus fixture
// segmenter outputs and ground truth. Used by `travkit simulate-fixtures`
// and by the test suites.
namespace travkit::synthetic {

enum SceneClass : std::uint8_t {
  kSky = 0,
  kSidewalk = 1,
  kRoad = 2,
  kCrosswalk = 3,
  kTerrain = 4,
};

std::map<int, std::string> scene_vocabulary();

struct SequenceOptions {
  std::size_t frames = 10;
  double frame_interval = 0.5;   // s between keyframes
  double walking_speed = 1.4;    // m/s along +x
  double camera_height = 1.36;   // m
  double pitch = 0.872664626;    // rad below the horizon (50 deg)
  int width = 320, height = 256;
  double focal = 120.0;          // px
  double max_depth = 10.0;       // m; farther depth pixels are written as invalid
};

CameraModel sequence_camera(const SequenceOptions& options);
Trajectory sequence_trajectory(const SequenceOptions& options);

/// Ground-plane class of a world point (z ignored).
SceneClass ground_class(double x, double y);

struct RenderedFrame {
  RgbImage rgb;
  Raster<std::uint8_t> classes;  // SceneClass per pixel
  Raster<float> depth;           // camera-frame depth in m, 0 where no ground
};

RenderedFrame render_frame(const Pose& pose, const CameraModel& camera, double max_depth);

/// Writes frames/, trajectory.txt, camera.json, policy.json, fixtures/, gt/, depth/ under `dir`.
void write_sequence(const std::filesystem::path& dir, const SequenceOptions& options = {});

/// Two routes between start (2, 5) and goal (6, 5) on a 10 m x 10 m map:
/// a straight road corridor (semantic 0.25) and a longer U-shaped sidewalk
/// detour (semantic 1). Everything else is geometrically rejected.
TravGridMap corridor_map(double resolution = kDefaultMapResolution);
Pose2 corridor_start();
Pose2 corridor_goal();

}  // namespace travkit::synthetic
