#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "travkit/geometry.hpp"
#include "travkit/gridmap.hpp"

namespace travkit {

struct Pose2 {
  double x = 0, y = 0, yaw = 0;
  Eigen::Vector2d xy() const { return {x, y}; }
};

struct CostWeights {
  double w_geo = 2.0;
  double w_sem = 4.0;
  double hard_geo_threshold = 0.1;
};

struct PlanQuery {
  Pose2 start;
  Pose2 goal;
  double goal_tolerance = 0.2;
  CostWeights weights;
};

struct PlannerParams {
  double step_size = 0.25;   // m, steering limit
  double r_max = 1.0;        // m, rewiring radius cap
  double gamma = 3.0;        // rewiring radius scale
  double goal_bias = 0.05;   // probability of sampling the goal
  // After the first solution, sample only where a cheaper path could pass
  // (the start/goal ellipse bounded by the best cost, valid since cost >= length).
  bool informed_sampling = true;
};

struct PlannedPath {
  std::vector<Eigen::Vector2d> waypoints;
  double total_cost = 0;
  double length = 0;
  double goal_yaw = 0;
};

struct PlanResult {
  std::optional<PlannedPath> path;
  std::string failure;  // empty on success
  std::size_t iterations = 0;
  std::size_t tree_size = 0;
  bool ok() const { return path.has_value(); }
};

/// Per-cell multiplier 1 + w_geo (1 - geo) + w_sem (1 - sem); infinite when
/// the cell is outside the map or geo < hard_geo_threshold. Geometric no-data
/// counts as 1, semantic no-data as the neutral value.
double cell_cost_factor(const TravGridMap& map, int ix, int iy, const CostWeights& weights);

/// Sum over ceil(L / res) equally spaced midpoint samples of ds * factor.
/// Infinite when any sample is rejected or leaves the map.
double edge_cost(const TravGridMap& map, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                 const CostWeights& weights);

/// Sum of edge_cost over consecutive waypoints.
double path_cost(const TravGridMap& map, const std::vector<Eigen::Vector2d>& waypoints,
                 const CostWeights& weights);

/// RRT* with choose-parent and rewiring inside r(n) = min(r_max, gamma sqrt(ln n / n)).
/// The returned path is the cheapest tree branch ending within goal_tolerance,
/// split so that consecutive waypoints are at most step_size apart.
PlanResult plan(const TravGridMap& map, const PlanQuery& query, std::size_t budget,
                std::uint64_t seed, const PlannerParams& params = {});

/// Target `distance` ahead of the pose along the world heading.
Pose2 waypoint_ahead(const Pose& pose, double distance, double heading);

/// Path JSON: {"waypoints": [[x,y],...], "cost": c, "length": l, ...}.
void save_path(const std::filesystem::path& file, const PlannedPath& path);

}  // namespace travkit
