#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "travkit/fusion.hpp"
#include "travkit/geometry.hpp"
#include "travkit/gridmap.hpp"
#include "travkit/maskproc.hpp"
#include "travkit/metrics.hpp"
#include "travkit/planner.hpp"

namespace travkit {

struct AnnotationSettings {
  double camera_height = 1.36;  // m
  double horizon = 3.0;         // s
  std::size_t prompts = 3;
  double min_area_fraction = kDefaultMinAreaFraction;
  double near_plane = kDefaultNearPlane;
  std::uint64_t split_seed = 42;
  double val_ratio = 0.1;
  double point_label_radius = 30.0;  // px
};

struct GridMapSettings {
  double size = kDefaultMapSize;
  double resolution = kDefaultMapResolution;
  double step_max = kDefaultStepMax;
  double slope_max = kDefaultSlopeMax;
};

struct PlannerSettings {
  CostWeights weights;
  PlannerParams params;
  double goal_tolerance = 0.2;
  std::size_t iterations = 5000;
  std::uint64_t seed = 0;
  double waypoint_distance = 4.0;  // m
};

/// Every tunable of the toolkit in one declarative document.
struct PipelineConfig {
  AnnotationSettings annotation;
  ClassPolicy policy = urban_policy();
  double eval_threshold = kDefaultBinarizeThreshold;
  GridMapSettings gridmap;
  PlannerSettings planner;
  std::size_t jobs = 0;  // 0 = hardware concurrency

  /// Range checks; throws ConfigError.
  void validate() const;
};

/// Overlays `j` onto `config`. Unknown keys and out-of-range values throw ConfigError.
void apply_config_json(PipelineConfig& config, const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const PipelineConfig& config);

/// Policy document: {"preset": "urban"|"rellis"|"none", ...overrides} or the explicit fields.
ClassPolicy policy_from_json(const nlohmann::json& j, const ClassPolicy& base = urban_policy());
ClassPolicy load_policy(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ClassPolicy& policy);

}  // namespace travkit
