#include "travkit/config.hpp"

#include <fstream>
#include <set>

#include "travkit/errors.hpp"

namespace travkit {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown configuration key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("configuration key '" + where + "." + key + "' has the wrong type");
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  const auto& a = annotation;
  if (!(a.camera_height > 0)) throw ConfigError("annotation.camera_height must be > 0");
  if (!(a.horizon > 0)) throw ConfigError("annotation.horizon must be > 0");
  if (a.prompts < 1) throw ConfigError("annotation.prompts must be >= 1");
  if (!(a.min_area_fraction >= 0 && a.min_area_fraction <= 1)) {
    throw ConfigError("annotation.min_area_fraction must lie in [0, 1]");
  }
  if (!(a.near_plane >= 0)) throw ConfigError("annotation.near_plane must be >= 0");
  if (!(a.val_ratio >= 0 && a.val_ratio < 1)) throw ConfigError("annotation.val_ratio must lie in [0, 1)");
  if (!(a.point_label_radius >= 0)) throw ConfigError("annotation.point_label_radius must be >= 0");
  try {
    policy.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("policy: ") + e.what());
  }
  if (!(eval_threshold >= 0 && eval_threshold <= 1)) throw ConfigError("evaluation.threshold must lie in [0, 1]");
  if (!(gridmap.size > 0) || !(gridmap.resolution > 0)) {
    throw ConfigError("gridmap.size and gridmap.resolution must be > 0");
  }
  if (!(gridmap.step_max >= 0) || !(gridmap.slope_max >= 0)) {
    throw ConfigError("gridmap.step_max and gridmap.slope_max must be >= 0");
  }
  const auto& p = planner;
  if (!(p.weights.w_geo >= 0) || !(p.weights.w_sem >= 0)) throw ConfigError("planner weights must be >= 0");
  if (!(p.weights.hard_geo_threshold >= 0 && p.weights.hard_geo_threshold <= 1)) {
    throw ConfigError("planner.hard_geo_threshold must lie in [0, 1]");
  }
  if (!(p.params.step_size > 0) || !(p.params.r_max > 0) || !(p.params.gamma > 0)) {
    throw ConfigError("planner.step_size, r_max and gamma must be > 0");
  }
  if (!(p.params.goal_bias >= 0 && p.params.goal_bias <= 1)) throw ConfigError("planner.goal_bias must lie in [0, 1]");
  if (!(p.goal_tolerance > 0)) throw ConfigError("planner.goal_tolerance must be > 0");
  if (!(p.waypoint_distance > 0)) throw ConfigError("planner.waypoint_distance must be > 0");
}

ClassPolicy policy_from_json(const json& j, const ClassPolicy& base) {
  reject_unknown(j,
                 {"preset", "add_classes", "remove_classes", "road_like_classes", "reduced_value",
                  "full_value", "inclusion_threshold", "aliases"},
                 "policy");
  ClassPolicy p = base;
  if (j.contains("preset")) {
    std::string preset;
    read(j, "preset", preset, "policy");
    if (preset == "urban") {
      p = urban_policy();
    } else if (preset == "rellis") {
      p = rellis_policy();
    } else if (preset == "none") {
      p = empty_policy();
    } else {
      throw ConfigError("unknown policy preset '" + preset + "'");
    }
  }
  read(j, "add_classes", p.add_classes, "policy");
  read(j, "remove_classes", p.remove_classes, "policy");
  read(j, "road_like_classes", p.road_like_classes, "policy");
  read(j, "reduced_value", p.reduced_value, "policy");
  read(j, "full_value", p.full_value, "policy");
  read(j, "inclusion_threshold", p.inclusion_threshold, "policy");
  read(j, "aliases", p.aliases, "policy");
  try {
    p.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("policy: ") + e.what());
  }
  return p;
}

ClassPolicy load_policy(const std::filesystem::path& path) { return policy_from_json(read_json(path)); }

void apply_config_json(PipelineConfig& c, const json& j) {
  reject_unknown(j, {"annotation", "policy", "evaluation", "gridmap", "planner", "jobs"}, "config");
  if (j.contains("annotation")) {
    const json& a = j["annotation"];
    reject_unknown(a,
                   {"camera_height", "horizon", "prompts", "min_area_fraction", "near_plane",
                    "split_seed", "val_ratio", "point_label_radius"},
                   "annotation");
    read(a, "camera_height", c.annotation.camera_height, "annotation");
    read(a, "horizon", c.annotation.horizon, "annotation");
    read(a, "prompts", c.annotation.prompts, "annotation");
    read(a, "min_area_fraction", c.annotation.min_area_fraction, "annotation");
    read(a, "near_plane", c.annotation.near_plane, "annotation");
    read(a, "split_seed", c.annotation.split_seed, "annotation");
    read(a, "val_ratio", c.annotation.val_ratio, "annotation");
    read(a, "point_label_radius", c.annotation.point_label_radius, "annotation");
  }
  if (j.contains("policy")) c.policy = policy_from_json(j["policy"], c.policy);
  if (j.contains("evaluation")) {
    reject_unknown(j["evaluation"], {"threshold"}, "evaluation");
    read(j["evaluation"], "threshold", c.eval_threshold, "evaluation");
  }
  if (j.contains("gridmap")) {
    const json& g = j["gridmap"];
    reject_unknown(g, {"size", "resolution", "step_max", "slope_max"}, "gridmap");
    read(g, "size", c.gridmap.size, "gridmap");
    read(g, "resolution", c.gridmap.resolution, "gridmap");
    read(g, "step_max", c.gridmap.step_max, "gridmap");
    read(g, "slope_max", c.gridmap.slope_max, "gridmap");
  }
  if (j.contains("planner")) {
    const json& p = j["planner"];
    reject_unknown(p,
                   {"w_geo", "w_sem", "hard_geo_threshold", "step_size", "r_max", "gamma", "goal_bias",
                    "goal_tolerance", "iterations", "seed", "waypoint_distance"},
                   "planner");
    read(p, "w_geo", c.planner.weights.w_geo, "planner");
    read(p, "w_sem", c.planner.weights.w_sem, "planner");
    read(p, "hard_geo_threshold", c.planner.weights.hard_geo_threshold, "planner");
    read(p, "step_size", c.planner.params.step_size, "planner");
    read(p, "r_max", c.planner.params.r_max, "planner");
    read(p, "gamma", c.planner.params.gamma, "planner");
    read(p, "goal_bias", c.planner.params.goal_bias, "planner");
    read(p, "goal_tolerance", c.planner.goal_tolerance, "planner");
    read(p, "iterations", c.planner.iterations, "planner");
    read(p, "seed", c.planner.seed, "planner");
    read(p, "waypoint_distance", c.planner.waypoint_distance, "planner");
  }
  read(j, "jobs", c.jobs, "config");
  c.validate();
}

PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig c;
  apply_config_json(c, read_json(path));
  return c;
}

nlohmann::ordered_json to_json(const ClassPolicy& p) {
  nlohmann::ordered_json j;
  j["add_classes"] = p.add_classes;
  j["remove_classes"] = p.remove_classes;
  j["road_like_classes"] = p.road_like_classes;
  j["reduced_value"] = p.reduced_value;
  j["full_value"] = p.full_value;
  j["inclusion_threshold"] = p.inclusion_threshold;
  j["aliases"] = p.aliases;
  return j;
}

nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["annotation"] = {{"camera_height", c.annotation.camera_height},
                     {"horizon", c.annotation.horizon},
                     {"prompts", c.annotation.prompts},
                     {"min_area_fraction", c.annotation.min_area_fraction},
                     {"near_plane", c.annotation.near_plane},
                     {"split_seed", c.annotation.split_seed},
                     {"val_ratio", c.annotation.val_ratio},
                     {"point_label_radius", c.annotation.point_label_radius}};
  j["policy"] = to_json(c.policy);
  j["evaluation"] = {{"threshold", c.eval_threshold}};
  j["gridmap"] = {{"size", c.gridmap.size},
                  {"resolution", c.gridmap.resolution},
                  {"step_max", c.gridmap.step_max},
                  {"slope_max", c.gridmap.slope_max}};
  j["planner"] = {{"w_geo", c.planner.weights.w_geo},
                  {"w_sem", c.planner.weights.w_sem},
                  {"hard_geo_threshold", c.planner.weights.hard_geo_threshold},
                  {"step_size", c.planner.params.step_size},
                  {"r_max", c.planner.params.r_max},
                  {"gamma", c.planner.params.gamma},
                  {"goal_bias", c.planner.params.goal_bias},
                  {"goal_tolerance", c.planner.goal_tolerance},
                  {"iterations", c.planner.iterations},
                  {"seed", c.planner.seed},
                  {"waypoint_distance", c.planner.waypoint_distance}};
  j["jobs"] = c.jobs;
  return j;
}

}  // namespace travkit
