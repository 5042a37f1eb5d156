#include "travkit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "travkit/config.hpp"
#include "travkit/errors.hpp"
#include "travkit/fusion.hpp"
#include "travkit/gridmap.hpp"
#include "travkit/image_io.hpp"
#include "travkit/metrics.hpp"
#include "travkit/overlay.hpp"
#include "travkit/pipeline.hpp"
#include "travkit/planner.hpp"
#include "travkit/synthetic.hpp"

namespace travkit {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("TRAVKIT_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to "off"; only accept what was asked for.
    if (parsed != spdlog::level::off || std::string(level) == "off") spdlog::set_level(parsed);
  }
}

std::vector<double> parse_numbers(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse ") + what + " '" + text + "'");
    }
  }
  return out;
}

Pose2 parse_pose2(const std::string& text, const char* what) {
  const auto v = parse_numbers(text, what);
  if (v.size() != 2 && v.size() != 3) throw UsageError(std::string(what) + " must be x,y[,yaw]");
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

std::size_t resolve_jobs(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

LabelCodec codec_for(const fs::path& dir) {
  const fs::path sidecar = dir / "label_codes.json";
  return fs::exists(sidecar) ? read_label_codes(sidecar) : LabelCodec{};
}

void write_json(const fs::path& file, const nlohmann::ordered_json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw InputError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

struct Options {
  std::string config;
  std::size_t jobs = 0;

  // annotate
  std::string frames, trajectory, camera, policy, out, fixture_masks, prompt_adapter, semantic_adapter;
  double height = 0, horizon = 0;
  std::size_t prompts = 0;
  bool point_labels = false;

  // evaluate
  std::string pred, gt, report;
  double threshold = 0;

  // map
  std::string depth, labels, center;

  // plan
  std::string map, start, goal, overlay;
  std::uint64_t seed = 0;
  std::size_t iters = 0;

  // simulate-fixtures
  std::size_t sim_frames = 10;
};

PipelineConfig base_config(const Options& o) {
  PipelineConfig cfg = o.config.empty() ? PipelineConfig{} : load_config(o.config);
  return cfg;
}

int cmd_annotate(const Options& o, const CLI::App& sub) {
  PipelineConfig cfg = base_config(o);
  if (sub.count("--height")) cfg.annotation.camera_height = o.height;
  if (sub.count("--horizon")) cfg.annotation.horizon = o.horizon;
  if (sub.count("--prompts")) cfg.annotation.prompts = o.prompts;
  if (sub.count("--policy")) cfg.policy = load_policy(o.policy);
  if (sub.count("--jobs")) cfg.jobs = o.jobs;
  cfg.validate();

  const bool fixtures = !o.fixture_masks.empty();
  const bool subprocess = !o.prompt_adapter.empty() || !o.semantic_adapter.empty();
  if (fixtures == subprocess) {
    throw UsageError("give either --fixture-masks or both --prompt-adapter and --semantic-adapter");
  }
  if (subprocess && (o.prompt_adapter.empty() || o.semantic_adapter.empty())) {
    throw UsageError("--prompt-adapter and --semantic-adapter must be given together");
  }

  AnnotationJob job;
  job.frames_dir = o.frames;
  job.trajectory = load_tum_trajectory(o.trajectory);
  job.camera = load_camera(o.camera);
  job.settings = cfg.annotation;
  job.policy = cfg.policy;
  job.out_dir = o.out;
  job.jobs = resolve_jobs(cfg.jobs);
  job.point_labels = o.point_labels;
  if (fixtures) {
    const fs::path root = o.fixture_masks;
    job.prompt_segmenter = [root] { return std::make_unique<FixturePromptSegmenter>(root); };
    job.semantic_segmenter = [root] { return std::make_unique<FixtureSemanticSegmenter>(root); };
  } else {
    const auto prompt_cmd = split_command(o.prompt_adapter);
    const auto semantic_cmd = split_command(o.semantic_adapter);
    job.prompt_segmenter = [prompt_cmd] { return std::make_unique<SubprocessPromptSegmenter>(prompt_cmd); };
    job.semantic_segmenter = [semantic_cmd] { return std::make_unique<SubprocessSemanticSegmenter>(semantic_cmd); };
  }

  const JobResult result = run_job(job);
  std::cout << "frames " << job.trajectory.size() << ", tuples " << result.tuples << ", skipped "
            << result.skipped << "\n"
            << "manifest " << (fs::path(o.out) / "manifest.json").string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o, const CLI::App& sub) {
  PipelineConfig cfg = base_config(o);
  if (sub.count("--threshold")) cfg.eval_threshold = o.threshold;
  cfg.validate();
  const EvalReport report = evaluate_directories(o.pred, o.gt, cfg.eval_threshold);
  const auto j = to_json(report);
  if (!o.report.empty()) write_json(o.report, j);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_map(const Options& o, const CLI::App&) {
  PipelineConfig cfg = base_config(o);
  cfg.validate();
  const Trajectory traj = load_tum_trajectory(o.trajectory);
  const CameraModel cam = load_camera(o.camera);
  const LabelCodec codec = codec_for(o.labels);

  Eigen::Vector2d center = traj[traj.size() - 1].position.head<2>();
  if (!o.center.empty()) {
    const auto c = parse_numbers(o.center, "--center");
    if (c.size() != 2) throw UsageError("--center must be x,y");
    center = {c[0], c[1]};
  }
  TravGridMap map = TravGridMap::centered_at(center, cfg.gridmap.size, cfg.gridmap.resolution);

  std::size_t frames = 0, binned = 0, dropped = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const std::string name = frame_stem(i) + ".png";
    const fs::path depth_file = fs::path(o.depth) / name, label_file = fs::path(o.labels) / name;
    if (!fs::exists(depth_file) || !fs::exists(label_file)) {
      spdlog::info("frame {} has no depth or label image, skipped", i);
      continue;
    }
    const DepthImage depth = depth_from_millimeters(read_png_gray16(depth_file));
    const TraversabilityRaster trav = read_label_png(label_file, codec);
    const AccumulateStats stats = accumulate(map, unproject(depth, trav, cam, traj[i]));
    binned += stats.binned;
    dropped += stats.dropped;
    ++frames;
  }
  if (frames == 0) throw EmptyInput("no frame has both a depth and a label image");
  geometric_traversability(map, cfg.gridmap.step_max, cfg.gridmap.slope_max);
  if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
  save_map(o.out, map);
  if (!o.overlay.empty()) write_overlay(o.overlay, map, {}, cfg.planner.weights.hard_geo_threshold);
  std::cout << "frames " << frames << ", points binned " << binned << ", dropped " << dropped << "\n";
  return kExitOk;
}

int cmd_plan(const Options& o, const CLI::App& sub) {
  PipelineConfig cfg = base_config(o);
  if (sub.count("--seed")) cfg.planner.seed = o.seed;
  if (sub.count("--iters")) cfg.planner.iterations = o.iters;
  cfg.validate();
  const TravGridMap map = load_map(o.map);
  PlanQuery query;
  query.start = parse_pose2(o.start, "--start");
  query.goal = parse_pose2(o.goal, "--goal");
  query.goal_tolerance = cfg.planner.goal_tolerance;
  query.weights = cfg.planner.weights;
  const PlanResult result = plan(map, query, cfg.planner.iterations, cfg.planner.seed, cfg.planner.params);
  if (!o.overlay.empty()) {
    write_overlay(o.overlay, map, result.path ? result.path->waypoints : std::vector<Eigen::Vector2d>{},
                  cfg.planner.weights.hard_geo_threshold);
  }
  if (!result.ok()) {
    std::cerr << "planning failed: " << result.failure << "\n";
    return kExitDomainError;
  }
  save_path(o.out, *result.path);
  std::cout << "waypoints " << result.path->waypoints.size() << ", length " << result.path->length
            << ", cost " << result.path->total_cost << "\n";
  return kExitOk;
}

int cmd_simulate(const Options& o, const CLI::App&) {
  synthetic::SequenceOptions opts;
  opts.frames = o.sim_frames;
  if (opts.frames == 0) throw UsageError("--frames must be >= 1");
  synthetic::write_sequence(o.out, opts);
  save_map(fs::path(o.out) / "corridor.map", synthetic::corridor_map());
  std::cout << "wrote " << opts.frames << " frames to " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  configure_logging();
  CLI::App app{"travkit: traversability labels, evaluation, grid maps and planning", "travkit"};
  app.require_subcommand(1);
  Options o;

  auto* annotate = app.add_subcommand("annotate", "build a labeled dataset from a walking sequence");
  annotate->add_option("--frames", o.frames, "directory of keyframe images <%06d>.png")->required();
  annotate->add_option("--trajectory", o.trajectory, "TUM trajectory file")->required();
  annotate->add_option("--camera", o.camera, "camera intrinsics JSON")->required();
  annotate->add_option("--height", o.height, "camera height above ground (m)");
  annotate->add_option("--horizon", o.horizon, "future horizon (s)");
  annotate->add_option("--prompts", o.prompts, "prompt points per frame");
  annotate->add_option("--policy", o.policy, "class policy JSON");
  annotate->add_option("--out", o.out, "output directory")->required();
  annotate->add_option("--fixture-masks", o.fixture_masks, "directory of precomputed segmenter outputs");
  annotate->add_option("--prompt-adapter", o.prompt_adapter, "prompt segmenter command");
  annotate->add_option("--semantic-adapter", o.semantic_adapter, "semantic segmenter command");
  annotate->add_flag("--point-labels", o.point_labels, "also write footstep-disc baseline labels");

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  evaluate->add_option("--pred", o.pred, "prediction PNG directory")->required();
  evaluate->add_option("--gt", o.gt, "ground truth PNG directory")->required();
  evaluate->add_option("--threshold", o.threshold, "binarization threshold");
  evaluate->add_option("--report", o.report, "write the report JSON here");

  auto* map = app.add_subcommand("map", "fuse depth and labels into a 2.5D grid map");
  map->add_option("--depth", o.depth, "16-bit millimeter depth PNG directory")->required();
  map->add_option("--labels", o.labels, "traversability label PNG directory")->required();
  map->add_option("--trajectory", o.trajectory, "TUM trajectory file")->required();
  map->add_option("--camera", o.camera, "camera intrinsics JSON")->required();
  map->add_option("--center", o.center, "map center x,y (default: last keyframe)");
  map->add_option("--out", o.out, "map file")->required();
  map->add_option("--overlay", o.overlay, "render the map to a PNG");

  auto* planc = app.add_subcommand("plan", "plan a path on a grid map");
  planc->add_option("--map", o.map, "map file")->required();
  planc->add_option("--start", o.start, "x,y,yaw")->required();
  planc->add_option("--goal", o.goal, "x,y,yaw")->required();
  planc->add_option("--seed", o.seed, "random seed");
  planc->add_option("--iters", o.iters, "iteration budget");
  planc->add_option("--out", o.out, "path JSON")->required();
  planc->add_option("--overlay", o.overlay, "render map and path to a PNG");

  auto* simulate = app.add_subcommand("simulate-fixtures", "write the synthetic sequence and fixtures");
  simulate->add_option("--out", o.out, "output directory")->required();
  simulate->add_option("--frames", o.sim_frames, "number of keyframes");

  for (auto* sub : {annotate, evaluate, map, planc}) {
    sub->add_option("--config", o.config, "pipeline configuration JSON");
  }
  annotate->add_option("--jobs", o.jobs, "worker threads (default: logical cores)");

  // CLI11 consumes a reversed argument vector without the program name.
  std::vector<std::string> reversed(args.empty() ? args.end() : args.begin() + 1, args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*annotate) return cmd_annotate(o, *annotate);
    if (*evaluate) return cmd_evaluate(o, *evaluate);
    if (*map) return cmd_map(o, *map);
    if (*planc) return cmd_plan(o, *planc);
    if (*simulate) return cmd_simulate(o, *simulate);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc));
}

}  // namespace travkit
