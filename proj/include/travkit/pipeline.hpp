#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "travkit/adapters.hpp"
#include "travkit/config.hpp"
#include "travkit/fusion.hpp"
#include "travkit/geometry.hpp"
#include "travkit/maskproc.hpp"

namespace travkit {

using PromptSegmenterFactory = std::function<std::unique_ptr<PromptSegmenter>()>;
using SemanticSegmenterFactory = std::function<std::unique_ptr<SemanticSegmenter>()>;

struct AnnotationJob {
  std::filesystem::path frames_dir;  // keyframe i is frames_dir/<%06d>.png
  Trajectory trajectory;
  CameraModel camera;
  AnnotationSettings settings;
  ClassPolicy policy = urban_policy();
  PromptSegmenterFactory prompt_segmenter;
  SemanticSegmenterFactory semantic_segmenter;
  std::filesystem::path out_dir;
  std::size_t jobs = 1;
  bool point_labels = false;  // also write the footstep-disc baseline

  void validate() const;
};

struct DatasetTuple {
  std::size_t frame_index = 0;
  std::filesystem::path image;
  std::filesystem::path label;  // relative to out_dir
  TraversabilityRaster label_raster;
  std::vector<Eigen::Vector2d> prompts;
  std::size_t selected_mask = 0;  // position in the adapter response
  bool sufficient = false;
  double inclusion_fraction = 0.0;
};

struct FrameOutcome {
  std::optional<DatasetTuple> tuple;
  std::string skip_reason;  // set when tuple is empty
};

/// Pure per-frame stages with adapters replaced by their outputs; no file I/O.
struct FramePrompts {
  PixelPoints footsteps;  // all in-image projected footsteps of the window
  PixelPoints prompts;    // farthest point subset
};

/// nullopt when no footstep of the window projects into the image.
std::optional<FramePrompts> compute_prompts(const Trajectory& trajectory, const CameraModel& camera,
                                            const AnnotationSettings& settings,
                                            std::size_t frame_index);

struct FrameLabel {
  TraversabilityRaster label;
  std::size_t selected_mask = 0;  // proposal id
  bool sufficient = false;
  double inclusion_fraction = 0.0;
};

/// area filter -> selection -> contour filter -> refinement. nullopt when no
/// proposal survives the area filter.
std::optional<FrameLabel> label_from_proposals(const MaskProposalSet& proposals,
                                               const FramePrompts& prompts,
                                               const SemanticMap& semantic,
                                               const AnnotationSettings& settings,
                                               const ClassPolicy& policy);

/// Full per-frame annotation with adapter calls and file output under job.out_dir.
FrameOutcome annotate_frame(const AnnotationJob& job, std::size_t frame_index,
                            PromptSegmenter& prompt_segmenter, SemanticSegmenter& semantic_segmenter);

struct JobResult {
  nlohmann::ordered_json manifest;
  std::size_t tuples = 0;
  std::size_t skipped = 0;
};

/// Annotates every keyframe on a worker pool, splits the tuples into train /
/// val with the seeded shuffle and writes out_dir/manifest.json. Throws
/// EmptyDataset when no frame produced a tuple (the manifest is still written).
JobResult run_job(const AnnotationJob& job);

/// Seeded Fisher-Yates over `items`; identical across platforms.
void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);

/// 1 within `radius` px of any footstep's pixel (floor of its coordinates), 0 elsewhere.
/// radius 0 marks exactly the footstep pixels.
TraversabilityRaster point_label_baseline(const PixelPoints& footsteps, double radius, int width,
                                          int height);

}  // namespace travkit
