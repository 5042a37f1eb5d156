#include "travkit/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "travkit/errors.hpp"
#include "travkit/image_io.hpp"

namespace travkit {

namespace fs = std::filesystem;

void AnnotationJob::validate() const {
  camera.validate();
  if (!(settings.camera_height > 0)) throw InvalidParameter("camera height must be > 0");
  if (!(settings.horizon > 0)) throw InvalidParameter("time horizon must be > 0");
  if (settings.prompts < 1) throw InvalidParameter("prompt count must be >= 1");
  policy.validate();
  if (trajectory.size() == 0) throw InvalidParameter("annotation job has an empty trajectory");
  if (!prompt_segmenter || !semantic_segmenter) throw InvalidParameter("annotation job lacks adapters");
  if (out_dir.empty()) throw InvalidParameter("annotation job lacks an output directory");
}

std::optional<FramePrompts> compute_prompts(const Trajectory& trajectory, const CameraModel& camera,
                                            const AnnotationSettings& settings,
                                            std::size_t frame_index) {
  const IndexRange window = select_window(trajectory, frame_index, settings.horizon);
  const FootstepSet steps = extract_footsteps(trajectory, window, settings.camera_height);
  FramePrompts out;
  out.footsteps = project_points(steps, trajectory[frame_index], camera, frame_index, settings.near_plane);
  if (out.footsteps.points.empty()) return std::nullopt;
  out.prompts = farthest_point_sample(out.footsteps, settings.prompts);
  return out;
}

std::optional<FrameLabel> label_from_proposals(const MaskProposalSet& proposals,
                                               const FramePrompts& prompts,
                                               const SemanticMap& semantic,
                                               const AnnotationSettings& settings,
                                               const ClassPolicy& policy) {
  MaskProposalSet kept = area_filter(proposals, settings.min_area_fraction);
  if (kept.empty()) return std::nullopt;
  const std::size_t pick = select_mask_index(kept, prompts.prompts);
  BinaryMask mask;
  try {
    mask = contour_filter(kept.masks[pick]);
  } catch (const EmptyMask&) {
    return std::nullopt;
  }
  RefinedLabel refined = refine_label_detailed(mask, semantic, prompts.footsteps, policy);
  return FrameLabel{std::move(refined.label), kept.ids[pick], refined.sufficient,
                    refined.inclusion_fraction};
}

FrameOutcome annotate_frame(const AnnotationJob& job, std::size_t frame_index,
                            PromptSegmenter& prompt_segmenter, SemanticSegmenter& semantic_segmenter) {
  const std::string stem = frame_stem(frame_index);
  const fs::path frame_path = job.frames_dir / (stem + ".png");
  if (!fs::exists(frame_path)) throw InputError("missing frame file " + frame_path.string());

  FrameOutcome outcome;
  const auto prompts = compute_prompts(job.trajectory, job.camera, job.settings, frame_index);
  if (!prompts) {
    outcome.skip_reason = "no footstep projects into the image";
    return outcome;
  }

  const RgbImage rgb = read_png_rgb(frame_path);
  if (rgb.width != job.camera.width || rgb.height != job.camera.height) {
    throw InputError("frame " + frame_path.string() + " does not match the camera image size");
  }
  const fs::path gray_path = job.out_dir / "gray" / (stem + ".png");
  write_png_gray8(gray_path, to_gray(rgb));

  const auto id = static_cast<long long>(frame_index);
  const PromptResponse proposals_msg =
      prompt_segmenter.segment(PromptRequest{id, gray_path, prompts->prompts.points});
  MaskProposalSet proposals;
  for (std::size_t k = 0; k < proposals_msg.masks.size(); ++k) {
    BinaryMask m = read_mask_png(proposals_msg.masks[k]);
    if (m.width() != job.camera.width || m.height() != job.camera.height) {
      throw ProtocolError("mask " + proposals_msg.masks[k].string() + " does not match the frame size");
    }
    proposals.add(std::move(m), proposals_msg.scores[k]);
  }

  // Semantic evidence is only needed once a proposal survives.
  if (area_filter(proposals, job.settings.min_area_fraction).empty()) {
    outcome.skip_reason = "no mask proposal passed the area filter";
    return outcome;
  }
  const SemanticResponse sem_msg = semantic_segmenter.segment(SemanticRequest{id, frame_path});
  const SemanticMap semantic = load_semantic_map(sem_msg.semantic, sem_msg.vocabulary);
  if (semantic.classes.width() != job.camera.width || semantic.classes.height() != job.camera.height) {
    throw ProtocolError("semantic map " + sem_msg.semantic.string() + " does not match the frame size");
  }

  auto label = label_from_proposals(proposals, *prompts, semantic, job.settings, job.policy);
  if (!label) {
    outcome.skip_reason = "selected mask is empty";
    return outcome;
  }
  const fs::path label_rel = fs::path("labels") / (stem + ".png");
  write_label_png(job.out_dir / label_rel, label->label,
                  LabelCodec{job.policy.reduced_value, job.policy.full_value});
  if (job.point_labels) {
    const auto baseline = point_label_baseline(prompts->footsteps, job.settings.point_label_radius,
                                               job.camera.width, job.camera.height);
    write_label_png(job.out_dir / "point_labels" / (stem + ".png"), baseline, LabelCodec{});
  }

  DatasetTuple t;
  t.frame_index = frame_index;
  t.image = frame_path;
  t.label = label_rel;
  t.label_raster = std::move(label->label);
  t.prompts = prompts->prompts.points;
  t.selected_mask = label->selected_mask;
  t.sufficient = label->sufficient;
  t.inclusion_fraction = label->inclusion_fraction;
  outcome.tuple = std::move(t);
  return outcome;
}

void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

namespace {

nlohmann::ordered_json tuple_json(const DatasetTuple& t) {
  nlohmann::ordered_json j;
  j["frame"] = t.frame_index;
  j["image"] = t.image.generic_string();
  j["label"] = t.label.generic_string();
  j["prompts"] = nlohmann::ordered_json::array();
  for (const auto& p : t.prompts) j["prompts"].push_back({p.x(), p.y()});
  j["selected_mask"] = t.selected_mask;
  j["branch"] = t.sufficient ? "sufficient" : "insufficient";
  j["inclusion"] = t.inclusion_fraction;
  return j;
}

}  // namespace

JobResult run_job(const AnnotationJob& job) {
  job.validate();
  fs::create_directories(job.out_dir / "labels");
  fs::create_directories(job.out_dir / "gray");
  if (job.point_labels) fs::create_directories(job.out_dir / "point_labels");

  const std::size_t n = job.trajectory.size();
  std::vector<FrameOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<bool> stop{false};

  auto worker = [&] {
    try {
      auto prompt = job.prompt_segmenter();
      auto semantic = job.semantic_segmenter();
      for (std::size_t i = next++; i < n && !stop; i = next++) {
        outcomes[i] = annotate_frame(job, i, *prompt, *semantic);
        if (!outcomes[i].tuple) spdlog::debug("frame {} skipped: {}", i, outcomes[i].skip_reason);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      stop = true;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(job.jobs, 1, n);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<std::size_t> ok;
  nlohmann::ordered_json skips = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < n; ++i) {
    if (outcomes[i].tuple) {
      ok.push_back(i);
    } else {
      skips.push_back({{"frame", i}, {"reason", outcomes[i].skip_reason}});
    }
  }

  std::vector<std::size_t> order = ok;
  seeded_shuffle(order, job.settings.split_seed);
  const auto n_val = static_cast<std::size_t>(std::llround(job.settings.val_ratio * static_cast<double>(ok.size())));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());

  const LabelCodec codec{job.policy.reduced_value, job.policy.full_value};
  write_label_codes(job.out_dir / "label_codes.json", codec);
  write_label_codes(job.out_dir / "labels" / "label_codes.json", codec);

  JobResult result;
  result.tuples = ok.size();
  result.skipped = n - ok.size();
  auto& m = result.manifest;
  m["format"] = "travkit-dataset";
  m["version"] = 1;
  m["config"] = {{"camera_height", job.settings.camera_height},
                 {"horizon", job.settings.horizon},
                 {"prompts", job.settings.prompts},
                 {"min_area_fraction", job.settings.min_area_fraction},
                 {"near_plane", job.settings.near_plane},
                 {"split_seed", job.settings.split_seed},
                 {"val_ratio", job.settings.val_ratio},
                 {"policy", to_json(job.policy)}};
  m["frames"] = n;
  m["tuples"] = result.tuples;
  m["skipped"] = result.skipped;
  m["skips"] = skips;
  m["label_codes"] = "label_codes.json";
  m["splits"] = {{"train", nlohmann::ordered_json::array()}, {"val", nlohmann::ordered_json::array()}};
  for (auto i : train) m["splits"]["train"].push_back(tuple_json(*outcomes[i].tuple));
  for (auto i : val) m["splits"]["val"].push_back(tuple_json(*outcomes[i].tuple));

  {
    std::ofstream out(job.out_dir / "manifest.json");
    if (!out) throw InputError("cannot write manifest under " + job.out_dir.string());
    out << m.dump(2) << '\n';
  }
  if (ok.empty()) throw EmptyDataset("no frame produced a label (" + std::to_string(n) + " skipped)");
  return result;
}

TraversabilityRaster point_label_baseline(const PixelPoints& footsteps, double radius, int width,
                                          int height) {
  if (!(radius >= 0.0)) throw InvalidParameter("point-label radius must be >= 0");
  TraversabilityRaster out(width, height, 0.0f);
  const int reach = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  for (const auto& p : footsteps.points) {
    const int cu = static_cast<int>(std::floor(p.x()));
    const int cv = static_cast<int>(std::floor(p.y()));
    for (int v = std::max(0, cv - reach); v <= std::min(height - 1, cv + reach); ++v) {
      for (int u = std::max(0, cu - reach); u <= std::min(width - 1, cu + reach); ++u) {
        const double du = u - cu, dv = v - cv;
        if (du * du + dv * dv <= r2) out.at(u, v) = 1.0f;
      }
    }
  }
  return out;
}

}  // namespace travkit
