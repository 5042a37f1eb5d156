#include "travkit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "travkit/errors.hpp"
#include "travkit/fusion.hpp"
#include "travkit/image_io.hpp"

namespace travkit {
namespace {

double rate(std::uint64_t num, std::uint64_t den, bool absent) {
  if (den == 0) return absent ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

void require_binary(const TraversabilityRaster& gt) {
  for (float v : gt.pixels()) {
    if (v != 0.0f && v != 1.0f) throw InvalidParameter("ground-truth raster must be binary {0, 1}");
  }
}

}  // namespace

EvalReport report_from_counts(const kernels::ConfusionCounts& c, double threshold,
                              std::uint64_t images) {
  EvalReport r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.tn = c.tn;
  r.pixels = c.tp + c.fp + c.fn + c.tn;
  r.images = images;
  r.threshold = threshold;
  r.trav_absent = c.tp + c.fp + c.fn == 0;
  r.nontrav_absent = c.tn + c.fn + c.fp == 0;
  r.precision_trav = rate(c.tp, c.tp + c.fp, r.trav_absent);
  r.recall_trav = rate(c.tp, c.tp + c.fn, r.trav_absent);
  // For the non-traversable class the roles of fp/fn swap.
  r.precision_nontrav = rate(c.tn, c.tn + c.fn, r.nontrav_absent);
  r.recall_nontrav = rate(c.tn, c.tn + c.fp, r.nontrav_absent);
  r.precision_avg = 0.5 * (r.precision_trav + r.precision_nontrav);
  r.recall_avg = 0.5 * (r.recall_trav + r.recall_nontrav);
  r.iou = rate(c.tp, c.tp + c.fp + c.fn, r.trav_absent);
  r.rmse = r.pixels == 0 ? 0.0 : std::sqrt(c.sse / static_cast<double>(r.pixels));
  return r;
}

EvalAccumulator::EvalAccumulator(double threshold) : threshold_(threshold) {}

void EvalAccumulator::add(const TraversabilityRaster& pred, const TraversabilityRaster& gt) {
  require_same_shape("evaluate pred vs gt", pred, gt);
  require_binary(gt);
  const auto c = kernels::active().confusion(pred.data(), gt.data(), pred.size(),
                                             static_cast<float>(threshold_));
  counts_.tp += c.tp;
  counts_.fp += c.fp;
  counts_.fn += c.fn;
  counts_.tn += c.tn;
  counts_.sse += c.sse;
  ++images_;
}

EvalReport EvalAccumulator::report() const { return report_from_counts(counts_, threshold_, images_); }

EvalReport evaluate(const TraversabilityRaster& pred, const TraversabilityRaster& gt,
                    double binarize_threshold) {
  EvalAccumulator acc(binarize_threshold);
  acc.add(pred, gt);
  return acc.report();
}

EvalReport evaluate_directories(const std::filesystem::path& pred_dir,
                                const std::filesystem::path& gt_dir, double threshold) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(pred_dir)) throw InputError("prediction directory not found: " + pred_dir.string());
  if (!fs::is_directory(gt_dir)) throw InputError("ground-truth directory not found: " + gt_dir.string());
  LabelCodec codec;
  if (fs::exists(pred_dir / "label_codes.json")) codec = read_label_codes(pred_dir / "label_codes.json");

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(pred_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no PNG predictions in " + pred_dir.string());

  EvalAccumulator acc(threshold);
  for (const auto& f : files) {
    const fs::path gt_path = gt_dir / f.filename();
    if (!fs::exists(gt_path)) throw InputError("missing ground truth for " + f.filename().string());
    const auto pred = read_label_png(f, codec);
    const BinaryMask gt_mask = read_mask_png(gt_path);
    TraversabilityRaster gt(gt_mask.width(), gt_mask.height());
    for (std::size_t i = 0; i < gt.size(); ++i) gt.data()[i] = gt_mask.data()[i] ? 1.0f : 0.0f;
    acc.add(pred, gt);
  }
  return acc.report();
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["precision"] = {{"traversable", r.precision_trav},
                    {"non_traversable", r.precision_nontrav},
                    {"average", r.precision_avg}};
  j["recall"] = {{"traversable", r.recall_trav},
                 {"non_traversable", r.recall_nontrav},
                 {"average", r.recall_avg}};
  j["iou"] = r.iou;
  j["rmse"] = r.rmse;
  j["counts"] = {{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn}, {"tn", r.tn}, {"pixels", r.pixels}};
  j["images"] = r.images;
  j["threshold"] = r.threshold;
  j["absent_classes"] = {{"traversable", r.trav_absent}, {"non_traversable", r.nontrav_absent}};
  return j;
}

double traversability_loss(std::span<const double> pred, std::span<const double> label,
                           double zero_weight) {
  if (pred.size() != label.size()) throw ShapeError("loss: prediction and label sizes differ");
  if (pred.empty()) return 0.0;
  const double sum = kernels::active().loss_sum(pred.data(), label.data(), pred.size(), zero_weight, nullptr);
  return sum / static_cast<double>(pred.size());
}

double traversability_loss(const TraversabilityRaster& pred, const TraversabilityRaster& label,
                           double zero_weight) {
  require_same_shape("loss pred vs label", pred, label);
  std::vector<double> p(pred.pixels().begin(), pred.pixels().end());
  std::vector<double> l(label.pixels().begin(), label.pixels().end());
  return traversability_loss(p, l, zero_weight);
}

LossWithGradient traversability_loss_with_gradient(std::span<const double> pred,
                                                   std::span<const double> label,
                                                   double zero_weight) {
  if (pred.size() != label.size()) throw ShapeError("loss: prediction and label sizes differ");
  LossWithGradient out;
  out.gradient.resize(pred.size());
  if (pred.empty()) return out;
  const double n = static_cast<double>(pred.size());
  out.loss = kernels::active().loss_sum(pred.data(), label.data(), pred.size(), zero_weight,
                                        out.gradient.data()) / n;
  for (auto& g : out.gradient) g /= n;
  return out;
}

}  // namespace travkit
