#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "travkit/kernels.hpp"
#include "travkit/raster.hpp"

namespace travkit {

inline constexpr double kDefaultBinarizeThreshold = 0.5;
inline constexpr double kDefaultZeroWeight = 0.05;

/// Precision/recall for both classes and their mean, IoU of the traversable
/// class, RMSE of raw predictions against binary ground truth.
///
/// A rate whose denominator is zero is 1 when the class is absent from both
/// prediction and ground truth (flagged in `*_absent`), and 0 otherwise.
struct EvalReport {
  double precision_trav = 0, precision_nontrav = 0, precision_avg = 0;
  double recall_trav = 0, recall_nontrav = 0, recall_avg = 0;
  double iou = 0;
  double rmse = 0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::uint64_t pixels = 0;
  std::uint64_t images = 0;
  bool trav_absent = false;
  bool nontrav_absent = false;
  double threshold = kDefaultBinarizeThreshold;
};

/// Sums confusion counts over many images, then reports pooled rates.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(double threshold = kDefaultBinarizeThreshold);
  void add(const TraversabilityRaster& pred, const TraversabilityRaster& gt);
  EvalReport report() const;

 private:
  double threshold_;
  kernels::ConfusionCounts counts_;
  std::uint64_t images_ = 0;
};

/// Throws ShapeError on dimension mismatch and InvalidParameter when gt is not binary.
EvalReport evaluate(const TraversabilityRaster& pred, const TraversabilityRaster& gt,
                    double binarize_threshold = kDefaultBinarizeThreshold);

/// Rates from raw counts (shared by evaluate and the accumulator).
EvalReport report_from_counts(const kernels::ConfusionCounts& counts, double threshold,
                              std::uint64_t images);

/// Evaluates every PNG in `pred_dir` against the same-named file in `gt_dir`.
/// Predictions decode through the label code table (sidecar `label_codes.json`
/// in pred_dir if present); ground truth is read as 0 / non-zero.
EvalReport evaluate_directories(const std::filesystem::path& pred_dir,
                                const std::filesystem::path& gt_dir, double threshold);

nlohmann::json to_json(const EvalReport& report);

/// Mean over pixels of (p-l)^2 where l > 0 and zero_weight*|p-l| where l == 0.
double traversability_loss(std::span<const double> pred, std::span<const double> label,
                           double zero_weight = kDefaultZeroWeight);
double traversability_loss(const TraversabilityRaster& pred, const TraversabilityRaster& label,
                           double zero_weight = kDefaultZeroWeight);

struct LossWithGradient {
  double loss = 0;
  std::vector<double> gradient;  // d loss / d pred, per pixel
};

/// Analytic gradient of the mean loss; at |p-l| = 0 on zero labels the
/// subgradient 0 is used.
LossWithGradient traversability_loss_with_gradient(std::span<const double> pred,
                                                   std::span<const double> label,
                                                   double zero_weight = kDefaultZeroWeight);

}  // namespace travkit
