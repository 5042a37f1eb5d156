#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "travkit/geometry.hpp"
#include "travkit/raster.hpp"

namespace travkit {

inline constexpr double kDefaultMinAreaFraction = 0.02;

/// Candidate masks from the promptable segmenter. `ids` remember each
/// proposal's position in the adapter response so filtering keeps provenance.
struct MaskProposalSet {
  std::vector<BinaryMask> masks;
  std::vector<double> scores;
  std::vector<std::size_t> ids;

  std::size_t size() const { return masks.size(); }
  bool empty() const { return masks.empty(); }
  /// Appends a proposal; id defaults to its current position.
  void add(BinaryMask mask, double score = 1.0);
  /// masks/scores/ids lengths agree and all masks share one shape.
  void validate() const;
};

std::size_t mask_area(const BinaryMask& mask);

/// Keeps proposals with area >= fraction * width * height.
MaskProposalSet area_filter(const MaskProposalSet& proposals, double min_area_fraction);

/// Index (into `proposals`) of the proposal covering the most prompt points;
/// ties go to higher score, then larger area, then lexicographically smaller
/// pixel data, which makes the choice independent of proposal order.
std::size_t select_mask_index(const MaskProposalSet& proposals, const PixelPoints& prompts);
BinaryMask select_mask(const MaskProposalSet& proposals, const PixelPoints& prompts);

struct ComponentLabels {
  Raster<std::int32_t> labels;     // 0 = background, components numbered from 1 in scan order
  std::vector<std::size_t> areas;  // areas[k-1] is the area of component k
};

/// 8-connected component labelling.
ComponentLabels label_components(const BinaryMask& mask);

/// Keeps only the largest 8-connected component. Equal areas resolve to the
/// component whose first pixel in (v, u) order comes first.
BinaryMask contour_filter(const BinaryMask& mask);

}  // namespace travkit
