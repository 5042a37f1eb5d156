#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "travkit/geometry.hpp"
#include "travkit/raster.hpp"

namespace travkit {

inline constexpr double kDefaultInclusionThreshold = 0.7;

/// Class-index raster with its vocabulary (index -> name).
struct SemanticMap {
  Raster<std::uint8_t> classes;
  std::map<int, std::string> vocabulary;

  /// Every index present in `classes` must exist in the vocabulary.
  void validate() const;
};

struct ClassPolicy {
  std::set<std::string> add_classes;
  std::set<std::string> remove_classes;
  std::set<std::string> road_like_classes;
  float reduced_value = 0.25f;
  float full_value = 1.0f;
  double inclusion_threshold = kDefaultInclusionThreshold;
  /// Vocabulary name -> policy name, applied before matching.
  std::map<std::string, std::string> aliases;

  void validate() const;
  std::string canonical(const std::string& name) const;
};

/// add={crosswalk, lane-marking-crosswalk}, remove=road_like={road}, 0.25 / 1.
ClassPolicy urban_policy();
/// remove={vegetation}, nothing added, no reduced classes.
ClassPolicy rellis_policy();
/// Policy with no class roles; refine_label reduces to mask * full_value.
ClassPolicy empty_policy();

/// Per class index ClassFlag bits for a vocabulary under a policy.
std::array<std::uint8_t, 256> class_flag_table(const SemanticMap& semantic, const ClassPolicy& policy);

struct RefinedLabel {
  TraversabilityRaster label;
  bool sufficient = false;          // which branch produced the label
  double inclusion_fraction = 0.0;  // footsteps inside the remaining region
};

/// Merges the selected prompt mask with semantic evidence into a label with
/// values {0, reduced_value, full_value}.
RefinedLabel refine_label_detailed(const BinaryMask& mask, const SemanticMap& semantic,
                                   const PixelPoints& footsteps, const ClassPolicy& policy);
TraversabilityRaster refine_label(const BinaryMask& mask, const SemanticMap& semantic,
                                  const PixelPoints& footsteps, const ClassPolicy& policy);

/// Per-pixel class -> value lookup; unknown classes map to 0.
TraversabilityRaster heuristic_value_map(const SemanticMap& semantic,
                                         const std::map<std::string, double>& value_table);

/// Baseline class tables: "urban-segformer", "urban-mask2former",
/// "rellis-segformer", "rellis-mask2former".
std::map<std::string, double> heuristic_table(const std::string& name);

// Label PNG codes: 0 -> 0, reduced -> 64, full -> 255; other values round(v*255).
inline constexpr std::uint8_t kCodeZero = 0;
inline constexpr std::uint8_t kCodeReduced = 64;
inline constexpr std::uint8_t kCodeFull = 255;

struct LabelCodec {
  float reduced_value = 0.25f;
  float full_value = 1.0f;

  std::uint8_t encode(float value) const;
  float decode(std::uint8_t code) const;
};

Raster<std::uint8_t> encode_label(const TraversabilityRaster& label, const LabelCodec& codec);
TraversabilityRaster decode_label(const Raster<std::uint8_t>& codes, const LabelCodec& codec);

void write_label_png(const std::filesystem::path& path, const TraversabilityRaster& label,
                     const LabelCodec& codec);
/// Reads a label/prediction PNG using `codec` for the documented codes.
TraversabilityRaster read_label_png(const std::filesystem::path& path, const LabelCodec& codec);
/// Sidecar recording the code -> value table.
void write_label_codes(const std::filesystem::path& path, const LabelCodec& codec);
LabelCodec read_label_codes(const std::filesystem::path& path);

/// Vocabulary JSON: either {"<index>": "name", ...} or ["name0", "name1", ...].
std::map<int, std::string> load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const std::filesystem::path& path, const std::map<int, std::string>& vocabulary);
SemanticMap load_semantic_map(const std::filesystem::path& png, const std::filesystem::path& vocabulary);

}  // namespace travkit
