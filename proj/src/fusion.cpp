#include "travkit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "travkit/errors.hpp"
#include "travkit/image_io.hpp"
#include "travkit/kernels.hpp"

namespace travkit {

void SemanticMap::validate() const {
  std::array<bool, 256> seen{};
  for (auto c : classes.pixels()) seen[c] = true;
  for (int c = 0; c < 256; ++c) {
    if (seen[c] && !vocabulary.contains(c)) {
      throw InvalidParameter("semantic map uses class index " + std::to_string(c) +
                             " missing from its vocabulary");
    }
  }
}

void ClassPolicy::validate() const {
  if (!(reduced_value > 0.0f && reduced_value < full_value && full_value <= 1.0f)) {
    throw InvalidParameter("class policy needs 0 < reduced_value < full_value <= 1");
  }
  if (!(inclusion_threshold > 0.0 && inclusion_threshold <= 1.0)) {
    throw InvalidParameter("inclusion_threshold must lie in (0, 1]");
  }
}

std::string ClassPolicy::canonical(const std::string& name) const {
  auto it = aliases.find(name);
  return it == aliases.end() ? name : it->second;
}

ClassPolicy urban_policy() {
  ClassPolicy p;
  p.add_classes = {"crosswalk", "lane-marking-crosswalk"};
  p.remove_classes = {"road"};
  p.road_like_classes = {"road"};
  return p;
}

ClassPolicy rellis_policy() {
  ClassPolicy p;
  p.remove_classes = {"vegetation"};
  return p;
}

ClassPolicy empty_policy() { return ClassPolicy{}; }

std::array<std::uint8_t, 256> class_flag_table(const SemanticMap& semantic, const ClassPolicy& policy) {
  std::array<std::uint8_t, 256> lut{};
  for (const auto& [index, raw_name] : semantic.vocabulary) {
    if (index < 0 || index > 255) continue;
    const std::string name = policy.canonical(raw_name);
    std::uint8_t f = 0;
    if (policy.add_classes.contains(name)) f |= kernels::kFlagAdd;
    if (policy.remove_classes.contains(name)) f |= kernels::kFlagRemove;
    if (policy.road_like_classes.contains(name)) f |= kernels::kFlagRoadLike;
    lut[static_cast<std::size_t>(index)] = f;
  }
  return lut;
}

RefinedLabel refine_label_detailed(const BinaryMask& mask, const SemanticMap& semantic,
                                   const PixelPoints& footsteps, const ClassPolicy& policy) {
  require_same_shape("refine_label mask vs semantic map", mask, semantic.classes);
  if (footsteps.points.empty()) throw EmptyInput("refine_label needs at least one footstep");
  policy.validate();

  const auto lut = class_flag_table(semantic, policy);
  const std::size_t n = mask.size();
  std::vector<std::uint8_t> flags(n);
  const std::uint8_t* cls = semantic.classes.data();
  for (std::size_t i = 0; i < n; ++i) flags[i] = lut[cls[i]];

  const auto& k = kernels::active();
  BinaryMask remaining(mask.width(), mask.height());
  k.remaining_region(mask.data(), flags.data(), n, remaining.data());

  std::size_t inside = 0;
  for (const auto& p : footsteps.points) {
    const int u = static_cast<int>(std::floor(p.x()));
    const int v = static_cast<int>(std::floor(p.y()));
    if (remaining.contains(u, v) && remaining.at(u, v) != 0) ++inside;
  }
  RefinedLabel out;
  out.inclusion_fraction = static_cast<double>(inside) / static_cast<double>(footsteps.points.size());
  out.sufficient = out.inclusion_fraction >= policy.inclusion_threshold;
  out.label = TraversabilityRaster(mask.width(), mask.height());
  const kernels::ComposeParams params{out.sufficient, policy.reduced_value, policy.full_value};
  k.compose_label(mask.data(), flags.data(), n, params, out.label.data());
  return out;
}

TraversabilityRaster refine_label(const BinaryMask& mask, const SemanticMap& semantic,
                                  const PixelPoints& footsteps, const ClassPolicy& policy) {
  return refine_label_detailed(mask, semantic, footsteps, policy).label;
}

TraversabilityRaster heuristic_value_map(const SemanticMap& semantic,
                                         const std::map<std::string, double>& value_table) {
  std::array<float, 256> lut{};
  for (const auto& [index, name] : semantic.vocabulary) {
    auto it = value_table.find(name);
    if (it == value_table.end() || index < 0 || index > 255) continue;
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw InvalidParameter("heuristic value for '" + name + "' outside [0, 1]");
    }
    lut[static_cast<std::size_t>(index)] = static_cast<float>(it->second);
  }
  TraversabilityRaster out(semantic.classes.width(), semantic.classes.height());
  const auto src = semantic.classes.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = lut[src[i]];
  return out;
}

std::map<std::string, double> heuristic_table(const std::string& name) {
  if (name == "urban-segformer") {
    return {{"Sidewalk", 1.0}, {"Path", 1.0},      {"Floor", 1.0}, {"Grass", 0.5},
            {"Sand", 0.5},     {"Hill", 0.5},      {"Dirt track", 0.5}, {"Land", 0.5},
            {"Earth", 0.5},    {"Field", 0.5},     {"Road", 0.25}};
  }
  if (name == "urban-mask2former") {
    return {{"Pedestrian Area", 1.0}, {"Sidewalk", 1.0}, {"Lane Marking - Crosswalk", 1.0},
            {"Sand", 0.5},            {"Snow", 0.5},     {"Terrain", 0.5},
            {"Road", 0.25},           {"Lane Marking - General", 0.25}};
  }
  if (name == "rellis-segformer") {
    return {{"Path", 1.0},  {"Grass", 1.0}, {"Sand", 1.0},  {"Dirt track", 1.0},
            {"Land", 1.0},  {"Field", 1.0}, {"Hill", 0.5},  {"Earth", 0.5}};
  }
  if (name == "rellis-mask2former") return {{"Terrain", 1.0}};
  throw InvalidParameter("unknown heuristic table '" + name + "'");
}

std::uint8_t LabelCodec::encode(float value) const {
  if (value == 0.0f) return kCodeZero;
  if (value == reduced_value) return kCodeReduced;
  if (value == full_value) return kCodeFull;
  const float clamped = std::clamp(value, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

float LabelCodec::decode(std::uint8_t code) const {
  switch (code) {
    case kCodeZero:
      return 0.0f;
    case kCodeReduced:
      return reduced_value;
    case kCodeFull:
      return full_value;
    default:
      return static_cast<float>(code) / 255.0f;
  }
}

Raster<std::uint8_t> encode_label(const TraversabilityRaster& label, const LabelCodec& codec) {
  Raster<std::uint8_t> out(label.width(), label.height());
  for (std::size_t i = 0; i < label.size(); ++i) out.data()[i] = codec.encode(label.data()[i]);
  return out;
}

TraversabilityRaster decode_label(const Raster<std::uint8_t>& codes, const LabelCodec& codec) {
  std::array<float, 256> lut;
  for (int c = 0; c < 256; ++c) lut[c] = codec.decode(static_cast<std::uint8_t>(c));
  TraversabilityRaster out(codes.width(), codes.height());
  for (std::size_t i = 0; i < codes.size(); ++i) out.data()[i] = lut[codes.data()[i]];
  return out;
}

void write_label_png(const std::filesystem::path& path, const TraversabilityRaster& label,
                     const LabelCodec& codec) {
  write_png_gray8(path, encode_label(label, codec));
}

TraversabilityRaster read_label_png(const std::filesystem::path& path, const LabelCodec& codec) {
  return decode_label(read_png_gray8(path), codec);
}

void write_label_codes(const std::filesystem::path& path, const LabelCodec& codec) {
  nlohmann::ordered_json j;
  j["codes"] = nlohmann::ordered_json::object();
  j["codes"]["0"] = 0.0;
  j["codes"][std::to_string(kCodeReduced)] = codec.reduced_value;
  j["codes"][std::to_string(kCodeFull)] = codec.full_value;
  j["other"] = "code / 255";
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

LabelCodec read_label_codes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    LabelCodec codec;
    codec.reduced_value = j.at("codes").at(std::to_string(kCodeReduced)).get<float>();
    codec.full_value = j.at("codes").at(std::to_string(kCodeFull)).get<float>();
    return codec;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed label code table " + path.string() + ": " + e.what());
  }
}

std::map<int, std::string> load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary " + path.string());
  std::map<int, std::string> vocab;
  try {
    nlohmann::json j;
    in >> j;
    if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) vocab[static_cast<int>(i)] = j[i].get<std::string>();
    } else if (j.is_object()) {
      for (const auto& [key, value] : j.items()) vocab[std::stoi(key)] = value.get<std::string>();
    } else {
      throw InputError("vocabulary must be a JSON object or array: " + path.string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed vocabulary " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw InputError("vocabulary keys must be integers: " + path.string());
  }
  for (const auto& [index, name] : vocab) {
    if (index < 0 || index > 255) throw InputError("vocabulary index out of 8-bit range in " + path.string());
  }
  return vocab;
}

void save_vocabulary(const std::filesystem::path& path, const std::map<int, std::string>& vocabulary) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [index, name] : vocabulary) j[std::to_string(index)] = name;
  std::ofstream out(path);
  if (!out) throw InputError("cannot write vocabulary " + path.string());
  out << j.dump(2) << '\n';
}

SemanticMap load_semantic_map(const std::filesystem::path& png, const std::filesystem::path& vocabulary) {
  SemanticMap s{read_png_gray8(png), load_vocabulary(vocabulary)};
  s.validate();
  return s;
}

}  // namespace travkit
