#include "travkit/maskproc.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "travkit/errors.hpp"
#include "travkit/kernels.hpp"

namespace travkit {

void MaskProposalSet::add(BinaryMask mask, double score) {
  ids.push_back(masks.size());
  masks.push_back(std::move(mask));
  scores.push_back(score);
}

void MaskProposalSet::validate() const {
  if (masks.size() != scores.size() || masks.size() != ids.size()) {
    throw InvalidParameter("mask proposal set has mismatched masks/scores/ids lengths");
  }
  for (std::size_t i = 1; i < masks.size(); ++i) require_same_shape("mask proposals", masks[0], masks[i]);
}

std::size_t mask_area(const BinaryMask& mask) {
  return kernels::active().count_nonzero(mask.data(), mask.size());
}

MaskProposalSet area_filter(const MaskProposalSet& proposals, double min_area_fraction) {
  if (!(min_area_fraction >= 0.0 && min_area_fraction <= 1.0)) {
    throw InvalidParameter("min_area_fraction must lie in [0, 1]");
  }
  proposals.validate();
  MaskProposalSet kept;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& m = proposals.masks[i];
    const double threshold = min_area_fraction * static_cast<double>(m.size());
    if (static_cast<double>(mask_area(m)) >= threshold) {
      kept.masks.push_back(m);
      kept.scores.push_back(proposals.scores[i]);
      kept.ids.push_back(proposals.ids[i]);
    }
  }
  return kept;
}

namespace {

std::size_t prompt_coverage(const BinaryMask& mask, const PixelPoints& prompts) {
  std::size_t n = 0;
  for (const auto& p : prompts.points) {
    const int u = static_cast<int>(std::floor(p.x()));
    const int v = static_cast<int>(std::floor(p.y()));
    if (mask.contains(u, v) && mask.at(u, v) != 0) ++n;
  }
  return n;
}

}  // namespace

std::size_t select_mask_index(const MaskProposalSet& proposals, const PixelPoints& prompts) {
  if (proposals.empty()) throw NoCandidate("no mask proposal survived filtering");
  proposals.validate();
  struct Key {
    std::size_t coverage;
    double score;
    std::size_t area;
  };
  std::vector<Key> keys;
  keys.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    keys.push_back({prompt_coverage(proposals.masks[i], prompts), proposals.scores[i],
                    mask_area(proposals.masks[i])});
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < proposals.size(); ++i) {
    const auto& a = keys[i];
    const auto& b = keys[best];
    const auto ta = std::tie(a.coverage, a.score, a.area);
    const auto tb = std::tie(b.coverage, b.score, b.area);
    if (ta > tb) {
      best = i;
    } else if (ta == tb) {
      const auto pa = proposals.masks[i].pixels();
      const auto pb = proposals.masks[best].pixels();
      if (std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end())) best = i;
    }
  }
  return best;
}

BinaryMask select_mask(const MaskProposalSet& proposals, const PixelPoints& prompts) {
  return proposals.masks[select_mask_index(proposals, prompts)];
}

ComponentLabels label_components(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  ComponentLabels out{Raster<std::int32_t>(w, h, 0), {}};
  std::vector<std::int32_t> stack;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (mask.at(u, v) == 0 || out.labels.at(u, v) != 0) continue;
      const auto label = static_cast<std::int32_t>(out.areas.size() + 1);
      std::size_t area = 0;
      out.labels.at(u, v) = label;
      stack.push_back(v * w + u);
      while (!stack.empty()) {
        const std::int32_t idx = stack.back();
        stack.pop_back();
        ++area;
        const int cu = idx % w, cv = idx / w;
        for (int dv = -1; dv <= 1; ++dv) {
          const int nv = cv + dv;
          if (nv < 0 || nv >= h) continue;
          for (int du = -1; du <= 1; ++du) {
            const int nu = cu + du;
            if (nu < 0 || nu >= w || (du == 0 && dv == 0)) continue;
            if (mask.at(nu, nv) != 0 && out.labels.at(nu, nv) == 0) {
              out.labels.at(nu, nv) = label;
              stack.push_back(nv * w + nu);
            }
          }
        }
      }
      out.areas.push_back(area);
    }
  }
  return out;
}

BinaryMask contour_filter(const BinaryMask& mask) {
  ComponentLabels cc = label_components(mask);
  if (cc.areas.empty()) throw EmptyMask("contour filter received an all-false mask");
  // Components are numbered in scan order, so the strict comparison keeps the
  // earliest one among equal areas.
  std::size_t best = 0;
  for (std::size_t k = 1; k < cc.areas.size(); ++k) {
    if (cc.areas[k] > cc.areas[best]) best = k;
  }
  const auto keep = static_cast<std::int32_t>(best + 1);
  BinaryMask out(mask.width(), mask.height(), 0);
  const auto labels = cc.labels.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < labels.size(); ++i) dst[i] = labels[i] == keep ? 1 : 0;
  return out;
}

}  // namespace travkit
