#include <cmath>

#include "travkit/kernels.hpp"

namespace travkit::kernels {
namespace {

void rgb_to_luma_scalar(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    gray[i] = static_cast<std::uint8_t>((19595u * r + 38470u * g + 7471u * b + 32768u) >> 16);
  }
}

std::size_t count_nonzero_scalar(const std::uint8_t* data, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += data[i] != 0;
  return c;
}

ConfusionCounts confusion_scalar(const float* pred, const float* gt, std::size_t n, float threshold) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = pred[i] >= threshold;
    const bool g = gt[i] >= 0.5f;
    c.tp += p && g;
    c.fp += p && !g;
    c.fn += !p && g;
    c.tn += !p && !g;
    const double d = static_cast<double>(pred[i]) - static_cast<double>(gt[i]);
    c.sse += d * d;
  }
  return c;
}

double loss_sum_scalar(const double* pred, const double* label, std::size_t n, double zero_weight,
                       double* grad) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - label[i];
    if (label[i] > 0.0) {
      sum += d * d;
      if (grad) grad[i] = 2.0 * d;
    } else {
      sum += zero_weight * std::abs(d);
      if (grad) grad[i] = d > 0.0 ? zero_weight : (d < 0.0 ? -zero_weight : 0.0);
    }
  }
  return sum;
}

void compose_label_scalar(const std::uint8_t* mask, const std::uint8_t* flags, std::size_t n,
                          const ComposeParams& params, float* out) {
  if (params.sufficient) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool keep = (mask[i] != 0 || (flags[i] & kFlagAdd)) && !(flags[i] & kFlagRemove);
      out[i] = keep ? params.full_value : 0.0f;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    float v = 0.0f;
    if (flags[i] & kFlagAdd) {
      v = params.full_value;
    } else if (mask[i] != 0) {
      v = (flags[i] & kFlagRoadLike) ? params.reduced_value : params.full_value;
    }
    out[i] = v;
  }
}

void remaining_region_scalar(const std::uint8_t* mask, const std::uint8_t* flags, std::size_t n,
                             std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (mask[i] != 0 || (flags[i] & kFlagAdd)) && !(flags[i] & kFlagRemove) ? 1 : 0;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar,       rgb_to_luma_scalar,   count_nonzero_scalar,
                                 confusion_scalar,   loss_sum_scalar,      compose_label_scalar,
                                 remaining_region_scalar};
  return table;
}

}  // namespace travkit::kernels
