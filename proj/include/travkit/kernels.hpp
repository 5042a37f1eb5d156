#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Data-parallel raster kernels. Every kernel has a scalar reference and, on
// x86-64, an AVX2 variant; the dispatcher picks the best supported one at
// first use. Results must be bit-identical between variants except for the
// floating-point reductions (confusion SSE, loss), which may differ in
// summation order only.
namespace travkit::kernels {

enum class Isa { kScalar, kAvx2 };

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double sse = 0.0;  // sum of squared raw differences
};

/// Flag bits produced by the class lookup for label fusion.
enum ClassFlag : std::uint8_t {
  kFlagAdd = 1u << 0,
  kFlagRemove = 1u << 1,
  kFlagRoadLike = 1u << 2,
};

struct ComposeParams {
  bool sufficient = true;  // footsteps sufficiently inside the remaining region
  float reduced_value = 0.25f;
  float full_value = 1.0f;
};

struct KernelTable {
  Isa isa;
  // luma = (19595 R + 38470 G + 7471 B + 32768) >> 16, i.e. 0.299/0.587/0.114
  void (*rgb_to_luma)(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t n);
  std::size_t (*count_nonzero)(const std::uint8_t* data, std::size_t n);
  // Traversable iff pred >= threshold; gt traversable iff gt >= 0.5.
  ConfusionCounts (*confusion)(const float* pred, const float* gt, std::size_t n, float threshold);
  // Sum over pixels of (p-l)^2 where l > 0, w*|p-l| where l == 0. When grad
  // is non-null it receives the per-pixel derivative of that sum.
  double (*loss_sum)(const double* pred, const double* label, std::size_t n, double zero_weight,
                     double* grad);
  // Per-pixel label composition from a 0/1 mask and ClassFlag bytes.
  void (*compose_label)(const std::uint8_t* mask, const std::uint8_t* flags, std::size_t n,
                        const ComposeParams& params, float* out);
  // remaining = (mask | add) & !remove, written as 0/1.
  void (*remaining_region)(const std::uint8_t* mask, const std::uint8_t* flags, std::size_t n,
                           std::uint8_t* out);
};

const KernelTable& scalar_table();
/// nullptr when not compiled in.
const KernelTable* avx2_table();

bool isa_supported(Isa isa);
/// Table in use. Honors TRAVKIT_ISA=scalar|avx2 on first call.
const KernelTable& active();
/// Overrides the dispatcher (tests, benchmarks). Throws if unsupported.
void set_active(Isa isa);
std::string_view isa_name(Isa isa);

}  // namespace travkit::kernels
