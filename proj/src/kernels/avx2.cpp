#include <immintrin.h>

#include <bit>
#include <cmath>

#include "travkit/kernels.hpp"

namespace travkit::kernels {
namespace {

void rgb_to_luma_avx2(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t n) {
  const __m256i offsets = _mm256_setr_epi32(0, 3, 6, 9, 12, 15, 18, 21);
  const __m256i byte = _mm256_set1_epi32(0xFF);
  const __m256i cr = _mm256_set1_epi32(19595), cg = _mm256_set1_epi32(38470),
                cb = _mm256_set1_epi32(7471), half = _mm256_set1_epi32(32768);
  std::size_t i = 0;
  // Each gather reads 4 bytes per pixel, so keep one pixel of slack at the end.
  for (; i + 9 <= n; i += 8) {
    const __m256i w = _mm256_i32gather_epi32(reinterpret_cast<const int*>(rgb + 3 * i), offsets, 1);
    const __m256i r = _mm256_and_si256(w, byte);
    const __m256i g = _mm256_and_si256(_mm256_srli_epi32(w, 8), byte);
    const __m256i b = _mm256_and_si256(_mm256_srli_epi32(w, 16), byte);
    __m256i y = _mm256_add_epi32(_mm256_mullo_epi32(r, cr), _mm256_mullo_epi32(g, cg));
    y = _mm256_add_epi32(y, _mm256_mullo_epi32(b, cb));
    y = _mm256_srli_epi32(_mm256_add_epi32(y, half), 16);
    const __m128i lo = _mm256_castsi256_si128(y), hi = _mm256_extracti128_si256(y, 1);
    const __m128i w16 = _mm_packus_epi32(lo, hi);
    const __m128i w8 = _mm_packus_epi16(w16, w16);
    _mm_storel_epi64(reinterpret_cast<__m128i*>(gray + i), w8);
  }
  for (; i < n; ++i) {
    const std::uint32_t r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    gray[i] = static_cast<std::uint8_t>((19595u * r + 38470u * g + 7471u * b + 32768u) >> 16);
  }
}

std::size_t count_nonzero_avx2(const std::uint8_t* data, std::size_t n) {
  const __m256i zero = _mm256_setzero_si256();
  std::size_t zeros = 0, i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    const auto m = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
    zeros += static_cast<std::size_t>(std::popcount(m));
  }
  std::size_t count = i - zeros;
  for (; i < n; ++i) count += data[i] != 0;
  return count;
}

ConfusionCounts confusion_avx2(const float* pred, const float* gt, std::size_t n, float threshold) {
  ConfusionCounts c;
  const __m256 thr = _mm256_set1_ps(threshold), half = _mm256_set1_ps(0.5f);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 p = _mm256_loadu_ps(pred + i), g = _mm256_loadu_ps(gt + i);
    const __m256 pb = _mm256_cmp_ps(p, thr, _CMP_GE_OQ), gb = _mm256_cmp_ps(g, half, _CMP_GE_OQ);
    const auto pm = static_cast<unsigned>(_mm256_movemask_ps(pb));
    const auto gm = static_cast<unsigned>(_mm256_movemask_ps(gb));
    c.tp += static_cast<std::uint64_t>(std::popcount(pm & gm));
    c.fp += static_cast<std::uint64_t>(std::popcount(pm & ~gm & 0xFFu));
    c.fn += static_cast<std::uint64_t>(std::popcount(~pm & gm & 0xFFu));
    c.tn += static_cast<std::uint64_t>(std::popcount(~(pm | gm) & 0xFFu));
    const __m256d d0 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(p)),
                                     _mm256_cvtps_pd(_mm256_castps256_ps128(g)));
    const __m256d d1 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(p, 1)),
                                     _mm256_cvtps_pd(_mm256_extractf128_ps(g, 1)));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  c.sse = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
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

double loss_sum_avx2(const double* pred, const double* label, std::size_t n, double zero_weight,
                     double* grad) {
  const __m256d zero = _mm256_setzero_pd(), w = _mm256_set1_pd(zero_weight),
                neg_w = _mm256_set1_pd(-zero_weight), two = _mm256_set1_pd(2.0),
                sign_bit = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(pred + i), l = _mm256_loadu_pd(label + i);
    const __m256d d = _mm256_sub_pd(p, l);
    const __m256d positive = _mm256_cmp_pd(l, zero, _CMP_GT_OQ);
    const __m256d sq = _mm256_mul_pd(d, d);
    const __m256d ab = _mm256_mul_pd(w, _mm256_andnot_pd(sign_bit, d));
    acc = _mm256_add_pd(acc, _mm256_blendv_pd(ab, sq, positive));
    if (grad) {
      const __m256d g_sq = _mm256_mul_pd(two, d);
      const __m256d g_ab = _mm256_or_pd(_mm256_and_pd(_mm256_cmp_pd(d, zero, _CMP_GT_OQ), w),
                                        _mm256_and_pd(_mm256_cmp_pd(d, zero, _CMP_LT_OQ), neg_w));
      _mm256_storeu_pd(grad + i, _mm256_blendv_pd(g_ab, g_sq, positive));
    }
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
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

inline __m256i load8_epu8(const std::uint8_t* p) {
  return _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(p)));
}

void compose_label_avx2(const std::uint8_t* mask, const std::uint8_t* flags, std::size_t n,
                        const ComposeParams& params, float* out) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i add_bit = _mm256_set1_epi32(kFlagAdd), rem_bit = _mm256_set1_epi32(kFlagRemove),
                road_bit = _mm256_set1_epi32(kFlagRoadLike);
  const __m256 full = _mm256_set1_ps(params.full_value), reduced = _mm256_set1_ps(params.reduced_value);
  const __m256 zf = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i m = load8_epu8(mask + i), f = load8_epu8(flags + i);
    const __m256i in_mask = _mm256_xor_si256(_mm256_cmpeq_epi32(m, zero), _mm256_set1_epi32(-1));
    const __m256i is_add = _mm256_cmpeq_epi32(_mm256_and_si256(f, add_bit), add_bit);
    __m256 v;
    if (params.sufficient) {
      const __m256i is_rem = _mm256_cmpeq_epi32(_mm256_and_si256(f, rem_bit), rem_bit);
      const __m256i keep = _mm256_andnot_si256(is_rem, _mm256_or_si256(in_mask, is_add));
      v = _mm256_blendv_ps(zf, full, _mm256_castsi256_ps(keep));
    } else {
      const __m256i is_road = _mm256_cmpeq_epi32(_mm256_and_si256(f, road_bit), road_bit);
      const __m256 mask_value = _mm256_blendv_ps(full, reduced, _mm256_castsi256_ps(is_road));
      v = _mm256_blendv_ps(zf, mask_value, _mm256_castsi256_ps(in_mask));
      v = _mm256_blendv_ps(v, full, _mm256_castsi256_ps(is_add));
    }
    _mm256_storeu_ps(out + i, v);
  }
  if (i < n) scalar_table().compose_label(mask + i, flags + i, n - i, params, out + i);
}

void remaining_region_avx2(const std::uint8_t* mask, const std::uint8_t* flags, std::size_t n,
                           std::uint8_t* out) {
  const __m256i zero = _mm256_setzero_si256(), one = _mm256_set1_epi8(1),
                add_bit = _mm256_set1_epi8(static_cast<char>(kFlagAdd)),
                rem_bit = _mm256_set1_epi8(static_cast<char>(kFlagRemove));
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mask + i));
    const __m256i f = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(flags + i));
    const __m256i empty = _mm256_cmpeq_epi8(m, zero);
    const __m256i no_add = _mm256_cmpeq_epi8(_mm256_and_si256(f, add_bit), zero);
    const __m256i no_rem = _mm256_cmpeq_epi8(_mm256_and_si256(f, rem_bit), zero);
    // keep = !(empty & no_add) & no_rem
    const __m256i keep = _mm256_andnot_si256(_mm256_and_si256(empty, no_add), no_rem);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), _mm256_and_si256(keep, one));
  }
  if (i < n) scalar_table().remaining_region(mask + i, flags + i, n - i, out + i);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::kAvx2,      rgb_to_luma_avx2, count_nonzero_avx2,
                                 confusion_avx2,  loss_sum_avx2,    compose_label_avx2,
                                 remaining_region_avx2};
  return &table;
}

}  // namespace travkit::kernels
