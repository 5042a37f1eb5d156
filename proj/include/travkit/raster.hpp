#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "travkit/errors.hpp"

namespace travkit {

/// Dense row-major single-channel image.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int u, int v) { return data_[static_cast<std::size_t>(v) * width_ + u]; }
  const T& at(int u, int v) const { return data_[static_cast<std::size_t>(v) * width_ + u]; }

  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  template <typename U>
  bool same_shape(const Raster<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  static std::size_t checked_size(int w, int h) {
    if (w < 0 || h < 0) throw InvalidParameter("raster dimensions must be non-negative");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// 0 = false, anything else = true (stored as 0/1).
using BinaryMask = Raster<std::uint8_t>;

/// Per-pixel traversability in [0,1].
using TraversabilityRaster = Raster<float>;

/// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height
};

template <typename T, typename U>
void require_same_shape(const char* what, const Raster<T>& a, const Raster<U>& b) {
  if (!a.same_shape(b)) throw_shape_mismatch(what, a.width(), a.height(), b.width(), b.height());
}

}  // namespace travkit
