#pragma once

#include <cstdint>
#include <filesystem>

#include "travkit/raster.hpp"

namespace travkit {

// PNG codecs. Readers convert palette/alpha/bit-depth variants to the
// requested layout; writers emit no ancillary chunks so output bytes depend
// only on pixel data.
BinaryMask read_png_gray8(const std::filesystem::path& path);
Raster<std::uint16_t> read_png_gray16(const std::filesystem::path& path);
RgbImage read_png_rgb(const std::filesystem::path& path);

void write_png_gray8(const std::filesystem::path& path, const Raster<std::uint8_t>& img);
void write_png_gray16(const std::filesystem::path& path, const Raster<std::uint16_t>& img);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& img);

/// Mask PNG: 0 = false, non-zero = true. Returned mask stores 0/1.
BinaryMask read_mask_png(const std::filesystem::path& path);
/// Writes 0/255.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Gray-scale copy of an RGB image using the active luma kernel.
Raster<std::uint8_t> to_gray(const RgbImage& img);

}  // namespace travkit
