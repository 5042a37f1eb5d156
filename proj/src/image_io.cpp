#include "travkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "travkit/errors.hpp"
#include "travkit/kernels.hpp"

namespace travkit {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw InputError(std::string("cannot open ") + path.string());
  return f;
}

// Decoded rows with 1 (gray) or 3 (rgb) channels at 8 or 16 bits.
struct Decoded {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<std::uint8_t> bytes;
};

Decoded decode(const std::filesystem::path& path, int want_channels, int want_depth) {
  auto file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw InputError(path.string() + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw InputError("libpng initialisation failed");
  }
  Decoded out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError("failed to decode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (want_depth == 8 && depth == 16) png_set_strip_16(png);
  if (want_depth == 16 && depth < 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InputError(path.string() + ": expected a 16-bit PNG");
  }
  if (want_depth == 16) png_set_swap(png);  // host little-endian uint16
  png_set_strip_alpha(png);
  const bool is_gray = !(color & PNG_COLOR_MASK_COLOR);
  if (want_channels == 3 && is_gray) png_set_gray_to_rgb(png);
  if (want_channels == 1 && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.bytes.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (out.channels != want_channels) {
    throw InputError(path.string() + ": unexpected channel layout");
  }
  return out;
}

void encode(const std::filesystem::path& path, int width, int height, int color_type, int bit_depth,
            const std::uint8_t* data, std::size_t stride, bool swap16) {
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw InputError("libpng initialisation failed");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("failed to encode " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  if (swap16) png_set_swap(png);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(data + stride * static_cast<std::size_t>(y));
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

BinaryMask read_png_gray8(const std::filesystem::path& path) {
  Decoded d = decode(path, 1, 8);
  BinaryMask img(d.width, d.height);
  std::copy(d.bytes.begin(), d.bytes.end(), img.data());
  return img;
}

Raster<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  Decoded d = decode(path, 1, 16);
  Raster<std::uint16_t> img(d.width, d.height);
  std::memcpy(img.data(), d.bytes.data(), d.bytes.size());
  return img;
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  Decoded d = decode(path, 3, 8);
  return RgbImage{d.width, d.height, std::move(d.bytes)};
}

void write_png_gray8(const std::filesystem::path& path, const Raster<std::uint8_t>& img) {
  encode(path, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, 8, img.data(),
         static_cast<std::size_t>(img.width()), false);
}

void write_png_gray16(const std::filesystem::path& path, const Raster<std::uint16_t>& img) {
  encode(path, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, 16,
         reinterpret_cast<const std::uint8_t*>(img.data()), static_cast<std::size_t>(img.width()) * 2,
         true);
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& img) {
  if (img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3) {
    throw ShapeError("RGB buffer size does not match image dimensions");
  }
  encode(path, img.width, img.height, PNG_COLOR_TYPE_RGB, 8, img.rgb.data(),
         static_cast<std::size_t>(img.width) * 3, false);
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
  BinaryMask m = read_png_gray8(path);
  for (auto& p : m.pixels()) p = p != 0 ? 1 : 0;
  return m;
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  Raster<std::uint8_t> out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out.data()[i] = mask.data()[i] ? 255 : 0;
  write_png_gray8(path, out);
}

Raster<std::uint8_t> to_gray(const RgbImage& img) {
  Raster<std::uint8_t> gray(img.width, img.height);
  kernels::active().rgb_to_luma(img.rgb.data(), gray.data(), gray.size());
  return gray;
}

}  // namespace travkit
