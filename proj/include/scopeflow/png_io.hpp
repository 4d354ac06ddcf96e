#pragma once

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "scopeflow/error.hpp"
#include "scopeflow/flowio.hpp"

namespace scopeflow {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline bool host_is_little_endian() noexcept { return std::endian::native == std::endian::little; }

}  // namespace detail

/// Reads an 8- or 16-bit PNG preserving sample values.  Palette images are
/// expanded to RGB and sub-byte grayscale to 8 bits; transparency chunks are
/// ignored.
inline PngImage read_png_file(const std::string& path) {
  detail::FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path);

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
    throw Error(ErrorCode::Io, path + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }

  PngImage image;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Io, "corrupt PNG data in " + path);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16 && detail::host_is_little_endian()) png_set_swap(png);
  png_read_update_info(png, info);

  image.width = static_cast<int>(png_get_image_width(png, info));
  image.height = static_cast<int>(png_get_image_height(png, info));
  image.channels = png_get_channels(png, info);
  image.bit_depth = png_get_bit_depth(png, info);

  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * image.height);
  rows.resize(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(image.width) * image.height * image.channels;
  image.samples.resize(n);
  if (image.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t s;
      std::memcpy(&s, buffer.data() + 2 * i, 2);
      image.samples[i] = s;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) image.samples[i] = buffer[i];
  }
  return image;
}

inline void write_png_file(const std::string& path, const PngImage& image) {
  if (image.bit_depth != 8 && image.bit_depth != 16)
    throw Error(ErrorCode::BadBitDepth, "PNG output must be 8- or 16-bit");
  int color_type = 0;
  switch (image.channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
    default: throw Error(ErrorCode::BadChannelCount, "PNG output must have 1-4 channels");
  }

  const int bytes_per_sample = image.bit_depth / 8;
  const std::size_t stride = static_cast<std::size_t>(image.width) * image.channels * bytes_per_sample;
  std::vector<png_byte> buffer(stride * image.height);
  for (std::size_t i = 0; i < image.samples.size(); ++i) {
    if (bytes_per_sample == 2) {
      const std::uint16_t s = image.samples[i];
      std::memcpy(buffer.data() + 2 * i, &s, 2);
    } else {
      buffer[i] = static_cast<png_byte>(image.samples[i]);
    }
  }
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = buffer.data() + y * stride;

  detail::FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error(ErrorCode::Io, "cannot create " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "PNG encoding failed for " + path);
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
               image.bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (image.bit_depth == 16 && detail::host_is_little_endian()) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline FlowField read_kitti_png_file(const std::string& path) { return read_kitti_png(read_png_file(path)); }
inline void write_kitti_png_file(const std::string& path, const FlowField& flow) {
  write_png_file(path, write_kitti_png(flow));
}

/// Reads a flow file by extension: .flo (Middlebury) or .png (KITTI).
inline FlowField read_flow_file(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".flo") return read_flo_file(path);
  if (ext == ".png") return read_kitti_png_file(path);
  throw Error(ErrorCode::Io, "unrecognized flow file extension: " + path);
}

inline void write_flow_file(const std::string& path, const FlowField& flow) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".flo") return write_flo_file(path, flow);
  if (ext == ".png") return write_kitti_png_file(path, flow);
  throw Error(ErrorCode::Io, "unrecognized flow file extension: " + path);
}

}  // namespace scopeflow
