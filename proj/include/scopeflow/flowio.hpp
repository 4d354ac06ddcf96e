#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "scopeflow/error.hpp"
#include "scopeflow/raster.hpp"

namespace scopeflow {

using Bytes = std::vector<std::uint8_t>;

/// Magic number opening every Middlebury .flo file.
inline constexpr float kFloMagic = 202021.25f;
/// Components with larger magnitude mark unknown flow.
inline constexpr float kFloUnknownThreshold = 1e9f;
/// Value written for invalid pixels.
inline constexpr float kFloUnknownValue = 1e10f;

/// Decoded PNG samples, channel-interleaved.  8-bit images keep their values
/// in the low byte.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  friend bool operator==(const PngImage&, const PngImage&) = default;
};

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

inline std::uint32_t load_le32(const std::uint8_t* p) noexcept {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_le32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline float load_lef(const std::uint8_t* p) noexcept { return std::bit_cast<float>(load_le32(p)); }
inline void store_lef(Bytes& out, float f) { store_le32(out, std::bit_cast<std::uint32_t>(f)); }

inline bool unknown_component(float c) noexcept { return std::fabs(c) > kFloUnknownThreshold; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Middlebury .flo

/// Parses a .flo byte buffer.  Component values of unknown pixels are kept
/// verbatim so that writing the field back reproduces the input bytes.
inline FlowField read_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(ErrorCode::Truncated, ".flo header is incomplete");
  if (std::bit_cast<std::uint32_t>(detail::load_lef(bytes.data())) !=
      std::bit_cast<std::uint32_t>(kFloMagic))
    throw Error(ErrorCode::BadMagic, ".flo sentinel is not 202021.25");
  if (bytes.size() < 12) throw Error(ErrorCode::Truncated, ".flo header is incomplete");

  const auto width = static_cast<std::int32_t>(detail::load_le32(bytes.data() + 4));
  const auto height = static_cast<std::int32_t>(detail::load_le32(bytes.data() + 8));
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::BadDims, "non-positive .flo dimensions " + std::to_string(width) +
                                        "x" + std::to_string(height));

  const std::uint64_t pixels = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  if ((bytes.size() - 12) / 8 < pixels)
    throw Error(ErrorCode::Truncated, ".flo payload shorter than its header promises");

  FlowField flow(width, height);
  const std::uint8_t* p = bytes.data() + 12;
  for (std::size_t i = 0; i < flow.size(); ++i, p += 8) {
    flow.u[i] = detail::load_lef(p);
    flow.v[i] = detail::load_lef(p + 4);
    flow.valid[i] = !(detail::unknown_component(flow.u[i]) || detail::unknown_component(flow.v[i]));
  }
  return flow;
}

/// Serializes to .flo.  An invalid pixel whose components are both inside the
/// finite range is written as (+-1e10, +-1e10), signs following the stored
/// components; an invalid pixel that already carries a sentinel is written
/// verbatim.
inline Bytes write_flo(const FlowField& flow) {
  if (!flow.well_formed()) throw Error(ErrorCode::BadDims, "malformed flow field");
  Bytes out;
  out.reserve(12 + flow.size() * 8);
  detail::store_lef(out, kFloMagic);
  detail::store_le32(out, static_cast<std::uint32_t>(flow.width));
  detail::store_le32(out, static_cast<std::uint32_t>(flow.height));
  for (std::size_t i = 0; i < flow.size(); ++i) {
    float u = flow.u[i];
    float v = flow.v[i];
    if (!flow.valid[i] && !detail::unknown_component(u) && !detail::unknown_component(v)) {
      u = std::copysign(kFloUnknownValue, u);
      v = std::copysign(kFloUnknownValue, v);
    }
    detail::store_lef(out, u);
    detail::store_lef(out, v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// KITTI 16-bit flow PNG: u = (R - 2^15) / 64, v = (G - 2^15) / 64, valid = B != 0

inline constexpr double kKittiScale = 64.0;
inline constexpr int kKittiBias = 1 << 15;
/// Largest encodable magnitude: (2^16 - 1 - 2^15) / 64.
inline constexpr double kKittiMaxMagnitude = 32767.0 / 64.0;

inline FlowField read_kitti_png(const PngImage& png) {
  if (png.bit_depth != 16) throw Error(ErrorCode::BadBitDepth, "KITTI flow PNG must be 16-bit");
  if (png.channels != 3) throw Error(ErrorCode::BadChannelCount, "KITTI flow PNG must have 3 channels");
  if (png.samples.size() != static_cast<std::size_t>(png.width) * png.height * 3)
    throw Error(ErrorCode::BadDims, "sample count does not match dimensions");
  FlowField flow(png.width, png.height);
  for (int y = 0; y < png.height; ++y) {
    for (int x = 0; x < png.width; ++x) {
      const auto i = flow.index(x, y);
      const bool ok = png.samples[png.index(x, y, 2)] != 0;
      flow.valid[i] = ok;
      flow.u[i] = ok ? static_cast<float>((png.samples[png.index(x, y, 0)] - kKittiBias) / kKittiScale) : 0.0f;
      flow.v[i] = ok ? static_cast<float>((png.samples[png.index(x, y, 1)] - kKittiBias) / kKittiScale) : 0.0f;
    }
  }
  return flow;
}

inline PngImage write_kitti_png(const FlowField& flow) {
  if (!flow.well_formed()) throw Error(ErrorCode::BadDims, "malformed flow field");
  PngImage png{flow.width, flow.height, 3, 16, {}};
  png.samples.resize(flow.size() * 3);
  const auto encode = [](float c) -> std::uint16_t {
    if (!(std::fabs(c) <= kKittiMaxMagnitude))
      throw Error(ErrorCode::OutOfRange,
                  "flow component " + std::to_string(c) + " outside KITTI encodable range");
    return static_cast<std::uint16_t>(std::lround(c * kKittiScale) + kKittiBias);
  };
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (flow.valid[i]) {
      png.samples[3 * i] = encode(flow.u[i]);
      png.samples[3 * i + 1] = encode(flow.v[i]);
      png.samples[3 * i + 2] = 1;
    } else {
      png.samples[3 * i] = kKittiBias;
      png.samples[3 * i + 1] = kKittiBias;
      png.samples[3 * i + 2] = 0;
    }
  }
  return png;
}

// ---------------------------------------------------------------------------
// Occlusion masks

inline constexpr int kOcclusionThreshold = 127;

inline OcclusionMap read_occlusion_png(const PngImage& png, int threshold = kOcclusionThreshold) {
  if (png.channels != 1) throw Error(ErrorCode::BadChannelCount, "occlusion PNG must be single channel");
  if (png.bit_depth != 8) throw Error(ErrorCode::BadBitDepth, "occlusion PNG must be 8-bit");
  if (png.samples.size() != static_cast<std::size_t>(png.width) * png.height)
    throw Error(ErrorCode::BadDims, "sample count does not match dimensions");
  OcclusionMap occ(png.width, png.height);
  for (std::size_t i = 0; i < occ.size(); ++i) occ.occluded[i] = png.samples[i] > threshold;
  return occ;
}

inline PngImage write_occlusion_png(const OcclusionMap& occ) {
  PngImage png{occ.width, occ.height, 1, 8, {}};
  png.samples.resize(occ.size());
  for (std::size_t i = 0; i < occ.size(); ++i) png.samples[i] = occ.occluded[i] ? 255 : 0;
  return png;
}

// ---------------------------------------------------------------------------
// Frames

/// Converts decoded samples to [0, 1] intensities.  Alpha is dropped.
inline ImageRaster image_from_png(const PngImage& png) {
  if (png.bit_depth != 8 && png.bit_depth != 16)
    throw Error(ErrorCode::BadBitDepth, "frames must be 8- or 16-bit");
  int keep = 0;
  switch (png.channels) {
    case 1: case 2: keep = 1; break;
    case 3: case 4: keep = 3; break;
    default: throw Error(ErrorCode::BadChannelCount, "unsupported channel count");
  }
  const float scale = png.bit_depth == 8 ? 255.0f : 65535.0f;
  ImageRaster image(png.width, png.height, keep);
  for (int y = 0; y < png.height; ++y)
    for (int x = 0; x < png.width; ++x)
      for (int c = 0; c < keep; ++c)
        image.at(x, y, c) = static_cast<float>(png.samples[png.index(x, y, c)]) / scale;
  return image;
}

inline PngImage png_from_image(const ImageRaster& image, int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorCode::BadBitDepth, "bit depth must be 8 or 16");
  const double scale = bit_depth == 8 ? 255.0 : 65535.0;
  PngImage png{image.width(), image.height(), image.channels(), bit_depth, {}};
  png.samples.resize(image.data().size());
  auto src = image.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double v = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
    png.samples[i] = static_cast<std::uint16_t>(std::lround(v * scale));
  }
  return png;
}

// ---------------------------------------------------------------------------
// Files

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

inline FlowField read_flo_file(const std::string& path) { return read_flo(read_file(path)); }
inline void write_flo_file(const std::string& path, const FlowField& flow) { write_file(path, write_flo(flow)); }

/// Binary PGM (P5).  16-bit samples are big-endian as the format requires.
inline Bytes encode_pgm(int width, int height, int maxval, std::span<const std::uint16_t> samples) {
  if (maxval < 1 || maxval > 65535) throw Error(ErrorCode::OutOfRange, "PGM maxval must be in [1, 65535]");
  if (samples.size() != static_cast<std::size_t>(width) * height)
    throw Error(ErrorCode::DimMismatch, "PGM sample count does not match dimensions");
  const std::string header =
      "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" + std::to_string(maxval) + "\n";
  Bytes out(header.begin(), header.end());
  for (auto s : samples) {
    if (maxval > 255) out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s));
  }
  return out;
}

}  // namespace scopeflow
