#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scopeflow/error.hpp"

namespace scopeflow {

// All rasters are row-major with a top-left origin and y increasing downward.

/// Interleaved multi-channel raster.
template <class T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0 || channels <= 0)
      throw Error(ErrorCode::BadDims, "raster dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }
  T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

/// Frame intensities in [0, 1]; one or three channels.
using ImageRaster = Raster<float>;

/// N-channel feature map (correlation inputs).
using FeatureMap = Raster<double>;

inline void validate_image(const ImageRaster& image) {
  if (image.channels() != 1 && image.channels() != 3)
    throw Error(ErrorCode::BadChannelCount, "image must have 1 or 3 channels");
  for (float v : image.data())
    if (!std::isfinite(v)) throw Error(ErrorCode::OutOfRange, "image intensity is not finite");
}

/// Dense displacement field with a per-pixel validity mask.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> u;
  std::vector<float> v;
  std::vector<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int w, int h, float u0 = 0.0f, float v0 = 0.0f) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw Error(ErrorCode::BadDims, "flow dimensions must be positive");
    const auto n = static_cast<std::size_t>(w) * h;
    u.assign(n, u0);
    v.assign(n, v0);
    valid.assign(n, 1);
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }

  bool well_formed() const noexcept {
    return width > 0 && height > 0 && u.size() == size() && v.size() == size() &&
           valid.size() == size();
  }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

struct OcclusionMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> occluded;

  OcclusionMap() = default;
  OcclusionMap(int w, int h, bool fill = false) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw Error(ErrorCode::BadDims, "occlusion dimensions must be positive");
    occluded.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(width) * height; }
  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }

  friend bool operator==(const OcclusionMap&, const OcclusionMap&) = default;
};

/// Crop window: extents plus 0-based top-left placement.
struct CropSpec {
  int h = 0;
  int w = 0;
  int x0 = 0;
  int y0 = 0;

  bool fits(int H, int W) const noexcept {
    return h >= 1 && w >= 1 && x0 >= 0 && y0 >= 0 && x0 + w <= W && y0 + h <= H;
  }

  friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

}  // namespace scopeflow
