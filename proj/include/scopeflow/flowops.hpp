#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scopeflow/error.hpp"
#include "scopeflow/raster.hpp"

namespace scopeflow {

/// Bilinear sample of all channels at a real-valued position.  Positions
/// outside [0, W-1] x [0, H-1] write zeros and return false.  Neighbours with
/// zero weight are never read, so integer positions reproduce the source
/// value exactly.
template <class T>
bool bilinear_sample(const Raster<T>& src, double px, double py, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (!(px >= 0.0 && py >= 0.0 && px <= src.width() - 1 && py <= src.height() - 1)) return false;
  const int x0 = static_cast<int>(std::floor(px));
  const int y0 = static_cast<int>(std::floor(py));
  const double fx = px - x0;
  const double fy = py - y0;
  const double wx[2] = {1.0 - fx, fx};
  const double wy[2] = {1.0 - fy, fy};
  for (int j = 0; j < 2; ++j) {
    if (wy[j] == 0.0) continue;
    for (int i = 0; i < 2; ++i) {
      if (wx[i] == 0.0) continue;
      const double weight = wy[j] * wx[i];
      for (int c = 0; c < src.channels(); ++c)
        out[c] += weight * static_cast<double>(src.at(x0 + i, y0 + j, c));
    }
  }
  return true;
}

template <class T>
struct WarpResult {
  Raster<T> warped;
  std::vector<std::uint8_t> out_of_bounds;  // 1 where x + f(x) left the source
};

/// out(x) = src(x + f(x)), bilinear; samples outside the source are zero and
/// flagged.
template <class T>
WarpResult<T> backward_warp(const Raster<T>& src, const FlowField& flow) {
  if (!flow.well_formed() || src.width() != flow.width || src.height() != flow.height)
    throw Error(ErrorCode::DimMismatch, "warp source and flow differ in size");
  WarpResult<T> result{Raster<T>(src.width(), src.height(), src.channels()),
                       std::vector<std::uint8_t>(flow.size(), 0)};
  std::vector<double> sample(src.channels());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const auto i = flow.index(x, y);
      const bool inside = bilinear_sample(src, x + static_cast<double>(flow.u[i]),
                                          y + static_cast<double>(flow.v[i]), sample);
      result.out_of_bounds[i] = !inside;
      for (int c = 0; c < src.channels(); ++c) result.warped.at(x, y, c) = static_cast<T>(sample[c]);
    }
  }
  return result;
}

/// Doubles resolution with bilinear interpolation (pixel-centre aligned,
/// edge-clamped) and doubles the displacement values so they are expressed
/// in fine-grid pixels.  A fine pixel is valid when every contributing coarse
/// pixel is.
inline FlowField upsample_flow_x2(const FlowField& coarse) {
  if (!coarse.well_formed()) throw Error(ErrorCode::BadDims, "malformed flow field");
  FlowField fine(coarse.width * 2, coarse.height * 2);
  for (int Y = 0; Y < fine.height; ++Y) {
    const double sy = std::clamp((Y + 0.5) / 2.0 - 0.5, 0.0, coarse.height - 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, coarse.height - 1);
    const double fy = sy - y0;
    for (int X = 0; X < fine.width; ++X) {
      const double sx = std::clamp((X + 0.5) / 2.0 - 0.5, 0.0, coarse.width - 1.0);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, coarse.width - 1);
      const double fx = sx - x0;
      const std::size_t idx[4] = {coarse.index(x0, y0), coarse.index(x1, y0), coarse.index(x0, y1),
                                  coarse.index(x1, y1)};
      const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      double u = 0, v = 0;
      bool ok = true;
      for (int k = 0; k < 4; ++k) {
        if (w[k] == 0.0) continue;
        u += w[k] * coarse.u[idx[k]];
        v += w[k] * coarse.v[idx[k]];
        ok = ok && coarse.valid[idx[k]];
      }
      const auto o = fine.index(X, Y);
      fine.u[o] = static_cast<float>(2.0 * u);
      fine.v[o] = static_cast<float>(2.0 * v);
      fine.valid[o] = ok;
    }
  }
  return fine;
}

// ---------------------------------------------------------------------------
// Correlation

struct CostVolume {
  int width = 0;
  int height = 0;
  int max_displacement = 0;
  std::vector<double> values;  // per pixel, (2d+1)^2 offsets, dy-major

  int window() const noexcept { return 2 * max_displacement + 1; }
  std::size_t offsets() const noexcept { return static_cast<std::size_t>(window()) * window(); }

  double at(int x, int y, int dx, int dy) const noexcept {
    const int d = max_displacement;
    return values[(static_cast<std::size_t>(y) * width + x) * offsets() +
                  static_cast<std::size_t>(dy + d) * window() + (dx + d)];
  }
};

/// cost(x, o) = (1/N) <c1(x), c2(x + o)> for every |o|_inf <= d; partners
/// outside the map contribute zero.
inline CostVolume cost_volume(const FeatureMap& c1, const FeatureMap& c2_warped, int max_displacement) {
  if (!c1.same_shape(c2_warped)) throw Error(ErrorCode::DimMismatch, "feature maps differ in shape");
  if (max_displacement < 0) throw Error(ErrorCode::OutOfRange, "max displacement must be non-negative");
  CostVolume cv{c1.width(), c1.height(), max_displacement, {}};
  cv.values.assign(c1.pixel_count() * cv.offsets(), 0.0);
  const int d = max_displacement;
  const int N = c1.channels();
  const double inv_n = 1.0 / N;
  for (int y = 0; y < c1.height(); ++y) {
    for (int x = 0; x < c1.width(); ++x) {
      const double* a = &c1.at(x, y);
      double* out = &cv.values[(static_cast<std::size_t>(y) * c1.width() + x) * cv.offsets()];
      for (int dy = -d; dy <= d; ++dy) {
        const int y2 = y + dy;
        if (y2 < 0 || y2 >= c1.height()) continue;
        for (int dx = -d; dx <= d; ++dx) {
          const int x2 = x + dx;
          if (x2 < 0 || x2 >= c1.width()) continue;
          const double* b = &c2_warped.at(x2, y2);
          double dot = 0.0;
          for (int n = 0; n < N; ++n) dot += a[n] * b[n];
          out[(dy + d) * cv.window() + (dx + d)] = dot * inv_n;
        }
      }
    }
  }
  return cv;
}

// ---------------------------------------------------------------------------
// Metrics

namespace detail {

inline void check_pair(int w1, int h1, int w2, int h2) {
  if (w1 != w2 || h1 != h2) throw Error(ErrorCode::DimMismatch, "inputs differ in size");
}

inline CropSpec full_window(int h, int w, const std::optional<CropSpec>& window) {
  CropSpec c = window.value_or(CropSpec{h, w, 0, 0});
  if (!c.fits(h, w)) throw Error(ErrorCode::OutOfBounds, "metric window exceeds input bounds");
  return c;
}

/// Calls fn(per-pixel endpoint error) for every gt-valid pixel in the window.
template <class Fn>
std::size_t for_each_endpoint_error(const FlowField& pred, const FlowField& gt,
                                    const std::optional<CropSpec>& window, Fn&& fn) {
  if (!pred.well_formed() || !gt.well_formed()) throw Error(ErrorCode::BadDims, "malformed flow field");
  check_pair(pred.width, pred.height, gt.width, gt.height);
  const CropSpec c = full_window(gt.height, gt.width, window);
  std::size_t count = 0;
  for (int y = c.y0; y < c.y0 + c.h; ++y) {
    for (int x = c.x0; x < c.x0 + c.w; ++x) {
      const auto i = gt.index(x, y);
      if (!gt.valid[i]) continue;
      const double du = static_cast<double>(pred.u[i]) - static_cast<double>(gt.u[i]);
      const double dv = static_cast<double>(pred.v[i]) - static_cast<double>(gt.v[i]);
      fn(std::sqrt(du * du + dv * dv));
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::NoValidPixels, "ground truth has no valid pixels");
  return count;
}

}  // namespace detail

/// Mean end-point error over ground-truth-valid pixels, optionally restricted
/// to a window.
inline double epe(const FlowField& pred, const FlowField& gt, const std::optional<CropSpec>& window = {}) {
  double sum = 0.0;
  const auto n = detail::for_each_endpoint_error(pred, gt, window, [&](double e) { sum += e; });
  return sum / static_cast<double>(n);
}

/// Fraction of ground-truth-valid pixels whose end-point error exceeds
/// `threshold`.
inline double outlier_rate(const FlowField& pred, const FlowField& gt, double threshold = 3.0,
                           const std::optional<CropSpec>& window = {}) {
  std::size_t outliers = 0;
  const auto n = detail::for_each_endpoint_error(pred, gt, window, [&](double e) { outliers += e > threshold; });
  return static_cast<double>(outliers) / static_cast<double>(n);
}

/// Per-pixel end-point error, 0 at invalid pixels.
inline Raster<double> endpoint_error_map(const FlowField& pred, const FlowField& gt) {
  detail::check_pair(pred.width, pred.height, gt.width, gt.height);
  Raster<double> out(gt.width, gt.height, 1);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt.valid[i]) continue;
    const double du = static_cast<double>(pred.u[i]) - gt.u[i];
    const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
    out.data()[i] = std::sqrt(du * du + dv * dv);
  }
  return out;
}

struct F1Score {
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool no_positives = false;  // both maps all-visible; f1 reported as 1
};

/// Micro-averaged F1 with "occluded" as the positive class:
/// 2TP / (2TP + FP + FN).
inline F1Score occlusion_f1(const OcclusionMap& pred, const OcclusionMap& gt,
                            const std::optional<CropSpec>& window = {}) {
  detail::check_pair(pred.width, pred.height, gt.width, gt.height);
  const CropSpec c = detail::full_window(gt.height, gt.width, window);
  F1Score s;
  for (int y = c.y0; y < c.y0 + c.h; ++y) {
    for (int x = c.x0; x < c.x0 + c.w; ++x) {
      const auto i = gt.index(x, y);
      const bool p = pred.occluded[i], g = gt.occluded[i];
      s.tp += p && g;
      s.fp += p && !g;
      s.fn += !p && g;
    }
  }
  if (s.tp + s.fp + s.fn == 0) {
    s.no_positives = true;
    s.f1 = 1.0;
  } else {
    s.f1 = 2.0 * s.tp / static_cast<double>(2 * s.tp + s.fp + s.fn);
  }
  return s;
}

}  // namespace scopeflow
