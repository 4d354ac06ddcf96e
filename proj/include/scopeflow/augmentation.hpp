#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "scopeflow/error.hpp"
#include "scopeflow/flowops.hpp"
#include "scopeflow/raster.hpp"
#include "scopeflow/rng.hpp"
#include "scopeflow/scoping.hpp"

namespace scopeflow {

/// Planar affine map  x' = a x + b y + tx,  y' = c x + d y + ty.
struct Affine2D {
  double a = 1, b = 0, c = 0, d = 1, tx = 0, ty = 0;

  static Affine2D identity() { return {}; }

  /// Zoom z and rotation theta about `center`, then translation t.
  static Affine2D similarity(double zoom, double theta, double cx, double cy, double tx, double ty) {
    const double cs = zoom * std::cos(theta);
    const double sn = zoom * std::sin(theta);
    // c + L (p - c) + t  with L = [cs -sn; sn cs]
    return {cs, -sn, sn, cs, cx - (cs * cx - sn * cy) + tx, cy - (sn * cx + cs * cy) + ty};
  }

  static Affine2D mirror(bool horizontal, bool vertical, double cx, double cy) {
    Affine2D m;
    if (horizontal) {
      m.a = -1;
      m.tx = 2 * cx;
    }
    if (vertical) {
      m.d = -1;
      m.ty = 2 * cy;
    }
    return m;
  }

  std::array<double, 2> apply(double x, double y) const noexcept { return {a * x + b * y + tx, c * x + d * y + ty}; }
  std::array<double, 2> apply_linear(double x, double y) const noexcept { return {a * x + b * y, c * x + d * y}; }

  double determinant() const noexcept { return a * d - b * c; }

  Affine2D inverse() const {
    const double det = determinant();
    if (!std::isfinite(det) || std::fabs(det) < 1e-12)
      throw Error(ErrorCode::SingularTransform, "affine transform is not invertible");
    const double ia = d / det, ib = -b / det, ic = -c / det, id = a / det;
    return {ia, ib, ic, id, -(ia * tx + ib * ty), -(ic * tx + id * ty)};
  }

  /// (*this) o inner: apply inner first.
  Affine2D compose(const Affine2D& inner) const noexcept {
    return {a * inner.a + b * inner.c, a * inner.b + b * inner.d, c * inner.a + d * inner.c,
            c * inner.b + d * inner.d, a * inner.tx + b * inner.ty + tx, c * inner.tx + d * inner.ty + ty};
  }

  friend bool operator==(const Affine2D&, const Affine2D&) = default;
};

// ---------------------------------------------------------------------------
// Configuration

/// Upper zoom bound moves linearly from max_start to max_end over a stage.
struct ZoomSchedule {
  double min = 0.8;
  double max_start = 1.5;
  double max_end = 1.3;

  double max_at(double progress) const noexcept { return (1.0 - progress) * max_start + progress * max_end; }

  void validate() const {
    if (!(min > 0.0 && min <= max_end && max_end <= max_start && std::isfinite(max_start)))
      throw Error(ErrorCode::BadConfig, "zoom schedule needs 0 < min <= max_end <= max_start");
  }

  friend bool operator==(const ZoomSchedule&, const ZoomSchedule&) = default;
};

/// Second-frame perturbation; all ranges symmetric around identity.
struct RelativeRanges {
  bool enabled = false;
  double zoom = 0.0;       // zoom in [1 - zoom, 1 + zoom]
  double rotation = 0.0;   // radians, +-
  double translate = 0.0;  // pixels, +-

  friend bool operator==(const RelativeRanges&, const RelativeRanges&) = default;
};

struct GeometricRanges {
  double rotation = 0.1;    // radians, +-
  double translate = 10.0;  // pixels, +-
  bool hflip = true;
  bool vflip = true;
  RelativeRanges relative;

  friend bool operator==(const GeometricRanges&, const GeometricRanges&) = default;
};

struct PhotometricRanges {
  double gain_min = 0.8;
  double gain_max = 1.2;
  double gamma_min = 0.7;
  double gamma_max = 1.5;
  double noise_min = 0.0;
  double noise_max = 0.04;

  friend bool operator==(const PhotometricRanges&, const PhotometricRanges&) = default;
};

struct AugmentationConfig {
  ZoomSchedule zoom;
  GeometricRanges geometric;
  PhotometricRanges photometric;
  bool use_noise = true;

  /// No-op augmentation: unit zoom, no rotation/translation/flips, unit gain
  /// and gamma, no noise.
  static AugmentationConfig identity() {
    AugmentationConfig c;
    c.zoom = {1.0, 1.0, 1.0};
    c.geometric = {0.0, 0.0, false, false, {}};
    c.photometric = {1.0, 1.0, 1.0, 1.0, 0.0, 0.0};
    c.use_noise = false;
    return c;
  }

  void validate() const {
    zoom.validate();
    const auto& g = geometric;
    const auto& p = photometric;
    const auto bad = [](const char* what) { throw Error(ErrorCode::BadConfig, what); };
    if (!(g.rotation >= 0 && g.translate >= 0)) bad("geometric ranges must be non-negative");
    if (g.relative.enabled &&
        !(g.relative.zoom >= 0 && g.relative.zoom < 1 && g.relative.rotation >= 0 && g.relative.translate >= 0))
      bad("relative ranges must be non-negative with zoom < 1");
    if (!(p.gain_min >= 0 && p.gain_min <= p.gain_max)) bad("gain range must satisfy 0 <= min <= max");
    if (!(p.gamma_min > 0 && p.gamma_min <= p.gamma_max)) bad("gamma range must satisfy 0 < min <= max");
    if (!(p.noise_min >= 0 && p.noise_min <= p.noise_max)) bad("noise range must satisfy 0 <= min <= max");
  }

  friend bool operator==(const AugmentationConfig&, const AugmentationConfig&) = default;
};

// ---------------------------------------------------------------------------
// Sampled parameters

struct RelativeAffine {
  double zoom = 1.0;
  double rotation = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  friend bool operator==(const RelativeAffine&, const RelativeAffine&) = default;
};

struct AugmentationParams {
  double zoom = 1.0;
  double rotation = 0.0;  // radians
  double tx = 0.0;        // pixels
  double ty = 0.0;
  bool hflip = false;
  bool vflip = false;
  std::optional<RelativeAffine> relative;  // frame 2 only
  std::array<double, 3> color_gain{1.0, 1.0, 1.0};
  double gamma = 1.0;
  double noise_sigma = 0.0;

  friend bool operator==(const AugmentationParams&, const AugmentationParams&) = default;
};

/// Draws one parameter set.  The draw sequence is fixed (zoom, rotation, tx,
/// ty, hflip, vflip, [relative zoom, rotation, tx, ty], 3 gains, gamma,
/// sigma) and consumed even for disabled options, so toggling noise or flips
/// leaves every other draw unchanged.
inline AugmentationParams sample_params(const AugmentationConfig& config, double progress, Rng& rng) {
  config.validate();
  if (!(progress >= 0.0 && progress <= 1.0)) throw Error(ErrorCode::BadConfig, "schedule progress must lie in [0, 1]");
  const auto& g = config.geometric;
  const auto& ph = config.photometric;

  AugmentationParams p;
  p.zoom = std::min(rng.uniform(config.zoom.min, config.zoom.max_at(progress)), config.zoom.max_at(progress));
  p.rotation = rng.uniform(-g.rotation, g.rotation);
  p.tx = rng.uniform(-g.translate, g.translate);
  p.ty = rng.uniform(-g.translate, g.translate);
  const bool hcoin = rng.bernoulli(0.5);
  const bool vcoin = rng.bernoulli(0.5);
  p.hflip = g.hflip && hcoin;
  p.vflip = g.vflip && vcoin;
  if (g.relative.enabled) {
    RelativeAffine r;
    r.zoom = rng.uniform(1.0 - g.relative.zoom, 1.0 + g.relative.zoom);
    r.rotation = rng.uniform(-g.relative.rotation, g.relative.rotation);
    r.tx = rng.uniform(-g.relative.translate, g.relative.translate);
    r.ty = rng.uniform(-g.relative.translate, g.relative.translate);
    p.relative = r;
  }
  for (auto& gain : p.color_gain) gain = rng.uniform(ph.gain_min, ph.gain_max);
  p.gamma = rng.uniform(ph.gamma_min, ph.gamma_max);
  const double sigma = rng.uniform(ph.noise_min, ph.noise_max);
  p.noise_sigma = config.use_noise ? sigma : 0.0;
  return p;
}

// ---------------------------------------------------------------------------
// Geometric

/// Forward maps from source to augmented coordinates.  T1 acts on frame 1 and
/// the flow grid, T2 = T1 o R on frame 2.
struct GeometricTransforms {
  Affine2D t1;
  Affine2D t2;
  Affine2D relative;  // R
};

inline GeometricTransforms make_transforms(const AugmentationParams& p, int W, int H) {
  const double cx = (W - 1) / 2.0;
  const double cy = (H - 1) / 2.0;
  if (!(p.zoom > 0.0)) throw Error(ErrorCode::SingularTransform, "zoom must be positive");
  const Affine2D global =
      Affine2D::mirror(p.hflip, p.vflip, cx, cy).compose(Affine2D::similarity(p.zoom, p.rotation, cx, cy, p.tx, p.ty));
  Affine2D rel;
  if (p.relative) {
    if (!(p.relative->zoom > 0.0)) throw Error(ErrorCode::SingularTransform, "relative zoom must be positive");
    rel = Affine2D::similarity(p.relative->zoom, p.relative->rotation, cx, cy, p.relative->tx, p.relative->ty);
  }
  return {global, p.relative ? global.compose(rel) : global, rel};
}

namespace detail {

template <class T>
Raster<T> resample(const Raster<T>& src, const Affine2D& inverse) {
  Raster<T> out(src.width(), src.height(), src.channels());
  std::vector<double> px(src.channels());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const auto [sx, sy] = inverse.apply(x, y);
      bilinear_sample(src, sx, sy, px);
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = static_cast<T>(px[c]);
    }
  }
  return out;
}

}  // namespace detail

/// Resamples both frames, the flow, its validity and occlusion labels.
///
/// For an augmented pixel x with source position p = T1^-1(x), the new flow
/// is f'(x) = T2(p + f(p)) - x, evaluated as L2 f(p) + L1 (R(p) - p) where L
/// denotes linear parts.  f(p) is bilinear when all contributing source pixels
/// are valid and nearest-neighbour otherwise; validity and occlusion use the
/// nearest source pixel, and pixels whose p leaves the source become invalid
/// with zero flow.
inline Sample apply_geometric(const Sample& sample, const AugmentationParams& params) {
  sample.validate();
  const int W = sample.width(), H = sample.height();
  const auto tf = make_transforms(params, W, H);
  const Affine2D inv1 = tf.t1.inverse();
  const Affine2D inv2 = tf.t2.inverse();

  Sample out{detail::resample(sample.frame1, inv1), detail::resample(sample.frame2, inv2), FlowField(W, H),
             std::nullopt};
  if (sample.occlusion) out.occlusion = OcclusionMap(W, H);

  const FlowField& f = sample.flow;
  const Affine2D& R = tf.relative;
  const bool has_relative = params.relative.has_value();

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const auto o = out.flow.index(x, y);
      const auto [px, py] = inv1.apply(x, y);
      const bool inside = px >= 0.0 && py >= 0.0 && px <= W - 1 && py <= H - 1;
      if (!inside) {
        out.flow.u[o] = 0.0f;
        out.flow.v[o] = 0.0f;
        out.flow.valid[o] = 0;
        continue;
      }
      const int nx = std::clamp(static_cast<int>(std::lround(px)), 0, W - 1);
      const int ny = std::clamp(static_cast<int>(std::lround(py)), 0, H - 1);
      const auto nearest = f.index(nx, ny);
      if (out.occlusion) out.occlusion->occluded[o] = sample.occlusion->occluded[nearest];
      if (!f.valid[nearest]) {
        out.flow.u[o] = 0.0f;
        out.flow.v[o] = 0.0f;
        out.flow.valid[o] = 0;
        continue;
      }

      // Source flow at p.
      const int x0 = static_cast<int>(std::floor(px));
      const int y0 = static_cast<int>(std::floor(py));
      const double fx = px - x0, fy = py - y0;
      double u = 0.0, v = 0.0;
      bool all_valid = true;
      const double wx[2] = {1.0 - fx, fx};
      const double wy[2] = {1.0 - fy, fy};
      for (int j = 0; j < 2 && all_valid; ++j) {
        if (wy[j] == 0.0) continue;
        for (int i = 0; i < 2; ++i) {
          if (wx[i] == 0.0) continue;
          const auto s = f.index(x0 + i, y0 + j);
          if (!f.valid[s]) {
            all_valid = false;
            break;
          }
          u += wy[j] * wx[i] * f.u[s];
          v += wy[j] * wx[i] * f.v[s];
        }
      }
      if (!all_valid) {
        u = f.u[nearest];
        v = f.v[nearest];
      }

      // L2 f = L1 (LR f); R(p) - p = (LR - I)(p - c) + t_R.
      std::array<double, 2> moved{u, v};
      std::array<double, 2> shift{0.0, 0.0};
      if (has_relative) {
        moved = R.apply_linear(u, v);
        const auto rp = R.apply(px, py);
        shift = tf.t1.apply_linear(rp[0] - px, rp[1] - py);
      }
      const auto lf = tf.t1.apply_linear(moved[0], moved[1]);
      out.flow.u[o] = static_cast<float>(lf[0] + shift[0]);
      out.flow.v[o] = static_cast<float>(lf[1] + shift[1]);
      out.flow.valid[o] = 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Photometric

/// out = clamp((gain * in)^gamma + N(0, sigma^2), 0, 1) per channel; noise is
/// drawn for every pixel and channel of frame 1, then frame 2, only when
/// sigma > 0.  Single-channel frames use the first gain.
inline std::pair<ImageRaster, ImageRaster> apply_photometric(const ImageRaster& frame1, const ImageRaster& frame2,
                                                             const AugmentationParams& p, Rng& rng) {
  if (!(p.gamma > 0.0) || !(p.noise_sigma >= 0.0))
    throw Error(ErrorCode::BadConfig, "gamma must be positive and sigma non-negative");
  const auto transform = [&](const ImageRaster& in) {
    ImageRaster out = in;
    const int channels = in.channels();
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int c = channels == 3 ? static_cast<int>(i % 3) : 0;
      double value = std::pow(p.color_gain[c] * static_cast<double>(data[i]), p.gamma);
      if (p.noise_sigma > 0.0) value += p.noise_sigma * rng.normal();
      data[i] = static_cast<float>(std::clamp(value, 0.0, 1.0));
    }
    return out;
  };
  auto a = transform(frame1);
  auto b = transform(frame2);
  return {std::move(a), std::move(b)};
}

/// Photometric then geometric; cropping follows separately.
inline Sample augment_sample(const Sample& sample, const AugmentationParams& params, Rng& rng) {
  sample.validate();
  Sample tmp = sample;
  auto [f1, f2] = apply_photometric(sample.frame1, sample.frame2, params, rng);
  tmp.frame1 = std::move(f1);
  tmp.frame2 = std::move(f2);
  return apply_geometric(tmp, params);
}

}  // namespace scopeflow
