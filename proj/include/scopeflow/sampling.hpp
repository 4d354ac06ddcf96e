#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "scopeflow/error.hpp"
#include "scopeflow/rational.hpp"
#include "scopeflow/raster.hpp"

namespace scopeflow {

/// Image extent and crop extent along one axis.
struct Geometry1D {
  int W = 1;  // image extent
  int w = 1;  // crop extent

  int slack() const noexcept { return W - w; }            // Δw
  int placements() const noexcept { return W - w + 1; }   // number of valid crop positions

  void validate() const {
    if (W < 1 || w < 1 || w > W)
      throw Error(ErrorCode::OutOfBounds, "need 1 <= w <= W, got W=" + std::to_string(W) +
                                              " w=" + std::to_string(w));
  }
};

struct Geometry2D {
  int H = 1;
  int W = 1;
  int h = 1;
  int w = 1;

  Geometry1D horizontal() const noexcept { return {W, w}; }
  Geometry1D vertical() const noexcept { return {H, h}; }
  std::int64_t placements() const noexcept {
    return static_cast<std::int64_t>(W - w + 1) * (H - h + 1);
  }

  void validate() const {
    horizontal().validate();
    vertical().validate();
  }

  /// Crop of the given per-axis ratio, rounded half away from zero and
  /// clamped to [1, S].
  static Geometry2D from_ratio(int H, int W, double ratio_h, double ratio_w) {
    const auto axis = [](int S, double r) {
      return std::clamp(static_cast<int>(std::lround(r * S)), 1, S);
    };
    Geometry2D g{H, W, axis(H, ratio_h), axis(W, ratio_w)};
    g.validate();
    return g;
  }
};

/// Pixel classes by coverage: always sampled, interior, marginal.
enum class PixelClass {
  Green,   // covered by every placement
  Orange,  // interior: w placements cover it
  Red,     // marginal: Δx placements cover it
};

/// 1-based distance to the closest border: edge pixels have distance 1.
inline int delta_border_1d(int x, int W) {
  if (W < 1 || x < 0 || x >= W)
    throw Error(ErrorCode::OutOfBounds, "pixel " + std::to_string(x) + " outside [0, " + std::to_string(W) + ")");
  return std::min(x, W - 1 - x) + 1;
}

inline PixelClass classify_1d(int x, const Geometry1D& g) {
  g.validate();
  const int dx = delta_border_1d(x, g.W);
  if (g.slack() < dx) return PixelClass::Green;
  if (g.w <= dx) return PixelClass::Orange;
  return PixelClass::Red;
}

/// Probability that a uniformly placed crop of extent w covers pixel x:
///   1              if Δw < Δx
///   w / (Δw + 1)   if w <= Δx
///   Δx / (Δw + 1)  otherwise
inline Rational prob_1d(int x, const Geometry1D& g) {
  g.validate();
  const int dx = delta_border_1d(x, g.W);
  switch (classify_1d(x, g)) {
    case PixelClass::Green: return Rational(1);
    case PixelClass::Orange: return Rational(g.w, g.placements());
    case PixelClass::Red: break;
  }
  return Rational(dx, g.placements());
}

/// Separable 2-D coverage probability.  For pixels marginal on both axes this
/// is min(Δx,Δw)·min(Δy,Δh) / ((Δw+1)(Δh+1)).
inline Rational prob_2d(int x, int y, const Geometry2D& g) {
  g.validate();
  if (x < 0 || x >= g.W || y < 0 || y >= g.H)
    throw Error(ErrorCode::OutOfBounds, "pixel (" + std::to_string(x) + "," + std::to_string(y) + ") outside image");
  return prob_1d(x, g.horizontal()) * prob_1d(y, g.vertical());
}

inline constexpr std::int64_t kOracleMaxPlacements = 100'000'000;

/// Counts every placement covering x.  Shares nothing with prob_1d.
inline Rational exhaustive_oracle_1d(int x, const Geometry1D& g) {
  g.validate();
  if (x < 0 || x >= g.W) throw Error(ErrorCode::OutOfBounds, "pixel outside image");
  std::int64_t covering = 0;
  for (int x0 = 0; x0 + g.w <= g.W; ++x0)
    if (x0 <= x && x < x0 + g.w) ++covering;
  return Rational(covering, g.placements());
}

/// Enumerates all (Δw+1)(Δh+1) crop placements and counts those covering
/// (x, y).
inline Rational exhaustive_oracle_2d(int x, int y, const Geometry2D& g) {
  g.validate();
  if (x < 0 || x >= g.W || y < 0 || y >= g.H) throw Error(ErrorCode::OutOfBounds, "pixel outside image");
  if (g.placements() > kOracleMaxPlacements)
    throw Error(ErrorCode::TooLarge, std::to_string(g.placements()) + " placements exceed the oracle limit");
  std::int64_t covering = 0;
  for (int y0 = 0; y0 + g.h <= g.H; ++y0)
    for (int x0 = 0; x0 + g.w <= g.W; ++x0)
      if (x0 <= x && x < x0 + g.w && y0 <= y && y < y0 + g.h) ++covering;
  return Rational(covering, g.placements());
}

/// Exact per-pixel probability raster.
inline Raster<Rational> probability_map(const Geometry2D& g) {
  g.validate();
  Raster<Rational> map(g.W, g.H, 1);
  std::vector<Rational> column(g.H);
  for (int y = 0; y < g.H; ++y) column[y] = prob_1d(y, g.vertical());
  std::vector<Rational> row(g.W);
  for (int x = 0; x < g.W; ++x) row[x] = prob_1d(x, g.horizontal());
  for (int y = 0; y < g.H; ++y)
    for (int x = 0; x < g.W; ++x) map.at(x, y) = row[x] * column[y];
  return map;
}

/// Same map evaluated through the enumeration oracle.
inline Raster<Rational> probability_map_oracle(const Geometry2D& g) {
  g.validate();
  Raster<Rational> map(g.W, g.H, 1);
  for (int y = 0; y < g.H; ++y)
    for (int x = 0; x < g.W; ++x) map.at(x, y) = exhaustive_oracle_2d(x, y, g);
  return map;
}

inline Raster<double> to_real(const Raster<Rational>& map) {
  Raster<double> out(map.width(), map.height(), map.channels());
  auto src = map.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i].to_double();
  return out;
}

/// Extent of the always-sampled central region: (H - 2Δh) x (W - 2Δw),
/// zero along an axis where the crop is at most half the image.
struct RegionSize {
  int h = 0;
  int w = 0;
  friend bool operator==(const RegionSize&, const RegionSize&) = default;
};

inline RegionSize green_region(const Geometry2D& g) {
  g.validate();
  return {std::max(0, g.H - 2 * (g.H - g.h)), std::max(0, g.W - 2 * (g.W - g.w))};
}

// ---------------------------------------------------------------------------
// Motion-category bias

inline constexpr double kSlowMaxSpeed = 10.0;  // px/frame
inline constexpr double kFastMinSpeed = 40.0;  // px/frame

struct CategoryRatio {
  double fast_mass = 0.0;  // mean coverage probability over fast pixels
  double slow_mass = 0.0;  // mean coverage probability over slow pixels
  double ratio = 0.0;      // fast_mass / slow_mass
  std::size_t fast_count = 0;
  std::size_t slow_count = 0;
};

/// Running coverage sums per category, poolable across several fields.
struct CategoryTotals {
  double fast_sum = 0.0;
  double slow_sum = 0.0;
  std::size_t fast_count = 0;
  std::size_t slow_count = 0;
};

/// Adds the valid pixels of `flow` to `totals`: fast when speed > fast_min,
/// slow when speed < slow_max, anything between is ignored.
inline void accumulate_categories(const FlowField& flow, const Geometry2D& g, CategoryTotals& totals,
                                  double slow_max = kSlowMaxSpeed, double fast_min = kFastMinSpeed) {
  g.validate();
  if (!flow.well_formed() || flow.width != g.W || flow.height != g.H)
    throw Error(ErrorCode::DimMismatch, "flow dimensions do not match the image geometry");

  std::vector<double> column(g.H), row(g.W);
  for (int y = 0; y < g.H; ++y) column[y] = prob_1d(y, g.vertical()).to_double();
  for (int x = 0; x < g.W; ++x) row[x] = prob_1d(x, g.horizontal()).to_double();

  for (int y = 0; y < g.H; ++y) {
    for (int x = 0; x < g.W; ++x) {
      const auto i = flow.index(x, y);
      if (!flow.valid[i]) continue;
      const double speed = std::hypot(static_cast<double>(flow.u[i]), static_cast<double>(flow.v[i]));
      const double p = row[x] * column[y];
      if (speed > fast_min) {
        totals.fast_sum += p;
        ++totals.fast_count;
      } else if (speed < slow_max) {
        totals.slow_sum += p;
        ++totals.slow_count;
      }
    }
  }
}

inline CategoryRatio category_ratio(const CategoryTotals& t) {
  if (t.fast_count == 0 || t.slow_count == 0)
    throw Error(ErrorCode::EmptyCategory,
                std::string(t.fast_count == 0 ? "fast" : "slow") + " category has no valid pixels");
  CategoryRatio out;
  out.fast_count = t.fast_count;
  out.slow_count = t.slow_count;
  out.fast_mass = t.fast_sum / static_cast<double>(t.fast_count);
  out.slow_mass = t.slow_sum / static_cast<double>(t.slow_count);
  out.ratio = out.fast_mass / out.slow_mass;
  return out;
}

/// Mean coverage probability of fast versus slow valid pixels.
inline CategoryRatio category_sampling_ratio(const FlowField& flow, const Geometry2D& g,
                                             double slow_max = kSlowMaxSpeed,
                                             double fast_min = kFastMinSpeed) {
  CategoryTotals totals;
  accumulate_categories(flow, g, totals, slow_max, fast_min);
  return category_ratio(totals);
}

}  // namespace scopeflow
