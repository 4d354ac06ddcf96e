#pragma once

#include <algorithm>
#include <cmath>
#include <charconv>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "scopeflow/error.hpp"
#include "scopeflow/raster.hpp"
#include "scopeflow/rng.hpp"

namespace scopeflow {

// Crop-size policies, chosen once per mini-batch.

/// S1: fixed crop size.
struct FixedPartial {
  int h = 0;
  int w = 0;
  friend bool operator==(const FixedPartial&, const FixedPartial&) = default;
};

/// S2: the largest crop every batch member supports.
struct MaxValid {
  friend bool operator==(const MaxValid&, const MaxValid&) = default;
};

/// S3: uniform choice among per-axis ratio pairs (r_h, r_w).
struct FixedRatioSet {
  std::vector<std::pair<double, double>> ratios;
  friend bool operator==(const FixedRatioSet&, const FixedRatioSet&) = default;
};

/// S4: each axis independently uniform over
/// [round(r_min * S), round(r_max * S)].
struct RatioRange {
  double r_min = 1.0;
  double r_max = 1.0;
  friend bool operator==(const RatioRange&, const RatioRange&) = default;
};

using ScopeStrategy = std::variant<FixedPartial, MaxValid, FixedRatioSet, RatioRange>;

/// The three-element ratio set evaluated for S3.
inline FixedRatioSet sintel_ratio_set() { return FixedRatioSet{{{0.73, 0.69}, {0.84, 0.86}, {1.0, 1.0}}}; }

namespace detail {
inline bool unit_ratio(double r) { return std::isfinite(r) && r > 0.0 && r <= 1.0; }
}  // namespace detail

/// Checks parameters; when H and W are given, also that S1 fits.
inline void validate_strategy(const ScopeStrategy& strategy, std::optional<std::pair<int, int>> image = {}) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedPartial>) {
          if (s.h < 1 || s.w < 1) throw Error(ErrorCode::InvalidStrategy, "fixed crop size must be positive");
          if (image && (s.h > image->first || s.w > image->second))
            throw Error(ErrorCode::InvalidStrategy,
                        "fixed crop " + std::to_string(s.h) + "x" + std::to_string(s.w) + " exceeds image " +
                            std::to_string(image->first) + "x" + std::to_string(image->second));
        } else if constexpr (std::is_same_v<T, FixedRatioSet>) {
          if (s.ratios.empty()) throw Error(ErrorCode::InvalidStrategy, "ratio set is empty");
          for (const auto& [rh, rw] : s.ratios)
            if (!detail::unit_ratio(rh) || !detail::unit_ratio(rw))
              throw Error(ErrorCode::InvalidStrategy, "set ratios must lie in (0, 1]");
        } else if constexpr (std::is_same_v<T, RatioRange>) {
          if (!detail::unit_ratio(s.r_min) || !detail::unit_ratio(s.r_max) || s.r_min > s.r_max)
            throw Error(ErrorCode::InvalidStrategy, "range needs 0 < r_min <= r_max <= 1");
        }
      },
      strategy);
}

/// round(r * S), half away from zero, clamped to [1, S].
inline int scaled_extent(double ratio, int S) {
  return std::clamp(static_cast<int>(std::lround(ratio * S)), 1, S);
}

/// Crop size for one mini-batch whose largest valid crop is H x W.  S4 draws
/// h before w.
inline std::pair<int, int> choose_crop_size(const ScopeStrategy& strategy, int H, int W, Rng& rng) {
  if (H < 1 || W < 1) throw Error(ErrorCode::InvalidStrategy, "image extents must be positive");
  validate_strategy(strategy, std::pair{H, W});
  return std::visit(
      [&](const auto& s) -> std::pair<int, int> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedPartial>) {
          return {s.h, s.w};
        } else if constexpr (std::is_same_v<T, MaxValid>) {
          return {H, W};
        } else if constexpr (std::is_same_v<T, FixedRatioSet>) {
          const auto k = rng.uniform_int(0, static_cast<std::int64_t>(s.ratios.size()) - 1);
          const auto [rh, rw] = s.ratios[static_cast<std::size_t>(k)];
          return {scaled_extent(rh, H), scaled_extent(rw, W)};
        } else {
          const auto axis = [&](int S) {
            const int lo = scaled_extent(s.r_min, S);
            const int hi = scaled_extent(s.r_max, S);
            return static_cast<int>(rng.uniform_int(lo, hi));
          };
          const int h = axis(H);
          const int w = axis(W);
          return {h, w};
        }
      },
      strategy);
}

/// Largest crop all images of a batch support: the element-wise minimum of
/// their (H, W).
inline std::pair<int, int> batch_max_valid_size(const std::vector<std::pair<int, int>>& image_sizes) {
  if (image_sizes.empty()) throw Error(ErrorCode::InvalidStrategy, "empty batch");
  std::pair<int, int> out = image_sizes.front();
  for (const auto& [h, w] : image_sizes) {
    out.first = std::min(out.first, h);
    out.second = std::min(out.second, w);
  }
  return out;
}

/// Uniform placement: x0 on [0, W - w], then y0 on [0, H - h].
inline CropSpec place_crop(int h, int w, int H, int W, Rng& rng) {
  if (h < 1 || w < 1 || h > H || w > W)
    throw Error(ErrorCode::CropTooLarge, "crop " + std::to_string(h) + "x" + std::to_string(w) +
                                             " does not fit image " + std::to_string(H) + "x" + std::to_string(W));
  CropSpec c{h, w, 0, 0};
  c.x0 = static_cast<int>(rng.uniform_int(0, W - w));
  c.y0 = static_cast<int>(rng.uniform_int(0, H - h));
  return c;
}

// ---------------------------------------------------------------------------
// Cropping

namespace detail {
inline void check_window(const CropSpec& c, int H, int W) {
  if (!c.fits(H, W)) throw Error(ErrorCode::OutOfBounds, "crop window exceeds raster bounds");
}
}  // namespace detail

template <class T>
Raster<T> crop(const Raster<T>& src, const CropSpec& c) {
  detail::check_window(c, src.height(), src.width());
  Raster<T> out(c.w, c.h, src.channels());
  for (int y = 0; y < c.h; ++y)
    for (int x = 0; x < c.w; ++x)
      for (int ch = 0; ch < src.channels(); ++ch) out.at(x, y, ch) = src.at(c.x0 + x, c.y0 + y, ch);
  return out;
}

/// Crops a flow field; displacement values are not rescaled.
inline FlowField crop(const FlowField& src, const CropSpec& c) {
  detail::check_window(c, src.height, src.width);
  FlowField out(c.w, c.h);
  for (int y = 0; y < c.h; ++y) {
    for (int x = 0; x < c.w; ++x) {
      const auto s = src.index(c.x0 + x, c.y0 + y);
      const auto d = out.index(x, y);
      out.u[d] = src.u[s];
      out.v[d] = src.v[s];
      out.valid[d] = src.valid[s];
    }
  }
  return out;
}

inline OcclusionMap crop(const OcclusionMap& src, const CropSpec& c) {
  detail::check_window(c, src.height, src.width);
  OcclusionMap out(c.w, c.h);
  for (int y = 0; y < c.h; ++y)
    for (int x = 0; x < c.w; ++x) out.occluded[out.index(x, y)] = src.occluded[src.index(c.x0 + x, c.y0 + y)];
  return out;
}

/// A training example: two frames, forward flow with validity, optional
/// occlusion labels.  All rasters share one size.
struct Sample {
  ImageRaster frame1;
  ImageRaster frame2;
  FlowField flow;
  std::optional<OcclusionMap> occlusion;

  int width() const noexcept { return flow.width; }
  int height() const noexcept { return flow.height; }

  void validate() const {
    const auto W = flow.width, H = flow.height;
    if (!flow.well_formed() || frame1.width() != W || frame1.height() != H || frame2.width() != W ||
        frame2.height() != H || frame1.channels() != frame2.channels() ||
        (occlusion && (occlusion->width != W || occlusion->height != H)))
      throw Error(ErrorCode::DimMismatch, "sample rasters disagree in size");
  }

  friend bool operator==(const Sample&, const Sample&) = default;
};

inline Sample apply_crop(const Sample& sample, const CropSpec& c) {
  sample.validate();
  Sample out{crop(sample.frame1, c), crop(sample.frame2, c), crop(sample.flow, c), std::nullopt};
  if (sample.occlusion) out.occlusion = crop(*sample.occlusion, c);
  return out;
}

// ---------------------------------------------------------------------------
// Text form shared by the CLI and configuration:
//   fixed:H,W | max | set:rh1,rw1;rh2,rw2;... | range:rmin,rmax

namespace detail {

/// Shortest decimal form that parses back to the same double.
inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace detail

inline std::string format_strategy(const ScopeStrategy& strategy) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FixedPartial>) {
          return "fixed:" + std::to_string(s.h) + "," + std::to_string(s.w);
        } else if constexpr (std::is_same_v<T, MaxValid>) {
          return "max";
        } else if constexpr (std::is_same_v<T, FixedRatioSet>) {
          std::string out = "set:";
          for (std::size_t i = 0; i < s.ratios.size(); ++i) {
            if (i) out += ";";
            out += detail::shortest(s.ratios[i].first) + "," + detail::shortest(s.ratios[i].second);
          }
          return out;
        } else {
          return "range:" + detail::shortest(s.r_min) + "," + detail::shortest(s.r_max);
        }
      },
      strategy);
}

namespace detail {

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidStrategy, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::InvalidStrategy, "not a number: '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v) || v < 1 || v > 1e9) throw Error(ErrorCode::InvalidStrategy, "not a positive integer: '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace detail

inline ScopeStrategy parse_strategy(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  ScopeStrategy out;
  if (kind == "max" && colon == std::string::npos) {
    out = MaxValid{};
  } else if (kind == "fixed") {
    const auto p = detail::split(args, ',');
    if (p.size() != 2) throw Error(ErrorCode::InvalidStrategy, "expected fixed:H,W");
    out = FixedPartial{detail::parse_int(p[0]), detail::parse_int(p[1])};
  } else if (kind == "set") {
    FixedRatioSet set;
    for (const auto& pair : detail::split(args, ';')) {
      const auto p = detail::split(pair, ',');
      if (p.size() != 2) throw Error(ErrorCode::InvalidStrategy, "expected set:rh,rw;rh,rw;...");
      set.ratios.emplace_back(detail::parse_double(p[0]), detail::parse_double(p[1]));
    }
    out = set;
  } else if (kind == "range") {
    const auto p = detail::split(args, ',');
    if (p.size() != 2) throw Error(ErrorCode::InvalidStrategy, "expected range:rmin,rmax");
    out = RatioRange{detail::parse_double(p[0]), detail::parse_double(p[1])};
  } else {
    throw Error(ErrorCode::InvalidStrategy, "unknown crop strategy '" + text + "'");
  }
  validate_strategy(out);
  return out;
}

}  // namespace scopeflow
