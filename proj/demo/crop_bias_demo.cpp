// Prints how often each pixel of a 436x1024 frame is seen under a few crop
// sizes, and how the fast/slow sampling ratio of a border-fast flow field
// changes with the crop ratio.

#include <cstdio>

#include "scopeflow/scopeflow.hpp"

using namespace scopeflow;

int main() {
  const int H = 436, W = 1024;
  std::printf("frame %dx%d\n", H, W);
  std::printf("%-10s %-14s %-12s %s\n", "crop", "corner", "corner(real)", "always-sampled");
  for (const auto& [h, w] : {std::pair{256, 512}, {320, 640}, {384, 768}, {436, 1024}}) {
    const Geometry2D g{H, W, h, w};
    const Rational corner = prob_2d(0, 0, g);
    const RegionSize green = green_region(g);
    char crop[16];
    std::snprintf(crop, sizeof crop, "%dx%d", h, w);
    std::printf("%-10s %-14s %-12.4e %dx%d\n", crop, corner.str().c_str(), corner.to_double(), green.h, green.w);
  }

  // Coverage along the middle row for a 384x768 crop, every 64 px.
  const Geometry2D g{H, W, 384, 768};
  std::printf("\nrow %d, crop 384x768:\n", H / 2);
  for (int x = 0; x < W; x += 64) std::printf("  x=%4d  p=%.4f\n", x, prob_2d(x, H / 2, g).to_double());

  // Border pixels move fast, interior pixels move slowly.
  const int fh = 120, fw = 160, band = 10;
  FlowField f(fw, fh);
  for (int y = 0; y < fh; ++y)
    for (int x = 0; x < fw; ++x) {
      const bool border = x < band || y < band || x >= fw - band || y >= fh - band;
      f.u[f.index(x, y)] = border ? 45.0f : 2.0f;
    }
  std::printf("\nborder-fast field %dx%d, band %d\n", fh, fw, band);
  for (double r = 0.5; r <= 1.0 + 1e-9; r += 0.1) {
    const auto c = category_sampling_ratio(f, Geometry2D::from_ratio(fh, fw, r, r));
    std::printf("  crop ratio %.1f  fast/slow sampling ratio %.3f\n", r, c.ratio);
  }
}
