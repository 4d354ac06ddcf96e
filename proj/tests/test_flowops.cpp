#include <gtest/gtest.h>

#include <cmath>

#include "scopeflow/flowops.hpp"
#include "scopeflow/rng.hpp"
#include "test_util.hpp"

using namespace scopeflow;

namespace {

template <class T>
Raster<T> random_raster(Rng& rng, int w, int h, int c) {
  Raster<T> r(w, h, c);
  for (auto& v : r.data()) v = static_cast<T>(rng.uniform(-1, 1));
  return r;
}

}  // namespace

TEST(Warp, ZeroFlowIsIdentity) {
  Rng rng(1);
  const auto img = random_raster<float>(rng, 9, 7, 3);
  const auto res = backward_warp(img, FlowField(9, 7));
  EXPECT_EQ(res.warped, img);
  for (auto o : res.out_of_bounds) EXPECT_EQ(o, 0);
}

TEST(Warp, IntegerShiftCopiesPixels) {
  Rng rng(2);
  const auto img = random_raster<float>(rng, 8, 6, 2);
  const auto res = backward_warp(img, FlowField(8, 6, 2.0f, -1.0f));
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 8; ++x) {
      const bool inside = x + 2 < 8 && y - 1 >= 0;
      ASSERT_EQ(res.out_of_bounds[y * 8 + x], !inside);
      for (int c = 0; c < 2; ++c)
        ASSERT_EQ(res.warped.at(x, y, c), inside ? img.at(x + 2, y - 1, c) : 0.0f);
    }
}

TEST(Warp, HalfPixelAveragesNeighbours) {
  Raster<double> img(2, 1, 1);
  img.at(0, 0) = 1.0;
  img.at(1, 0) = 3.0;
  const auto res = backward_warp(img, FlowField(2, 1, 0.5f, 0.0f));
  EXPECT_DOUBLE_EQ(res.warped.at(0, 0), 2.0);
  EXPECT_TRUE(res.out_of_bounds[1]);
}

TEST(Warp, LinearInTheSource) {
  Rng rng(3);
  const auto a = random_raster<double>(rng, 6, 5, 1);
  const auto b = random_raster<double>(rng, 6, 5, 1);
  FlowField f(6, 5);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f.u[i] = static_cast<float>(rng.uniform(-2, 2));
    f.v[i] = static_cast<float>(rng.uniform(-2, 2));
  }
  Raster<double> sum(6, 5, 1);
  for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] = 2.0 * a.data()[i] - b.data()[i];
  const auto ws = backward_warp(sum, f).warped;
  const auto wa = backward_warp(a, f).warped;
  const auto wb = backward_warp(b, f).warped;
  for (std::size_t i = 0; i < ws.data().size(); ++i)
    EXPECT_NEAR(ws.data()[i], 2.0 * wa.data()[i] - wb.data()[i], 1e-12);
}

TEST(Warp, RejectsSizeMismatch) {
  EXPECT_THROW_CODE(backward_warp(ImageRaster(3, 3, 1), FlowField(3, 2)), ErrorCode::DimMismatch);
}

TEST(CostVolume, MatchesNestedLoopReference) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c1 = random_raster<double>(rng, 5, 5, 3);
    const auto c2 = random_raster<double>(rng, 5, 5, 3);
    const int d = 2;
    const auto cv = cost_volume(c1, c2, d);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x)
        for (int dy = -d; dy <= d; ++dy)
          for (int dx = -d; dx <= d; ++dx) {
            double ref = 0.0;
            if (x + dx >= 0 && x + dx < 5 && y + dy >= 0 && y + dy < 5)
              for (int n = 0; n < 3; ++n) ref += c1.at(x, y, n) * c2.at(x + dx, y + dy, n) / 3.0;
            ASSERT_NEAR(cv.at(x, y, dx, dy), ref, 1e-12);
          }
  }
}

TEST(CostVolume, ZeroDisplacementIsScaledSquaredNorm) {
  Rng rng(5);
  const auto c = random_raster<double>(rng, 4, 3, 6);
  const auto cv = cost_volume(c, c, 0);
  ASSERT_EQ(cv.offsets(), 1u);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) {
      double sq = 0;
      for (int n = 0; n < 6; ++n) sq += c.at(x, y, n) * c.at(x, y, n);
      EXPECT_NEAR(cv.at(x, y, 0, 0), sq / 6.0, 1e-12);
    }
  EXPECT_THROW_CODE(cost_volume(c, random_raster<double>(rng, 4, 3, 5), 1), ErrorCode::DimMismatch);
}

TEST(Upsample, ConstantFieldDoubles) {
  FlowField coarse(3, 2, 1.5f, -0.25f);
  coarse.valid[5] = 0;
  const auto fine = upsample_flow_x2(coarse);
  ASSERT_EQ(fine.width, 6);
  ASSERT_EQ(fine.height, 4);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    EXPECT_FLOAT_EQ(fine.u[i], 3.0f);
    EXPECT_FLOAT_EQ(fine.v[i], -0.5f);
  }
  EXPECT_FALSE(fine.valid[fine.index(5, 3)]);
  EXPECT_TRUE(fine.valid[fine.index(0, 0)]);
}

TEST(Metrics, ConstantOffsetGivesExactEpe) {
  Rng rng(6);
  FlowField gt(7, 5);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt.u[i] = static_cast<float>(rng.uniform_int(-50, 50));
    gt.v[i] = static_cast<float>(rng.uniform_int(-50, 50));
  }
  FlowField pred = gt;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    pred.u[i] += 3.0f;
    pred.v[i] += 4.0f;
  }
  EXPECT_EQ(epe(pred, gt), 5.0);
  EXPECT_EQ(epe(gt, gt), 0.0);
  EXPECT_EQ(outlier_rate(pred, gt), 1.0);
  EXPECT_EQ(outlier_rate(pred, gt, 5.0), 0.0);  // strict threshold
}

TEST(Metrics, OutlierRateMatchesCounting) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    FlowField pred(6, 6), gt(6, 6);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      pred.u[i] = static_cast<float>(rng.uniform(-6, 6));
      pred.v[i] = static_cast<float>(rng.uniform(-6, 6));
      gt.valid[i] = rng.bernoulli(0.7);
    }
    gt.valid[0] = 1;
    int outliers = 0, valid = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (!gt.valid[i]) continue;
      ++valid;
      outliers += std::hypot(static_cast<double>(pred.u[i]), static_cast<double>(pred.v[i])) > 3.0;
    }
    ASSERT_DOUBLE_EQ(outlier_rate(pred, gt), static_cast<double>(outliers) / valid);
  }
}

TEST(Metrics, NoValidPixelsIsAnError) {
  FlowField gt(2, 2);
  gt.valid.assign(4, 0);
  EXPECT_THROW_CODE(epe(gt, gt), ErrorCode::NoValidPixels);
}

TEST(Metrics, OcclusionF1FromCounts) {
  // 6 TP, 2 FP, 2 FN, 6 TN.
  OcclusionMap pred(4, 4), gt(4, 4);
  for (int i = 0; i < 6; ++i) pred.occluded[i] = gt.occluded[i] = 1;
  pred.occluded[6] = pred.occluded[7] = 1;
  gt.occluded[8] = gt.occluded[9] = 1;
  const auto s = occlusion_f1(pred, gt);
  EXPECT_EQ(s.tp, 6u);
  EXPECT_EQ(s.fp, 2u);
  EXPECT_EQ(s.fn, 2u);
  EXPECT_EQ(s.f1, 0.75);
  const auto none = occlusion_f1(OcclusionMap(3, 3), OcclusionMap(3, 3));
  EXPECT_TRUE(none.no_positives);
  EXPECT_EQ(none.f1, 1.0);
}
