#include <gtest/gtest.h>

#include "lfhc/errors.hpp"
#include "lfhc/fdl.hpp"
#include "lfhc/fixtures.hpp"

using namespace lfhc;

namespace {

std::vector<CodedView> all_views(const LightField& lf) {
  std::vector<CodedView> out;
  for (int r = 0; r < lf.rows(); ++r) {
    for (int c = 0; c < lf.cols(); ++c) out.push_back({lf.coord_of(r, c), lf.view(r, c)});
  }
  return out;
}

}  // namespace

TEST(Calibration, RecoversSinglePlaneDisparity) {
  for (double d0 : {-1.3, 0.6, 1.5}) {
    LightField lf = generate({.kind = SceneKind::TexturedPlane, .disparity = d0, .rng_seed = 7}, 5, 5, 32, 32);
    FdlFitParams p;
    p.layers = 1;
    p.calib_iters = 3;
    FdlCalibration c = calibrate(all_views(lf), p);
    ASSERT_EQ(c.disparities.size(), 1u);
    EXPECT_NEAR(c.disparities[0], d0, 0.05);
    EXPECT_TRUE(c.identifiable);
  }
}

TEST(Calibration, RecoversTwoPlanes) {
  LightField lf = generate({.kind = SceneKind::TwoPlane, .near_disparity = 2.0, .far_disparity = 0.0, .rng_seed = 3},
                           9, 9, 32, 32);
  FdlFitParams p;
  p.layers = 2;
  p.calib_iters = 4;
  FdlCalibration c = calibrate(all_views(lf), p);
  ASSERT_EQ(c.disparities.size(), 2u);
  EXPECT_NEAR(c.disparities[0], 0.0, 0.1);
  EXPECT_NEAR(c.disparities[1], 2.0, 0.1);
}

TEST(Calibration, IdenticalViewsSingleLayerGivesZero) {
  LightField lf = generate({.kind = SceneKind::TexturedPlane, .disparity = 0.0}, 3, 3, 16, 16);
  FdlFitParams p;
  p.layers = 1;
  p.d_min = -1.7;  // midpoint initialization would not already be 0
  p.d_max = 2.9;
  FdlCalibration c = calibrate(all_views(lf), p);
  EXPECT_NEAR(c.disparities[0], 0.0, 0.05);
}

TEST(Calibration, IdenticalViewsManyLayersUnidentifiable) {
  LightField lf = generate({.kind = SceneKind::Constant, .value = 0.3}, 3, 3, 8, 8);
  FdlFitParams p;
  p.layers = 5;
  FdlCalibration c = calibrate(all_views(lf), p);
  EXPECT_FALSE(c.identifiable);
  EXPECT_EQ(c.disparities, (std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0}));
  ASSERT_EQ(c.positions.size(), 9u);
  EXPECT_EQ(c.positions[0], (AngularPosition{-1.0, -1.0}));
}

TEST(Calibration, ObjectiveNonIncreasingAndDeterministic) {
  LightField lf = generate({.kind = SceneKind::TwoPlane, .rng_seed = 9}, 5, 5, 24, 24);
  FdlFitParams p;
  p.layers = 4;
  p.calib_iters = 5;
  FdlCalibration a = calibrate(all_views(lf), p);
  ASSERT_EQ(a.objective_history.size(), 6u);
  for (std::size_t i = 1; i < a.objective_history.size(); ++i) {
    EXPECT_LE(a.objective_history[i], a.objective_history[i - 1]);
  }
  for (std::size_t k = 0; k < a.disparities.size(); ++k) {
    EXPECT_GE(a.disparities[k], p.d_min);
    EXPECT_LE(a.disparities[k], p.d_max);
    if (k > 0) EXPECT_GT(a.disparities[k], a.disparities[k - 1]);
  }
  FdlCalibration b = calibrate(all_views(lf), p);
  EXPECT_EQ(a.disparities, b.disparities);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.objective_history, b.objective_history);
}

TEST(Calibration, InputErrors) {
  FdlFitParams p;
  std::vector<CodedView> one = {{{0, 0}, Image(8, 8, 3, 0.5)}};
  EXPECT_THROW(calibrate(one, p), EmptyInput);
  std::vector<CodedView> mixed = {{{0, 0}, Image(8, 8, 3, 0.5)}, {{0, 1}, Image(8, 9, 3, 0.5)}};
  EXPECT_THROW(calibrate(mixed, p), DimensionMismatch);
  p.lambda = -1.0;
  std::vector<CodedView> two = {{{0, 0}, Image(8, 8, 3, 0.5)}, {{0, 1}, Image(8, 8, 3, 0.4)}};
  EXPECT_THROW(calibrate(two, p), InvalidArgument);
}
