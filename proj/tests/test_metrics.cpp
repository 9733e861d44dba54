#include <fstream>

#include <gtest/gtest.h>

#include "lfhc/errors.hpp"
#include "lfhc/metrics.hpp"
#include "test_support.hpp"

using namespace lfhc;

namespace {

std::vector<RDPoint> anchor_curve() { return {{100, 30}, {200, 34}, {400, 38}, {800, 42}}; }
std::vector<RDPoint> test_curve() { return {{80, 30}, {150, 34}, {290, 38}, {560, 42}}; }

// Independent oracle: trapezoid rule on 10k samples of each fitted cubic.
double trapezoid_bd_rate(const std::vector<RDPoint>& a, const std::vector<RDPoint>& t) {
  auto ca = fit_log_rate_cubic(a);
  auto ct = fit_log_rate_cubic(t);
  auto eval = [](const std::array<double, 4>& c, double q) { return c[0] + q * (c[1] + q * (c[2] + q * c[3])); };
  double lo = std::max(a.front().quality, t.front().quality);
  double hi = std::min(a.back().quality, t.back().quality);
  const int n = 10000;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double q = lo + i * h;
    double wgt = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += wgt * (eval(ct, q) - eval(ca, q));
  }
  return 100.0 * (std::exp(acc * h / (hi - lo)) - 1.0);
}

LightField uniform_field(double v) {
  return LightField(1, 1, std::vector<Image>{Image(4, 4, 3, v)});
}

}  // namespace

TEST(Psnr, CapAndExtremes) {
  Image a(8, 8, 3, 0.3);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_NEAR(psnr(Image(8, 8, 3, 0.0), Image(8, 8, 3, 1.0)), 0.0, 1e-12);
  EXPECT_NEAR(psnr_from_mse(1e-4), 40.0, 1e-12);
}

TEST(YuvPsnr, IdenticalFieldsCapped) {
  LightField lf = uniform_field(0.4);
  YuvPsnr q = yuv_psnr(lf, lf);
  EXPECT_EQ(q.y, kPsnrCap);
  EXPECT_EQ(q.combined, kPsnrCap);
}

TEST(YuvPsnr, LumaOnlyOffset) {
  // Equal RGB offsets move Y alone: U and V are differences of RGB against Y.
  LightField ref = uniform_field(0.5);
  LightField test = uniform_field(0.5 + 1.0 / 255.0);
  YuvPsnr q = yuv_psnr(ref, test);
  const double expect_y = 20.0 * std::log10(255.0);
  EXPECT_NEAR(q.y, expect_y, 1e-6);
  EXPECT_NEAR(q.y, 48.13, 0.005);
  EXPECT_GE(q.u, 90.0);
  EXPECT_GE(q.v, 90.0);
  EXPECT_NEAR(q.combined, (6.0 * q.y + q.u + q.v) / 8.0, 1e-12);
}

TEST(YuvPsnr, ZeroVersusOne) {
  YuvPsnr q = yuv_psnr(Image(4, 4, 3, 0.0), Image(4, 4, 3, 1.0));
  EXPECT_NEAR(q.y, 0.0, 1e-9);
}

TEST(YuvPsnr, DimensionMismatch) {
  EXPECT_THROW(yuv_psnr(Image(4, 4, 3), Image(4, 5, 3)), lfhc::DimensionMismatch);
}

TEST(BdRate, IdenticalCurvesZero) {
  auto a = anchor_curve();
  EXPECT_EQ(bd_rate(a, a), 0.0);
}

TEST(BdRate, HalvedRateIsMinusFifty) {
  auto a = anchor_curve();
  auto t = a;
  for (auto& p : t) p.rate /= 2.0;
  EXPECT_NEAR(bd_rate(a, t), -50.0, 1e-9);
}

TEST(BdRate, MatchesIntegrationOracle) {
  const double expect = trapezoid_bd_rate(anchor_curve(), test_curve());
  EXPECT_NEAR(bd_rate(anchor_curve(), test_curve()), expect, 0.1);
  EXPECT_LT(expect, 0.0);
}

TEST(BdRate, AntisymmetricInLogDomain) {
  const double ab = bd_rate(anchor_curve(), test_curve());
  const double ba = bd_rate(test_curve(), anchor_curve());
  EXPECT_NEAR(std::log1p(ab / 100.0), -std::log1p(ba / 100.0), 1e-9);
}

TEST(BdRate, ScaleInvariant) {
  auto a = anchor_curve(), t = test_curve();
  for (auto* curve : {&a, &t}) {
    for (auto& p : *curve) p.rate *= 37.5;
  }
  EXPECT_NEAR(bd_rate(a, t), bd_rate(anchor_curve(), test_curve()), 1e-9);
}

TEST(BdRate, Errors) {
  std::vector<RDPoint> three = {{1, 30}, {2, 31}, {3, 32}};
  EXPECT_THROW(bd_rate(three, anchor_curve()), InvalidArgument);
  std::vector<RDPoint> disjoint = {{1, 50}, {2, 51}, {3, 52}, {4, 53}};
  EXPECT_THROW(bd_rate(disjoint, anchor_curve()), InvalidArgument);
}

TEST(RdCsv, RoundTrip) {
  testkit::TempDir dir;
  std::vector<RdRow> rows = {{4, 38, 0, 1234, 30.5, 40.25, 41.0, 32.75}, {60, 2, 1, 99, 50.0, 51.0, 52.0, 50.5}};
  write_rd_csv(dir.path() / "rd.csv", rows);
  auto back = read_rd_csv(dir.path() / "rd.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].rank, 60);
  EXPECT_EQ(back[0].bytes, 1234u);
  EXPECT_DOUBLE_EQ(back[0].psnr_yuv, 32.75);
  std::ifstream in(dir.path() / "rd.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "rank,qp,subset,bytes,psnr_y,psnr_u,psnr_v,psnr_yuv");
}
