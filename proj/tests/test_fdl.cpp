#include <numbers>

#include <gtest/gtest.h>

#include "lfhc/errors.hpp"
#include "lfhc/fdl.hpp"
#include "lfhc/fixtures.hpp"
#include "lfhc/metrics.hpp"
#include "lfhc/scan_order.hpp"
#include "test_support.hpp"

using namespace lfhc;

namespace {

Image circular_shift(const Image& img, int dy, int dx) {
  Image out(img.height(), img.width(), img.channels());
  const int h = img.height(), w = img.width();
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, ((y + dy) % h + h) % h, ((x + dx) % w + w) % w);
    }
  }
  return out;
}

Image scaled(const Image& img, double a) {
  Image out = img;
  for (double& v : out.data()) v *= a;
  return out;
}

}  // namespace

TEST(FdlFit, IdenticalViewsGiveMean) {
  Image base = band_limited_texture(32, 32, 5);
  std::vector<Image> views(5, base);
  std::vector<AngularPosition> pos = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<double> d = {0.0};
  FdlModel m = fit_fdl(views, d, pos, 1e-4);
  for (AngularPosition u : {AngularPosition{0, 0}, AngularPosition{2.5, -1.0}}) {
    EXPECT_LE(testkit::rms_diff(synthesize_view(m, u), base), 1e-4);
  }
}

TEST(FdlFit, SingleViewScalarRidgeBias) {
  Image base = band_limited_texture(16, 24, 8);
  const double lambda = 1e-2;
  std::vector<Image> views = {base};
  std::vector<AngularPosition> pos = {{0.0, 0.0}};
  std::vector<double> d = {0.7};
  FdlModel m = fit_fdl(views, d, pos, lambda);
  // Each coefficient is b / (1 + lambda), so the synthesis is the view scaled by the same factor.
  Image expect = scaled(base, 1.0 / (1.0 + lambda));
  EXPECT_LE(testkit::max_abs_diff(synthesize_view_unclamped(m, pos[0]), expect), 1e-12);
  const double rel = testkit::rms_diff(synthesize_view(m, pos[0]), base) / testkit::rms_diff(base, Image(16, 24, 3));
  EXPECT_LE(rel, lambda / (1.0 + lambda) + 1e-12);
}

TEST(FdlFit, TwoShiftedSinusoidsFitExactly) {
  // View j is a sinusoid of frequency f shifted by u_j * d; the 2 x 1 system at f is consistent.
  const int n = 32;
  const int k = 3;
  const double d = 1.5;
  std::vector<AngularPosition> pos = {{0.0, 0.0}, {0.0, 1.0}};
  std::vector<Image> views;
  for (const auto& p : pos) {
    Image img(n, n, 3);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) img.at(c, y, x) = 0.5 + 0.3 * std::cos(2.0 * std::numbers::pi * k * (x + p.v * d) / n);
      }
    }
    views.push_back(img);
  }
  std::vector<double> ds = {d};
  FdlModel m = fit_fdl(views, ds, pos, 1e-12);
  // Hand solution at the signal frequency: x = b0 and A x - b = 0 for both views.
  const Spectrum& coef = m.coefficients(0, 0);
  const std::complex<double> b0 = 0.3 * 0.5 * n * n;  // cos amplitude split over +/- bins
  EXPECT_NEAR(std::abs(coef[static_cast<std::size_t>(k)] - b0), 0.0, 1e-6);
  for (std::size_t j = 0; j < pos.size(); ++j) {
    EXPECT_LE(testkit::rms_diff(synthesize_view_unclamped(m, pos[j]), views[j]), 1e-6);
  }
}

TEST(FdlSynthesis, CenterIsLayerSum) {
  std::vector<Image> views = {band_limited_texture(16, 16, 1), band_limited_texture(16, 16, 2)};
  std::vector<AngularPosition> pos = {{0, 0}, {1, 1}};
  std::vector<double> d = {-1.0, 1.0};
  FdlModel m = fit_fdl(views, d, pos, 1e-3);
  Image sum = synthesize_view_unclamped(m, {0, 0});
  // All phase factors are 1, so the pixel sum equals the summed DC coefficients.
  std::complex<double> dc = m.coefficients(0, 0)[0] + m.coefficients(1, 0)[0];
  double mean = 0.0;
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) mean += sum.at(0, y, x);
  }
  EXPECT_NEAR(mean, dc.real(), 1e-9);
  EXPECT_NEAR(dc.imag(), 0.0, 1e-9);
}

TEST(FdlSynthesis, ShiftTheorem) {
  Image base = band_limited_texture(32, 48, 4);
  std::vector<Image> views = {base};
  std::vector<AngularPosition> pos = {{0, 0}};
  for (double d : {1.0, -2.0}) {
    std::vector<double> ds = {d};
    FdlModel m = fit_fdl(views, ds, pos, 1e-4);
    Image center = synthesize_view_unclamped(m, {0, 0});
    for (AngularPosition u : {AngularPosition{2, 0}, AngularPosition{0, 2}, AngularPosition{-1, 3}}) {
      Image expect = circular_shift(center, static_cast<int>(u.u * d), static_cast<int>(u.v * d));
      EXPECT_LE(testkit::rms_diff(synthesize_view_unclamped(m, u), expect), 1e-6);
    }
  }
}

TEST(FdlSynthesis, RealOutputFromHermitianSpectra) {
  std::vector<Image> views = {testkit::random_image(15, 20, 1), testkit::random_image(15, 20, 2),
                              testkit::random_image(15, 20, 3)};
  std::vector<AngularPosition> pos = {{0, 0}, {0.3, -1.1}, {1.7, 0.4}};
  std::vector<double> d = {-0.5, 0.8};
  FdlModel m = fit_fdl(views, d, pos, 1e-3, 4);
  // Half-plane storage: the kx = 0 column must itself be conjugate symmetric in ky.
  const int h = m.padded_height();
  const int sw = m.spectrum_width();
  for (int k = 0; k < m.layer_count(); ++k) {
    const Spectrum& s = m.coefficients(k, 1);
    for (int ky = 1; ky < h; ++ky) {
      auto a = s[static_cast<std::size_t>(ky) * sw];
      auto b = s[static_cast<std::size_t>(h - ky) * sw];
      EXPECT_LE(std::abs(a - std::conj(b)), 1e-8 * (1.0 + std::abs(a)));
    }
  }
  Image img = synthesize_view_unclamped(m, {0.5, 0.5});
  for (double v : img.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(FdlFit, Linearity) {
  std::vector<Image> views = {band_limited_texture(16, 16, 3), band_limited_texture(16, 16, 4)};
  std::vector<Image> half = {scaled(views[0], 0.5), scaled(views[1], 0.5)};
  std::vector<AngularPosition> pos = {{0, 0}, {1, 0}};
  std::vector<double> d = {0.0, 1.0};
  FdlModel a = fit_fdl(views, d, pos, 1e-3, 2);
  FdlModel b = fit_fdl(half, d, pos, 1e-3, 2);
  for (int k = 0; k < 2; ++k) {
    for (int c = 0; c < 3; ++c) {
      const Spectrum& sa = a.coefficients(k, c);
      const Spectrum& sb = b.coefficients(k, c);
      for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_LE(std::abs(0.5 * sa[i] - sb[i]), 1e-9 * (1.0 + std::abs(sa[i])));
    }
  }
  Image ia = synthesize_view_unclamped(a, {0.5, 0.2});
  Image ib = synthesize_view_unclamped(b, {0.5, 0.2});
  EXPECT_LE(testkit::max_abs_diff(scaled(ia, 0.5), ib), 1e-9);
}

TEST(FdlFit, RoundTripOnFittedViews) {
  LightField lf = generate({.kind = SceneKind::TexturedPlane, .disparity = 1.0, .rng_seed = 3}, 5, 5, 32, 32);
  std::vector<Image> views;
  std::vector<AngularPosition> pos;
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      views.push_back(lf.view(r, c));
      pos.push_back({static_cast<double>(r - 2), static_cast<double>(c - 2)});
    }
  }
  std::vector<double> d = {-1.0, 0.0, 1.0, 2.0};
  FdlModel m = fit_fdl(views, d, pos, 1e-4);
  for (std::size_t j = 0; j < views.size(); ++j) EXPECT_GE(psnr(synthesize_view(m, pos[j]), views[j]), 35.0);
}

TEST(FdlRefine, NoNewViewsIsIdentity) {
  std::vector<Image> views = {band_limited_texture(16, 16, 1)};
  std::vector<AngularPosition> pos = {{0, 0}};
  std::vector<double> d = {0.0, 1.0};
  FdlModel m = fit_fdl(views, d, pos, 1e-4, 3);
  EXPECT_EQ(refine(m, {}, {}), m);
}

TEST(FdlRefine, MatchesFitOnUnion) {
  std::vector<Image> a = {band_limited_texture(16, 16, 1), band_limited_texture(16, 16, 2)};
  std::vector<Image> b = {band_limited_texture(16, 16, 3)};
  std::vector<AngularPosition> pa = {{0, 0}, {1, 0}}, pb = {{0, 1}};
  std::vector<double> d = {0.0, 1.0};
  FdlModel refined = refine(fit_fdl(a, d, pa, 1e-4, 2), b, pb);
  std::vector<Image> all = {a[0], a[1], b[0]};
  std::vector<AngularPosition> pall = {pa[0], pa[1], pb[0]};
  EXPECT_EQ(refined, fit_fdl(all, d, pall, 1e-4, 2));
}

TEST(FdlRefine, DuplicateViewImprovesOrTies) {
  LightField lf = generate({.kind = SceneKind::TwoPlane, .rng_seed = 5}, 3, 3, 24, 24);
  std::vector<Image> views;
  std::vector<AngularPosition> pos;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      views.push_back(lf.view(r, c));
      pos.push_back({static_cast<double>(r - 1), static_cast<double>(c - 1)});
    }
  }
  std::vector<double> d = {0.0, 2.0};
  FdlModel m = fit_fdl(views, d, pos, 1e-4);
  std::vector<Image> dup = {views[0]};
  std::vector<AngularPosition> dup_pos = {pos[0]};
  FdlModel r = refine(m, dup, dup_pos);
  const double before = testkit::rms_diff(synthesize_view(m, pos[0]), views[0]);
  const double after = testkit::rms_diff(synthesize_view(r, pos[0]), views[0]);
  EXPECT_LE(after, before + 1e-12);
}

TEST(FdlRefine, SecondSubsetImprovesAfterRefine) {
  LightField lf = generate({.kind = SceneKind::TwoPlane, .rng_seed = 2}, 9, 9, 32, 32);
  ScanOrder order = partition_views(9, ScanKind::C2);
  auto collect = [&](const std::vector<ViewCoord>& coords, std::vector<Image>& v, std::vector<AngularPosition>& p) {
    for (ViewCoord c : coords) {
      v.push_back(lf.view(c));
      p.push_back({static_cast<double>(c.s), static_cast<double>(c.t)});
    }
  };
  std::vector<Image> v1, v2;
  std::vector<AngularPosition> p1, p2;
  collect(order.subsets[0], v1, p1);
  collect(order.subsets[1], v2, p2);
  std::vector<double> d = {0.0, 2.0};
  FdlModel m = fit_fdl(v1, d, p1, 1e-4, 4);
  FdlModel r = refine(m, v2, p2);
  double before = 0.0, after = 0.0;
  for (std::size_t j = 0; j < v2.size(); ++j) {
    before += psnr(synthesize_view(m, p2[j]), v2[j]);
    after += psnr(synthesize_view(r, p2[j]), v2[j]);
  }
  EXPECT_GE(after, before);
}

// Stated postcondition of refine. The union least-squares fit trades accuracy on earlier
// views for the new ones once occlusions make the model inexact, so this currently fails.
TEST(FdlRefine, EarlierViewResidualGrowsAtMostOneThousandth) {
  LightField lf = generate({.kind = SceneKind::TwoPlane, .rng_seed = 2}, 9, 9, 32, 32);
  ScanOrder order = partition_views(9, ScanKind::C2);
  std::vector<Image> v1, v2;
  std::vector<AngularPosition> p1, p2;
  for (ViewCoord c : order.subsets[0]) {
    v1.push_back(lf.view(c));
    p1.push_back({static_cast<double>(c.s), static_cast<double>(c.t)});
  }
  for (ViewCoord c : order.subsets[1]) {
    v2.push_back(lf.view(c));
    p2.push_back({static_cast<double>(c.s), static_cast<double>(c.t)});
  }
  std::vector<double> d = {0.0, 2.0};
  FdlModel m = fit_fdl(v1, d, p1, 1e-4, 4);
  FdlModel r = refine(m, v2, p2);
  for (std::size_t j = 0; j < v1.size(); ++j) {
    const double prev = testkit::rms_diff(synthesize_view(m, p1[j]), v1[j]);
    EXPECT_LE(testkit::rms_diff(synthesize_view(r, p1[j]), v1[j]), prev + 1e-3) << "view " << j;
  }
}

TEST(FdlFit, InputErrors) {
  std::vector<Image> views = {Image(8, 8, 3, 0.5)};
  std::vector<AngularPosition> pos = {{0, 0}};
  std::vector<double> d = {0.0};
  EXPECT_THROW(fit_fdl({}, d, {}, 1e-4), EmptyInput);
  EXPECT_THROW(fit_fdl(views, d, pos, 0.0), InvalidArgument);
  std::vector<AngularPosition> two = {{0, 0}, {1, 0}};
  EXPECT_THROW(fit_fdl(views, d, two, 1e-4), InvalidArgument);
  views[0].at(1, 2, 3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fit_fdl(views, d, pos, 1e-4), NonFiniteInput);
  FdlFitParams bad;
  bad.d_min = 1.0;
  bad.d_max = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(FdlMetadata, RoundTrip) {
  FdlCalibration c;
  c.disparities = {-1.25, 0.0, 2.5};
  c.positions = {{0, 0}, {0.5, -1.5}};
  ByteWriter w;
  write_fdl_metadata(w, c, 1e-4, 8);
  auto bytes = w.take();
  EXPECT_EQ(bytes.size(), 4u + 3 * 8 + 4 + 2 * 16 + 8 + 4);
  ByteReader r(bytes);
  FdlMetadata m = read_fdl_metadata(r);
  EXPECT_EQ(m.disparities, c.disparities);
  EXPECT_EQ(m.positions, c.positions);
  EXPECT_EQ(m.lambda, 1e-4);
  EXPECT_EQ(m.window_px, 8);
  EXPECT_EQ(r.remaining(), 0u);
  std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 5);
  ByteReader rc(cut);
  EXPECT_THROW(read_fdl_metadata(rc), DecodeError);
}

TEST(FdlBorder, ExtensionKeepsInteriorAndTapersToMean) {
  Image img = testkit::random_image(10, 12, 4);
  Image ext = extend_border(img, 4);
  ASSERT_EQ(ext.height(), 18);
  ASSERT_EQ(ext.width(), 20);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 12; ++x) EXPECT_EQ(ext.at(c, y + 4, x + 4), img.at(c, y, x));
    }
  }
  EXPECT_EQ(extend_border(img, 0), img);
}
