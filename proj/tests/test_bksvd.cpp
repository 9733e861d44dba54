#include <gtest/gtest.h>

#include "lfhc/bksvd.hpp"
#include "lfhc/errors.hpp"
#include "lfhc/fixtures.hpp"
#include "lfhc/metrics.hpp"
#include "lfhc/rng.hpp"

using namespace lfhc;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(static_cast<std::uint64_t>(i) * cols + j);
  }
  return m;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) { return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues(); }

double spectral_norm(const Eigen::MatrixXd& m) { return singular_values(m)(0); }

}  // namespace

TEST(BkSvd, RankOneExact) {
  Eigen::VectorXd u = gaussian(12, 1, 1), v = gaussian(9, 1, 2);
  Eigen::MatrixXd a = u * v.transpose();
  Eigen::MatrixXd d = bk_svd_lowrank(a, {.rank = 1});
  EXPECT_LE(spectral_norm(a - d), 1e-8 * spectral_norm(a));
}

TEST(BkSvd, DiagonalOracle) {
  Eigen::MatrixXd a = Eigen::Vector3d(5, 3, 1).asDiagonal();
  Eigen::MatrixXd d = bk_svd_lowrank(a, {.rank = 2, .epsilon = 0.1});
  EXPECT_LE(spectral_norm(a - d), 1.1);
}

TEST(BkSvd, RandomMatricesMeetGuarantee) {
  int failures = 0, trials = 0;
  for (int k : {4, 8, 16}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Eigen::MatrixXd a = gaussian(30, 20, 1000 + seed);
      Eigen::MatrixXd d = bk_svd_lowrank(a, {.rank = k, .epsilon = 0.1, .rng_seed = seed});
      const double sigma_next = singular_values(a)(k);
      failures += spectral_norm(a - d) > 1.1 * sigma_next;
      ++trials;
    }
  }
  EXPECT_LE(failures, trials / 50);
}

TEST(BkSvd, BasisOrthonormalAndProjection) {
  Eigen::MatrixXd a = gaussian(60, 40, 7);
  BkSvdParams p{.rank = 6, .epsilon = 0.1, .rng_seed = 3};
  BkSvdBasis z = bk_svd_basis(a, p);
  ASSERT_EQ(z.basis.cols(), 6);
  EXPECT_LE((z.basis.transpose() * z.basis - Eigen::MatrixXd::Identity(6, 6)).norm(), 1e-10);
  Eigen::MatrixXd d = bk_svd_lowrank(a, p);
  // Applying the same projector twice changes nothing.
  Eigen::MatrixXd p2 = z.basis * z.basis.transpose();
  EXPECT_LE((p2 * d - d).norm(), 1e-10 * d.norm());
  Eigen::VectorXd sv = singular_values(d);
  for (int i = 6; i < sv.size(); ++i) EXPECT_LE(sv(i), 1e-8 * sv(0));
}

TEST(BkSvd, DeterministicPerSeed) {
  Eigen::MatrixXd a = gaussian(25, 25, 11);
  EXPECT_EQ(bk_svd_lowrank(a, {.rank = 5, .rng_seed = 8}), bk_svd_lowrank(a, {.rank = 5, .rng_seed = 8}));
}

TEST(BkSvd, AutoIterationCount) {
  EXPECT_EQ(auto_krylov_iterations(64, 0.1), static_cast<int>(std::ceil(std::log(64.0) / std::sqrt(0.1))));
  EXPECT_EQ(auto_krylov_iterations(2, 0.1), 3);
  EXPECT_EQ(auto_krylov_iterations(1, 100.0), 2);
  EXPECT_EQ(auto_krylov_iterations(100000, 1e-4), 32);
}

TEST(BkSvd, RejectsBadParams) {
  Eigen::MatrixXd a = gaussian(6, 4, 1);
  EXPECT_THROW(bk_svd_lowrank(a, {.rank = 0}), InvalidArgument);
  EXPECT_THROW(bk_svd_lowrank(a, {.rank = 5}), InvalidArgument);
  EXPECT_THROW(bk_svd_lowrank(a, {.rank = 2, .epsilon = 0.0}), InvalidArgument);
  a(2, 2) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(bk_svd_lowrank(a, {.rank = 2}), NonFiniteInput);
}

TEST(StackChannels, LayoutAndRoundTrip) {
  LayerStack stack = random_layer_stack(10, 12, 2, 4);
  auto m = stack_channels(stack);
  const int y = stack.padded_height();
  EXPECT_EQ(m[0].data.rows(), 3 * y);
  EXPECT_EQ(m[0].data.cols(), stack.padded_width());
  for (int ch = 0; ch < 3; ++ch) {
    for (int l = 0; l < 3; ++l) EXPECT_EQ(m[ch].data(l * y + 3, 5), stack.layer(l).at(ch, 3, 5));
  }
  EXPECT_EQ(unstack_channels(m[0], m[1], m[2], 2), stack);
}

TEST(StackChannels, ConstantLayersGiveConstantThirds) {
  std::array<Image, 3> layers = {Image(6, 6, 3, 0.2), Image(6, 6, 3, 0.5), Image(6, 6, 3, 0.9)};
  auto m = stack_channels(LayerStack(layers, 1));
  for (int r = 0; r < 18; ++r) {
    const double expect = r < 6 ? 0.2 : (r < 12 ? 0.5 : 0.9);
    for (int c = 0; c < 6; ++c) EXPECT_EQ(m[1].data(r, c), expect);
  }
}

TEST(StackChannels, UnstackClampsAndChecksShapes) {
  StackedChannelMatrix a{Eigen::MatrixXd::Constant(12, 4, 0.5)};
  a.data(1, 1) = 1.03;
  a.data(2, 2) = -0.2;
  LayerStack s = unstack_channels(a, a, a, 1);
  EXPECT_EQ(s.layer(0).at(0, 1, 1), 1.0);
  EXPECT_EQ(s.layer(0).at(0, 2, 2), kTransmittanceFloor);
  StackedChannelMatrix b{Eigen::MatrixXd::Constant(9, 4, 0.5)};
  EXPECT_THROW(unstack_channels(a, b, a, 1), Error);
  StackedChannelMatrix odd{Eigen::MatrixXd::Constant(10, 4, 0.5)};
  EXPECT_THROW(unstack_channels(odd, odd, odd, 1), Error);
}

TEST(ApproximateStack, FullRankReproducesInput) {
  LayerStack stack = random_layer_stack(16, 16, 2, 9);
  LayerStack full = approximate_stack(stack, {.rank = stack.padded_width()});
  for (int l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < stack.layer(l).size(); ++i) {
      EXPECT_NEAR(full.layer(l).data()[i], stack.layer(l).data()[i], 1e-6);
    }
  }
}

TEST(ApproximateStack, ErrorNonIncreasingInRank) {
  // Standard sweep ranks on a 64 x 64 fixture padded for a 9 x 9 grid.
  LayerStack stack = random_layer_stack(64, 64, 4, 12);
  double prev = std::numeric_limits<double>::infinity();
  double psnr4 = 0.0, psnr60 = 0.0;
  for (int k : {4, 8, 16, 28, 44, 52, 60}) {
    LayerStack approx = approximate_stack(stack, {.rank = k, .rng_seed = 1});
    double err = 0.0;
    for (int l = 0; l < 3; ++l) err += mse(approx.layer(l), stack.layer(l));
    EXPECT_LE(err, prev * (1.0 + 1e-9) + 1e-18) << "rank " << k;
    prev = err;
    if (k == 4) psnr4 = psnr_from_mse(err / 3);
    if (k == 60) psnr60 = psnr_from_mse(err / 3);
  }
  EXPECT_GE(psnr60, psnr4);
}
