#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "lfhc/layers.hpp"

namespace lfhc {

/// Channel-stacked layer matrix: rows [0, m) hold T_-1, [m, 2m) T_0, [2m, 3m) T_+1 for one
/// color channel; n is the padded layer width.
struct StackedChannelMatrix {
  Eigen::MatrixXd data;
  int layer_rows() const { return static_cast<int>(data.rows() / 3); }
};

struct BkSvdParams {
  int rank = 8;
  double epsilon = 0.1;
  int iterations = 0;  // 0 selects ceil(log(n) / sqrt(epsilon)), clamped to [2, 32]
  std::uint64_t rng_seed = 0;
  std::uint64_t channel = 0;  // stream id mixed into the sketch key
};

/// Orthonormal rank-k basis Z (rows(A) x k) from block Krylov iteration; A_k ~ Z Z^T A.
struct BkSvdBasis {
  Eigen::MatrixXd basis;
  int krylov_columns = 0;
  int iterations = 0;
};

int auto_krylov_iterations(int cols, double epsilon);

BkSvdBasis bk_svd_basis(const Eigen::MatrixXd& a, const BkSvdParams& params);

/// Z Z^T A for the basis of `bk_svd_basis`.
Eigen::MatrixXd bk_svd_lowrank(const Eigen::MatrixXd& a, const BkSvdParams& params);

std::array<StackedChannelMatrix, 3> stack_channels(const LayerStack& stack);

/// Splits each matrix into thirds, clamping samples into [kTransmittanceFloor, 1].
LayerStack unstack_channels(const StackedChannelMatrix& r, const StackedChannelMatrix& g,
                            const StackedChannelMatrix& b, int pad);

/// Per-channel rank-k approximation with independent sketch streams.
LayerStack approximate_stack(const LayerStack& stack, const BkSvdParams& params);

}  // namespace lfhc
