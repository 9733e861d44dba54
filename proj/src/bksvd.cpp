#include "lfhc/bksvd.hpp"

#include <algorithm>
#include <cmath>

#include "lfhc/errors.hpp"
#include "lfhc/rng.hpp"

namespace lfhc {

namespace {

// Orthonormalizes `block` against `basis` and itself (two passes of block Gram-Schmidt, then
// Householder QR). Columns whose remainder vanishes relative to the incoming block are dropped.
Eigen::MatrixXd orthonormal_extension(const Eigen::MatrixXd& basis, Eigen::MatrixXd block) {
  const double scale = block.norm();
  if (scale == 0.0) return Eigen::MatrixXd(block.rows(), 0);
  for (int pass = 0; pass < 2; ++pass) {
    if (basis.cols() > 0) block -= basis * (basis.transpose() * block);
  }
  if (block.cols() == 0) return block;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(block);
  qr.setThreshold(1e-10);
  const Eigen::Index r = qr.rank();
  const Eigen::MatrixXd r_diag = qr.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
  Eigen::Index keep = 0;
  for (Eigen::Index i = 0; i < r; ++i) {
    if (std::abs(r_diag(i, i)) > 1e-11 * scale) ++keep;
  }
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(block.rows(), keep);
  for (int pass = 0; pass < 2; ++pass) {
    if (basis.cols() > 0) q -= basis * (basis.transpose() * q);
    Eigen::HouseholderQR<Eigen::MatrixXd> re(q);
    q = re.householderQ() * Eigen::MatrixXd::Identity(q.rows(), q.cols());
  }
  return q;
}

void validate(const Eigen::MatrixXd& a, const BkSvdParams& p) {
  if (a.size() == 0) throw EmptyInput("bk_svd on an empty matrix");
  if (!a.allFinite()) throw NonFiniteInput("bk_svd matrix");
  const Eigen::Index limit = std::min(a.rows(), a.cols());
  if (p.rank < 1 || p.rank > limit) {
    throw InvalidArgument("rank " + std::to_string(p.rank) + " outside [1, " + std::to_string(limit) + "]");
  }
  if (!(p.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (p.iterations < 0) throw InvalidArgument("iterations must be >= 0");
}

}  // namespace

int auto_krylov_iterations(int cols, double epsilon) {
  double q = std::ceil(std::log(static_cast<double>(std::max(cols, 2))) / std::sqrt(epsilon));
  return static_cast<int>(std::clamp(q, 2.0, 32.0));
}

BkSvdBasis bk_svd_basis(const Eigen::MatrixXd& a, const BkSvdParams& params) {
  validate(a, params);
  const int k = params.rank;
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  const int q = params.iterations > 0 ? params.iterations : auto_krylov_iterations(cols, params.epsilon);

  // Gaussian sketch Pi (cols x k), keyed by seed and channel.
  CounterRng rng = CounterRng(params.rng_seed).child(params.channel);
  Eigen::MatrixXd sketch(cols, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < cols; ++i) sketch(i, j) = rng.normal(static_cast<std::uint64_t>(j) * cols + i);
  }

  // K = [A Pi, (A A^T) A Pi, ..., (A A^T)^q A Pi], orthonormalized block by block.
  Eigen::MatrixXd basis(rows, 0);
  Eigen::MatrixXd block = a * sketch;
  for (int it = 0; it <= q && basis.cols() < rows; ++it) {
    Eigen::MatrixXd ext = orthonormal_extension(basis, block);
    if (ext.cols() == 0) break;
    Eigen::MatrixXd grown(rows, basis.cols() + ext.cols());
    grown << basis, ext;
    basis = std::move(grown);
    block = a * (a.transpose() * ext);
  }

  // S = (Q^T A)(Q^T A)^T; its top-k eigenvectors rotate Q onto the dominant subspace.
  Eigen::MatrixXd projected = basis.transpose() * a;
  Eigen::MatrixXd s = projected * projected.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const int keep = std::min<int>(k, static_cast<int>(basis.cols()));
  // Eigenvalues are ascending; take the last `keep` columns in descending order.
  Eigen::MatrixXd top = eig.eigenvectors().rightCols(keep).rowwise().reverse();

  BkSvdBasis out;
  out.basis = basis * top;
  out.krylov_columns = static_cast<int>(basis.cols());
  out.iterations = q;
  return out;
}

Eigen::MatrixXd bk_svd_lowrank(const Eigen::MatrixXd& a, const BkSvdParams& params) {
  BkSvdBasis b = bk_svd_basis(a, params);
  return b.basis * (b.basis.transpose() * a);
}

std::array<StackedChannelMatrix, 3> stack_channels(const LayerStack& stack) {
  const int m = stack.padded_height();
  const int n = stack.padded_width();
  std::array<StackedChannelMatrix, 3> out;
  for (int c = 0; c < 3; ++c) {
    out[c].data.resize(3 * m, n);
    for (int l = 0; l < 3; ++l) {
      const Image& layer = stack.layer(l);
      for (int y = 0; y < m; ++y) {
        for (int x = 0; x < n; ++x) out[c].data(l * m + y, x) = layer.at(c, y, x);
      }
    }
  }
  return out;
}

LayerStack unstack_channels(const StackedChannelMatrix& r, const StackedChannelMatrix& g,
                            const StackedChannelMatrix& b, int pad) {
  const auto& ref = r.data;
  if (ref.rows() % 3 != 0 || ref.rows() == 0) throw DimensionMismatch("stacked rows must divide by 3");
  if (g.data.rows() != ref.rows() || g.data.cols() != ref.cols() || b.data.rows() != ref.rows() ||
      b.data.cols() != ref.cols()) {
    throw DimensionMismatch("channel matrices differ in shape");
  }
  const int m = static_cast<int>(ref.rows() / 3);
  const int n = static_cast<int>(ref.cols());
  const std::array<const Eigen::MatrixXd*, 3> channels = {&r.data, &g.data, &b.data};
  std::array<Image, 3> layers;
  for (int l = 0; l < 3; ++l) {
    layers[l] = Image(m, n, 3);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < m; ++y) {
        for (int x = 0; x < n; ++x) layers[l].at(c, y, x) = (*channels[c])(l * m + y, x);
      }
    }
  }
  return make_clamped_stack(std::move(layers), pad);
}

LayerStack approximate_stack(const LayerStack& stack, const BkSvdParams& params) {
  auto stacked = stack_channels(stack);
  std::array<StackedChannelMatrix, 3> approx;
  for (int c = 0; c < 3; ++c) {
    BkSvdParams p = params;
    p.channel = static_cast<std::uint64_t>(c);
    approx[c].data = bk_svd_lowrank(stacked[c].data, p);
  }
  return unstack_channels(approx[0], approx[1], approx[2], stack.pad());
}

}  // namespace lfhc
