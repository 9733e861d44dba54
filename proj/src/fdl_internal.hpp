#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "lfhc/fdl.hpp"

namespace lfhc::detail {

/// Signed frequency in cycles per pixel; the Nyquist bin maps to -1/2.
inline double signed_frequency(int k, int n) {
  return static_cast<double>(k < (n + 1) / 2 ? k : k - n) / n;
}

/// Real-to-complex 2D transform of fixed size. Plans are created under a global lock and
/// always executed on the instance's own aligned buffers, so results do not depend on the
/// caller's memory alignment.
class Fft2d {
 public:
  Fft2d(int height, int width);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  /// Unnormalized forward transform of an H x W real plane into H x (W/2 + 1) bins.
  void forward(const double* in, std::complex<double>* out);
  /// Inverse of `forward`, including the 1 / (H W) normalization.
  void inverse(const std::complex<double>* in, double* out);

 private:
  int h_;
  int w_;
  double* real_;
  void* spec_;
  void* fwd_;
  void* inv_;
};

/// Half-plane spectra of one RGB image, 3 channels. `fft` must match the image size.
std::vector<Spectrum> image_spectra(Fft2d& fft, const Image& img);

/// Ridge solution x = argmin |A x - b|^2 + lambda |x|^2 for every column of `b`, via the
/// smaller of the primal (n x n) and dual (m x m) regularized normal equations.
Eigen::MatrixXcd ridge_solve(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double lambda);

/// A_jk = exp(i d_k theta_j).
Eigen::MatrixXcd phase_matrix(const std::vector<double>& theta, std::span<const double> disparities);

}  // namespace lfhc::detail
