#include "lfhc/fdl.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "fdl_internal.hpp"
#include "lfhc/errors.hpp"

namespace lfhc {

namespace detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2d::Fft2d(int height, int width) : h_(height), w_(width) {
  const std::size_t nreal = static_cast<std::size_t>(h_) * w_;
  const std::size_t nspec = static_cast<std::size_t>(h_) * (w_ / 2 + 1);
  real_ = fftw_alloc_real(nreal);
  fftw_complex* spec = fftw_alloc_complex(nspec);
  spec_ = spec;
  std::lock_guard lock(planner_mutex());
  fwd_ = fftw_plan_dft_r2c_2d(h_, w_, real_, spec, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_2d(h_, w_, spec, real_, FFTW_ESTIMATE);
}

Fft2d::~Fft2d() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  }
  fftw_free(real_);
  fftw_free(spec_);
}

void Fft2d::forward(const double* in, std::complex<double>* out) {
  const std::size_t nreal = static_cast<std::size_t>(h_) * w_;
  const std::size_t nspec = static_cast<std::size_t>(h_) * (w_ / 2 + 1);
  std::memcpy(real_, in, nreal * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(fwd_));
  std::memcpy(static_cast<void*>(out), spec_, nspec * sizeof(fftw_complex));
}

void Fft2d::inverse(const std::complex<double>* in, double* out) {
  const std::size_t nreal = static_cast<std::size_t>(h_) * w_;
  const std::size_t nspec = static_cast<std::size_t>(h_) * (w_ / 2 + 1);
  std::memcpy(spec_, static_cast<const void*>(in), nspec * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(inv_));
  const double scale = 1.0 / static_cast<double>(nreal);
  for (std::size_t i = 0; i < nreal; ++i) out[i] = real_[i] * scale;
}

std::vector<Spectrum> image_spectra(Fft2d& fft, const Image& img) {
  std::vector<Spectrum> out(3);
  const std::size_t nspec = static_cast<std::size_t>(img.height()) * (img.width() / 2 + 1);
  for (int c = 0; c < 3; ++c) {
    out[c].resize(nspec);
    fft.forward(img.plane(c), out[c].data());
  }
  return out;
}

Eigen::MatrixXcd ridge_solve(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, double lambda) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (n <= m) {
    Eigen::MatrixXcd gram = a.adjoint() * a;
    gram.diagonal().array() += lambda;
    return gram.llt().solve(a.adjoint() * b);
  }
  Eigen::MatrixXcd gram = a * a.adjoint();
  gram.diagonal().array() += lambda;
  return a.adjoint() * gram.llt().solve(b);
}

Eigen::MatrixXcd phase_matrix(const std::vector<double>& theta, std::span<const double> disparities) {
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(theta.size()), static_cast<Eigen::Index>(disparities.size()));
  for (std::size_t j = 0; j < theta.size(); ++j) {
    for (std::size_t k = 0; k < disparities.size(); ++k) a(j, k) = std::polar(1.0, disparities[k] * theta[j]);
  }
  return a;
}

}  // namespace detail

void FdlFitParams::validate() const {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (layers < 1) throw InvalidArgument("layer count must be >= 1");
  if (!(d_min < d_max)) throw InvalidArgument("d_min must be below d_max");
  if (calib_iters < 0) throw InvalidArgument("calib_iters must be >= 0");
  if (window_px < 0) throw InvalidArgument("window_px must be >= 0");
}

Image extend_border(const Image& view, int border) {
  if (border < 0) throw InvalidArgument("border must be >= 0");
  if (border == 0) return view;
  const int h = view.height();
  const int w = view.width();
  const int ph = h + 2 * border;
  const int pw = w + 2 * border;
  // Weight 1 inside the view, falling to ~0 at the outer edge of the border.
  auto taper = [border](int i, int n) {
    int dist = i < border ? border - i : (i >= n + border ? i - (n + border - 1) : 0);
    if (dist == 0) return 1.0;
    return 0.5 + 0.5 * std::cos(std::numbers::pi * (dist - 0.5) / border);
  };
  Image out(ph, pw, view.channels());
  for (int c = 0; c < view.channels(); ++c) {
    const double* src = view.plane(c);
    double mean = 0.0;
    for (std::size_t i = 0; i < view.plane_size(); ++i) mean += src[i];
    mean /= static_cast<double>(view.plane_size());
    for (int y = 0; y < ph; ++y) {
      const int sy = std::clamp(y - border, 0, h - 1);
      const double wy = taper(y, h);
      for (int x = 0; x < pw; ++x) {
        const int sx = std::clamp(x - border, 0, w - 1);
        const double wgt = wy * taper(x, w);
        const double v = src[static_cast<std::size_t>(sy) * w + sx];
        out.at(c, y, x) = wgt == 1.0 ? v : mean + wgt * (v - mean);
      }
    }
  }
  return out;
}

void solve_layers(FdlModel& model) {
  const int h = model.padded_height();
  const int pw = model.padded_width();
  const int sw = model.spectrum_width();
  const int n = model.layer_count();
  const std::size_t m = model.positions_.size();
  const std::size_t nspec = static_cast<std::size_t>(h) * sw;
  model.coeffs_.assign(static_cast<std::size_t>(n) * 3, Spectrum(nspec));

  std::vector<double> theta(m);
  Eigen::MatrixXcd b(static_cast<Eigen::Index>(m), 3);
  for (int ky = 0; ky < h; ++ky) {
    const double fy = detail::signed_frequency(ky, h);
    for (int kx = 0; kx < sw; ++kx) {
      const double fx = detail::signed_frequency(kx, pw);
      const std::size_t f = static_cast<std::size_t>(ky) * sw + kx;
      for (std::size_t j = 0; j < m; ++j) {
        const AngularPosition& p = model.positions_[j];
        theta[j] = 2.0 * std::numbers::pi * (p.u * fy + p.v * fx);
        for (int c = 0; c < 3; ++c) b(static_cast<Eigen::Index>(j), c) = model.view_spectra_[j * 3 + c][f];
      }
      Eigen::MatrixXcd a = detail::phase_matrix(theta, model.disparities_);
      Eigen::MatrixXcd x = detail::ridge_solve(a, b, model.lambda_);
      for (int k = 0; k < n; ++k) {
        for (int c = 0; c < 3; ++c) model.coeffs_[k * 3 + c][f] = x(k, c);
      }
    }
  }
}

namespace {

constexpr double kMaxMetadataMagnitude = 1e6;

void check_inputs(std::span<const Image> views, std::span<const AngularPosition> positions, int height,
                  int width) {
  if (views.size() != positions.size()) throw InvalidArgument("one angular position per view is required");
  for (const Image& v : views) {
    if (v.height() != height || v.width() != width || v.channels() != 3) {
      throw DimensionMismatch("FDL views must share the model's 3-channel shape");
    }
    for (double s : v.data()) {
      if (!std::isfinite(s)) throw NonFiniteInput("FDL view sample");
    }
  }
  for (const AngularPosition& p : positions) {
    if (!std::isfinite(p.u) || !std::isfinite(p.v)) throw NonFiniteInput("angular position");
  }
}

void append_spectra(std::vector<Spectrum>& dst, std::span<const Image> views, int height, int width,
                    int window_px) {
  detail::Fft2d fft(height + 2 * window_px, width + 2 * window_px);
  for (const Image& v : views) {
    for (Spectrum& s : detail::image_spectra(fft, extend_border(v, window_px))) dst.push_back(std::move(s));
  }
}

}  // namespace

FdlModel fit_fdl(std::span<const Image> views, std::span<const double> disparities,
                 std::span<const AngularPosition> positions, double lambda, int window_px) {
  if (views.empty()) throw EmptyInput("fit_fdl needs at least one view");
  if (disparities.empty()) throw InvalidArgument("fit_fdl needs at least one disparity");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (window_px < 0) throw InvalidArgument("window_px must be >= 0");
  for (double d : disparities) {
    if (!std::isfinite(d)) throw NonFiniteInput("disparity");
  }
  const int h = views.front().height();
  const int w = views.front().width();
  check_inputs(views, positions, h, w);

  FdlModel model;
  model.height_ = h;
  model.width_ = w;
  model.lambda_ = lambda;
  model.window_px_ = window_px;
  model.disparities_.assign(disparities.begin(), disparities.end());
  model.positions_.assign(positions.begin(), positions.end());
  append_spectra(model.view_spectra_, views, h, w, window_px);
  solve_layers(model);
  return model;
}

FdlModel refine(const FdlModel& model, std::span<const Image> new_views,
                std::span<const AngularPosition> new_positions) {
  if (new_views.empty() && new_positions.empty()) return model;
  check_inputs(new_views, new_positions, model.height_, model.width_);
  FdlModel out = model;
  out.positions_.insert(out.positions_.end(), new_positions.begin(), new_positions.end());
  append_spectra(out.view_spectra_, new_views, out.height_, out.width_, out.window_px_);
  solve_layers(out);
  return out;
}

Image synthesize_view_unclamped(const FdlModel& model, AngularPosition pos) {
  const int h = model.padded_height();
  const int w = model.padded_width();
  const int sw = model.spectrum_width();
  const std::size_t nspec = static_cast<std::size_t>(h) * sw;
  const int n = model.layer_count();

  std::vector<Spectrum> sum(3, Spectrum(nspec));
  for (int ky = 0; ky < h; ++ky) {
    const double fy = detail::signed_frequency(ky, h);
    for (int kx = 0; kx < sw; ++kx) {
      const double fx = detail::signed_frequency(kx, w);
      const std::size_t f = static_cast<std::size_t>(ky) * sw + kx;
      const double theta = 2.0 * std::numbers::pi * (pos.u * fy + pos.v * fx);
      for (int k = 0; k < n; ++k) {
        const std::complex<double> phase = std::polar(1.0, model.disparities()[k] * theta);
        for (int c = 0; c < 3; ++c) sum[c][f] += phase * model.coefficients(k, c)[f];
      }
    }
  }

  detail::Fft2d fft(h, w);
  const int border = model.window_px();
  Image out(model.height(), model.width(), 3);
  std::vector<double> full(static_cast<std::size_t>(h) * w);
  for (int c = 0; c < 3; ++c) {
    fft.inverse(sum[c].data(), full.data());
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        out.at(c, y, x) = full[static_cast<std::size_t>(y + border) * w + x + border];
      }
    }
  }
  return out;
}

Image synthesize_view(const FdlModel& model, AngularPosition pos) {
  Image out = synthesize_view_unclamped(model, pos);
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

void write_fdl_metadata(ByteWriter& out, const FdlCalibration& calib, double lambda, int window_px) {
  out.u32(static_cast<std::uint32_t>(calib.disparities.size()));
  for (double d : calib.disparities) out.f64(d);
  out.u32(static_cast<std::uint32_t>(calib.positions.size()));
  for (const AngularPosition& p : calib.positions) {
    out.f64(p.u);
    out.f64(p.v);
  }
  out.f64(lambda);
  out.u32(static_cast<std::uint32_t>(window_px));
}

FdlMetadata read_fdl_metadata(ByteReader& in) {
  FdlMetadata meta;
  std::size_t at = in.offset();
  std::uint32_t n = in.u32();
  if (n == 0 || n > in.remaining() / 8) throw DecodeError(at, "bad disparity count");
  for (std::uint32_t k = 0; k < n; ++k) {
    at = in.offset();
    double d = in.f64();
    if (!std::isfinite(d) || std::abs(d) > kMaxMetadataMagnitude) throw DecodeError(at, "bad disparity");
    if (!meta.disparities.empty() && !(d > meta.disparities.back())) {
      throw DecodeError(at, "disparities must be strictly increasing");
    }
    meta.disparities.push_back(d);
  }
  at = in.offset();
  std::uint32_t m = in.u32();
  if (m > in.remaining() / 16) throw DecodeError(at, "bad view count");
  for (std::uint32_t j = 0; j < m; ++j) {
    at = in.offset();
    AngularPosition p;
    p.u = in.f64();
    p.v = in.f64();
    if (!std::isfinite(p.u) || !std::isfinite(p.v) || std::abs(p.u) > kMaxMetadataMagnitude ||
        std::abs(p.v) > kMaxMetadataMagnitude) {
      throw DecodeError(at, "bad angular position");
    }
    meta.positions.push_back(p);
  }
  at = in.offset();
  meta.lambda = in.f64();
  if (!(meta.lambda > 0.0) || !(meta.lambda < kMaxMetadataMagnitude)) throw DecodeError(at, "bad ridge weight");
  at = in.offset();
  std::uint32_t window = in.u32();
  if (window > 4096) throw DecodeError(at, "bad window width");
  meta.window_px = static_cast<int>(window);
  return meta;
}

}  // namespace lfhc
