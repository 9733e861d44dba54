#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdl_internal.hpp"
#include "lfhc/errors.hpp"
#include "lfhc/fdl.hpp"

namespace lfhc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinSeparation = 1e-3;
constexpr int kCoarseSamples = 12;
constexpr double kGoldenTolerance = 1e-4;

struct BandBin {
  double fy;
  double fx;
  double weight;
  Eigen::MatrixXcd b;  // views x 3
};

// Per-frequency regression state for the current disparities and positions.
struct BinState {
  Eigen::MatrixXcd a;
  Eigen::MatrixXcd gram;  // A^H A, primal only
  Eigen::MatrixXcd rhs;   // A^H B, primal only
  Eigen::MatrixXcd x;
  double objective = 0.0;
};

class BandProblem {
 public:
  BandProblem(std::vector<BandBin> bins, double lambda, int layers, std::size_t views)
      : bins_(std::move(bins)), lambda_(lambda), n_(layers), m_(views) {}

  bool primal() const { return static_cast<std::size_t>(n_) <= m_; }

  std::vector<double> thetas(const BandBin& bin, const std::vector<AngularPosition>& pos) const {
    std::vector<double> th(pos.size());
    for (std::size_t j = 0; j < pos.size(); ++j) th[j] = kTwoPi * (pos[j].u * bin.fy + pos[j].v * bin.fx);
    return th;
  }

  double solve(const BandBin& bin, BinState& st) const {
    if (primal()) {
      Eigen::MatrixXcd sys = st.gram;
      sys.diagonal().array() += lambda_;
      st.x = sys.llt().solve(st.rhs);
    } else {
      st.x = detail::ridge_solve(st.a, bin.b, lambda_);
    }
    st.objective = bin.weight * ((st.a * st.x - bin.b).squaredNorm() + lambda_ * st.x.squaredNorm());
    return st.objective;
  }

  BinState build(const BandBin& bin, const std::vector<double>& d, const std::vector<AngularPosition>& pos) const {
    BinState st;
    st.a = detail::phase_matrix(thetas(bin, pos), d);
    if (primal()) {
      st.gram = st.a.adjoint() * st.a;
      st.rhs = st.a.adjoint() * bin.b;
    }
    solve(bin, st);
    return st;
  }

  std::vector<BinState> build_all(const std::vector<double>& d, const std::vector<AngularPosition>& pos) const {
    std::vector<BinState> out;
    out.reserve(bins_.size());
    for (const BandBin& bin : bins_) out.push_back(build(bin, d, pos));
    return out;
  }

  static double total(const std::vector<BinState>& states) {
    double s = 0.0;
    for (const BinState& st : states) s += st.objective;
    return s;
  }

  // Band objective with column k of every A replaced by disparity `dk`.
  double with_column(const std::vector<BinState>& states, const std::vector<std::vector<double>>& th, int k,
                     double dk, std::vector<BinState>* commit) const {
    double sum = 0.0;
    for (std::size_t f = 0; f < bins_.size(); ++f) {
      BinState st = states[f];
      Eigen::VectorXcd col(static_cast<Eigen::Index>(m_));
      for (std::size_t j = 0; j < m_; ++j) col(static_cast<Eigen::Index>(j)) = std::polar(1.0, dk * th[f][j]);
      st.a.col(k) = col;
      if (primal()) {
        Eigen::VectorXcd g = st.a.adjoint() * col;
        st.gram.col(k) = g;
        st.gram.row(k) = g.adjoint();
        st.gram(k, k) = static_cast<double>(m_);
        st.rhs.row(k) = col.adjoint() * bins_[f].b;
      }
      sum += solve(bins_[f], st);
      if (commit) (*commit)[f] = std::move(st);
    }
    return sum;
  }

  const std::vector<BandBin>& bins() const { return bins_; }
  double lambda() const { return lambda_; }

 private:
  std::vector<BandBin> bins_;
  double lambda_;
  int n_;
  std::size_t m_;
};

std::vector<BandBin> extract_band(std::span<const CodedView> views, int window_px) {
  const int h = views.front().image.height() + 2 * window_px;
  const int w = views.front().image.width() + 2 * window_px;
  const int sw = w / 2 + 1;
  const int ky_max = std::max(1, h / 16);
  const int kx_max = std::min(sw - 1, std::max(1, w / 16));

  detail::Fft2d fft(h, w);
  std::vector<std::vector<Spectrum>> spectra;
  spectra.reserve(views.size());
  for (const CodedView& v : views) {
    // The band excludes DC; removing the mean first keeps the border taper from leaking a
    // static pattern into it.
    Image centered = v.image;
    for (int c = 0; c < 3; ++c) {
      double* p = centered.plane(c);
      double mean = 0.0;
      for (std::size_t i = 0; i < centered.plane_size(); ++i) mean += p[i];
      mean /= static_cast<double>(centered.plane_size());
      for (std::size_t i = 0; i < centered.plane_size(); ++i) p[i] -= mean;
    }
    spectra.push_back(detail::image_spectra(fft, extend_border(centered, window_px)));
  }

  std::vector<BandBin> bins;
  for (int dy = -ky_max; dy <= ky_max; ++dy) {
    const int ky = (dy + h) % h;
    for (int kx = 0; kx <= kx_max; ++kx) {
      if (dy == 0 && kx == 0) continue;
      // Bins of the kx == 0 column with negative ky are conjugates of stored positive ones.
      if (kx == 0 && dy < 0) continue;
      BandBin bin;
      bin.fy = detail::signed_frequency(ky, h);
      bin.fx = detail::signed_frequency(kx, w);
      bin.weight = 2.0;
      bin.b.resize(static_cast<Eigen::Index>(views.size()), 3);
      const std::size_t f = static_cast<std::size_t>(ky) * sw + kx;
      for (std::size_t j = 0; j < views.size(); ++j) {
        for (int c = 0; c < 3; ++c) bin.b(static_cast<Eigen::Index>(j), c) = spectra[j][c][f];
      }
      bins.push_back(std::move(bin));
    }
  }
  return bins;
}

std::vector<double> evenly_spaced(double lo, double hi, int n) {
  std::vector<double> d(n);
  if (n == 1) {
    d[0] = 0.5 * (lo + hi);
    return d;
  }
  for (int k = 0; k < n; ++k) d[k] = lo + (hi - lo) * k / (n - 1);
  return d;
}

// One sweep over the disparities: coarse scan plus golden-section refinement, each value
// confined between its neighbours so the set stays strictly increasing.
void update_disparities(const BandProblem& prob, std::vector<double>& d, const std::vector<AngularPosition>& pos,
                        std::vector<BinState>& states, const FdlFitParams& params) {
  std::vector<std::vector<double>> th;
  th.reserve(prob.bins().size());
  for (const BandBin& bin : prob.bins()) th.push_back(prob.thetas(bin, pos));

  const int n = static_cast<int>(d.size());
  for (int k = 0; k < n; ++k) {
    const double lo = k == 0 ? params.d_min : d[k - 1] + kMinSeparation;
    const double hi = k == n - 1 ? params.d_max : d[k + 1] - kMinSeparation;
    if (!(lo < hi)) continue;
    const double current = BandProblem::total(states);
    auto eval = [&](double x) { return prob.with_column(states, th, k, x, nullptr); };

    std::vector<double> grid(kCoarseSamples);
    for (int i = 0; i < kCoarseSamples; ++i) grid[i] = lo + (hi - lo) * i / (kCoarseSamples - 1);
    std::vector<double> vals(kCoarseSamples);
    for (int i = 0; i < kCoarseSamples; ++i) vals[i] = eval(grid[i]);
    int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());

    double a = grid[std::max(best - 1, 0)];
    double b = grid[std::min(best + 1, kCoarseSamples - 1)];
    double best_x = grid[best];
    double best_v = vals[best];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    while (b - a > kGoldenTolerance) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = eval(x2);
      }
    }
    if (f1 < best_v) {
      best_v = f1;
      best_x = x1;
    }
    if (f2 < best_v) {
      best_v = f2;
      best_x = x2;
    }
    if (best_v < current) {
      prob.with_column(states, th, k, best_x, &states);
      d[k] = best_x;
    }
  }
}

// Gauss-Newton step on the angular positions with the layer spectra held fixed, restricted to
// directions that change the fit: common translation and scaling along the current positions
// are absorbed by the layers and disparities, so they are projected out.
void update_positions(const BandProblem& prob, const std::vector<double>& d, std::vector<AngularPosition>& pos,
                      std::vector<BinState>& states) {
  const std::size_t m = pos.size();
  const int n = static_cast<int>(d.size());
  Eigen::VectorXd step(static_cast<Eigen::Index>(2 * m));
  std::vector<Eigen::Matrix2d> hess(m, Eigen::Matrix2d::Zero());
  std::vector<Eigen::Vector2d> grad(m, Eigen::Vector2d::Zero());

  for (std::size_t f = 0; f < prob.bins().size(); ++f) {
    const BandBin& bin = prob.bins()[f];
    const BinState& st = states[f];
    Eigen::MatrixXcd pred = st.a * st.x;
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      for (int c = 0; c < 3; ++c) {
        // d(pred)/du = sum_k i 2 pi d_k fy A_jk x_kc; same for v with fx.
        std::complex<double> dphi(0.0, 0.0);
        for (int k = 0; k < n; ++k) dphi += d[k] * st.a(jj, k) * st.x(k, c);
        const std::complex<double> iu = std::complex<double>(0.0, kTwoPi * bin.fy) * dphi;
        const std::complex<double> iv = std::complex<double>(0.0, kTwoPi * bin.fx) * dphi;
        const std::complex<double> r = bin.b(jj, c) - pred(jj, c);
        const double w = bin.weight;
        hess[j](0, 0) += w * std::norm(iu);
        hess[j](1, 1) += w * std::norm(iv);
        const double cross = w * std::real(std::conj(iu) * iv);
        hess[j](0, 1) += cross;
        hess[j](1, 0) += cross;
        grad[j](0) += w * std::real(std::conj(iu) * r);
        grad[j](1) += w * std::real(std::conj(iv) * r);
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    Eigen::Matrix2d hj = hess[j];
    const double damping = 1e-9 * (hj.trace() + 1e-300);
    hj.diagonal().array() += damping;
    Eigen::Vector2d dj = hj.ldlt().solve(grad[j]);
    if (!dj.allFinite()) dj.setZero();
    step(2 * j) = dj(0);
    step(2 * j + 1) = dj(1);
  }

  Eigen::MatrixXd gauge(static_cast<Eigen::Index>(2 * m), 3);
  gauge.setZero();
  for (std::size_t j = 0; j < m; ++j) {
    gauge(2 * j, 0) = 1.0;
    gauge(2 * j + 1, 1) = 1.0;
    gauge(2 * j, 2) = pos[j].u;
    gauge(2 * j + 1, 2) = pos[j].v;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauge);
  Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(gauge.rows(), gauge.cols());
  step -= basis * (basis.transpose() * step);
  if (step.norm() < 1e-12) return;

  const double current = BandProblem::total(states);
  double scale = 1.0;
  for (int attempt = 0; attempt < 8; ++attempt, scale *= 0.5) {
    std::vector<AngularPosition> trial = pos;
    for (std::size_t j = 0; j < m; ++j) {
      trial[j].u += scale * step(2 * j);
      trial[j].v += scale * step(2 * j + 1);
    }
    std::vector<BinState> trial_states = prob.build_all(d, trial);
    if (BandProblem::total(trial_states) < current) {
      pos = std::move(trial);
      states = std::move(trial_states);
      return;
    }
  }
}

}  // namespace

FdlCalibration calibrate(std::span<const CodedView> views, const FdlFitParams& params) {
  params.validate();
  if (views.size() < 2) throw EmptyInput("calibration needs at least two views");
  const Image& first = views.front().image;
  bool all_identical = true;
  for (const CodedView& v : views) {
    if (v.image.height() != first.height() || v.image.width() != first.width() || v.image.channels() != 3) {
      throw DimensionMismatch("calibration views must share one 3-channel shape");
    }
    for (double s : v.image.data()) {
      if (!std::isfinite(s)) throw NonFiniteInput("calibration view sample");
    }
    all_identical = all_identical && v.image == first;
  }

  FdlCalibration out;
  out.disparities = evenly_spaced(params.d_min, params.d_max, params.layers);
  for (const CodedView& v : views) out.positions.push_back({static_cast<double>(v.coord.s), static_cast<double>(v.coord.t)});
  if (all_identical && params.layers > 1) {
    out.identifiable = false;
    return out;
  }

  BandProblem prob(extract_band(views, params.window_px), params.lambda, params.layers, views.size());
  std::vector<BinState> states = prob.build_all(out.disparities, out.positions);
  out.objective_history.push_back(BandProblem::total(states));
  for (int it = 0; it < params.calib_iters; ++it) {
    update_disparities(prob, out.disparities, out.positions, states, params);
    update_positions(prob, out.disparities, out.positions, states);
    out.objective_history.push_back(BandProblem::total(states));
  }
  return out;
}

}  // namespace lfhc
