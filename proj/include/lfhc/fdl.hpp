#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "lfhc/byte_io.hpp"
#include "lfhc/image.hpp"

namespace lfhc {

/// Real-valued angular position of a view: `u` along the grid-row axis (pairs with image rows),
/// `v` along the grid-column axis (pairs with image columns).
struct AngularPosition {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const AngularPosition&, const AngularPosition&) = default;
};

struct FdlFitParams {
  double lambda = 1e-4;
  int layers = 30;
  double d_min = -2.0;
  double d_max = 2.0;
  int calib_iters = 10;
  /// Width of the tapered border added around each view before the forward transform;
  /// 0 treats views as periodic.
  int window_px = 8;

  void validate() const;
};

using Spectrum = std::vector<std::complex<double>>;

/// Half-plane spectra of n disparity layers on the border-extended grid
/// (H + 2 window_px) x ((W + 2 window_px)/2 + 1) per channel, plus every view the model has
/// been fitted on so that it can be refined.
class FdlModel {
 public:
  int height() const { return height_; }
  int width() const { return width_; }
  int padded_height() const { return height_ + 2 * window_px_; }
  int padded_width() const { return width_ + 2 * window_px_; }
  int spectrum_width() const { return padded_width() / 2 + 1; }
  int layer_count() const { return static_cast<int>(disparities_.size()); }
  double lambda() const { return lambda_; }
  int window_px() const { return window_px_; }
  const std::vector<double>& disparities() const { return disparities_; }
  const std::vector<AngularPosition>& positions() const { return positions_; }
  std::size_t view_count() const { return positions_.size(); }

  /// Coefficients of layer k, channel c.
  const Spectrum& coefficients(int layer, int channel) const { return coeffs_.at(layer * 3 + channel); }

  friend bool operator==(const FdlModel&, const FdlModel&) = default;

 private:
  friend FdlModel fit_fdl(std::span<const Image>, std::span<const double>, std::span<const AngularPosition>,
                          double, int);
  friend FdlModel refine(const FdlModel&, std::span<const Image>, std::span<const AngularPosition>);
  friend void solve_layers(FdlModel&);

  int height_ = 0;
  int width_ = 0;
  double lambda_ = 0.0;
  int window_px_ = 0;
  std::vector<double> disparities_;
  std::vector<AngularPosition> positions_;
  std::vector<Spectrum> view_spectra_;  // view-major, 3 channels each
  std::vector<Spectrum> coeffs_;        // layer-major, 3 channels each
};

/// Ridge fit of the layer spectra at every frequency:
/// x(f) = argmin |A(f) x - b(f)|^2 + lambda |x|^2,  A_jk = exp(2 i pi d_k (u_j fy + v_j fx)).
FdlModel fit_fdl(std::span<const Image> views, std::span<const double> disparities,
                 std::span<const AngularPosition> positions, double lambda, int window_px = 0);

/// Refits over the union of the model's views and `new_views`. No new views -> exact copy.
FdlModel refine(const FdlModel& model, std::span<const Image> new_views,
                std::span<const AngularPosition> new_positions);

/// Inverse transform of the phase-shifted layer sum, cropped to H x W and clamped to [0, 1].
Image synthesize_view(const FdlModel& model, AngularPosition pos);

/// Same as synthesize_view without the final clamp.
Image synthesize_view_unclamped(const FdlModel& model, AngularPosition pos);

/// Extends `view` by `border` pixels per side: edge samples are replicated outward and blended
/// into the per-channel mean with a raised-cosine taper, so the periodic extension is smooth.
Image extend_border(const Image& view, int border);

struct FdlCalibration {
  std::vector<double> disparities;
  std::vector<AngularPosition> positions;
  bool identifiable = true;
  /// Band objective after initialization and after every outer iteration.
  std::vector<double> objective_history;
};

/// Joint estimate of layer disparities and per-view angular positions from the low-frequency
/// band of the view spectra. Positions start at the grid coordinates.
FdlCalibration calibrate(std::span<const CodedView> views, const FdlFitParams& params);

/// Metadata block: u32 n, n x f64 disparities, u32 m, m x (f64 u, f64 v), f64 lambda,
/// u32 window_px. Little-endian.
void write_fdl_metadata(ByteWriter& out, const FdlCalibration& calib, double lambda, int window_px);

struct FdlMetadata {
  std::vector<double> disparities;
  std::vector<AngularPosition> positions;
  double lambda = 0.0;
  int window_px = 0;
};

FdlMetadata read_fdl_metadata(ByteReader& in);

}  // namespace lfhc
