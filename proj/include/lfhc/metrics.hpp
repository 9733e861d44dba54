#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "lfhc/image.hpp"
#include "lfhc/lightfield.hpp"

namespace lfhc {

inline constexpr double kPsnrCap = 99.0;

/// PSNR for peak 1.0 from a mean squared error, capped at kPsnrCap (so zero error is finite).
double psnr_from_mse(double mse);

/// Mean squared error over every sample. Shapes must match.
double mse(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b);

struct YuvWeights {
  double y = 6.0;
  double u = 1.0;
  double v = 1.0;
};

struct YuvPsnr {
  double y = 0.0;
  double u = 0.0;
  double v = 0.0;
  double combined = 0.0;
};

/// Per-plane PSNR of two RGB images after BT.601 conversion, combined as a weighted mean.
YuvPsnr yuv_psnr(const Image& ref, const Image& test, YuvWeights w = {});

/// Same as above with the squared error of each plane pooled over every view.
YuvPsnr yuv_psnr(const LightField& ref, const LightField& test, YuvWeights w = {});

/// Same pooling as the light field overload, over matched lists of views.
YuvPsnr yuv_psnr(std::span<const Image> ref, std::span<const Image> test, YuvWeights w = {});

struct RDPoint {
  double rate = 0.0;
  double quality = 0.0;
};

/// Bjontegaard rate difference in percent. Each curve is fitted with a least-squares cubic of
/// ln(rate) against quality; the fits are integrated over the shared quality interval.
/// Negative values mean `test` needs less rate than `anchor`.
double bd_rate(std::span<const RDPoint> anchor, std::span<const RDPoint> test);

/// Least-squares cubic ln(rate) = c0 + c1 q + c2 q^2 + c3 q^3.
std::array<double, 4> fit_log_rate_cubic(std::span<const RDPoint> points);

/// One row of a rate-distortion report. subset == 0 denotes the whole light field.
struct RdRow {
  int rank = 0;
  int qp = 0;
  int subset = 0;
  std::size_t bytes = 0;
  double psnr_y = 0.0;
  double psnr_u = 0.0;
  double psnr_v = 0.0;
  double psnr_yuv = 0.0;
};

void write_rd_csv(const std::filesystem::path& path, std::span<const RdRow> rows);
std::vector<RdRow> read_rd_csv(const std::filesystem::path& path);

}  // namespace lfhc
