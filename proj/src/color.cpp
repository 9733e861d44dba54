#include "lfhc/color.hpp"

#include "lfhc/errors.hpp"

namespace lfhc {

namespace {
constexpr double kKr = 0.299;
constexpr double kKb = 0.114;
constexpr double kKg = 1.0 - kKr - kKb;
constexpr double kCb = 0.5 / (1.0 - kKb);
constexpr double kCr = 0.5 / (1.0 - kKr);
}  // namespace

Image rgb_to_yuv(const Image& rgb) {
  if (rgb.channels() != 3) throw InvalidArgument("rgb_to_yuv expects 3 channels");
  Image out(rgb.height(), rgb.width(), 3);
  const std::size_t n = rgb.plane_size();
  const double* r = rgb.plane(0);
  const double* g = rgb.plane(1);
  const double* b = rgb.plane(2);
  double* y = out.plane(0);
  double* u = out.plane(1);
  double* v = out.plane(2);
  for (std::size_t i = 0; i < n; ++i) {
    double luma = kKr * r[i] + kKg * g[i] + kKb * b[i];
    y[i] = luma;
    u[i] = 0.5 + kCb * (b[i] - luma);
    v[i] = 0.5 + kCr * (r[i] - luma);
  }
  return out;
}

Image yuv_to_rgb(const Image& yuv) {
  if (yuv.channels() != 3) throw InvalidArgument("yuv_to_rgb expects 3 channels");
  Image out(yuv.height(), yuv.width(), 3);
  const std::size_t n = yuv.plane_size();
  const double* y = yuv.plane(0);
  const double* u = yuv.plane(1);
  const double* v = yuv.plane(2);
  double* r = out.plane(0);
  double* g = out.plane(1);
  double* b = out.plane(2);
  for (std::size_t i = 0; i < n; ++i) {
    double rr = y[i] + (v[i] - 0.5) / kCr;
    double bb = y[i] + (u[i] - 0.5) / kCb;
    r[i] = rr;
    b[i] = bb;
    g[i] = (y[i] - kKr * rr - kKb * bb) / kKg;
  }
  return out;
}

}  // namespace lfhc
