#include "lfhc/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "lfhc/color.hpp"
#include "lfhc/errors.hpp"

namespace lfhc {

double psnr_from_mse(double mse) {
  if (!(mse > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double mse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw DimensionMismatch("images compared by mse differ in shape");
  if (a.empty()) throw EmptyInput("mse of empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(mse(a, b)); }

namespace {

struct PlaneErrors {
  double sq[3] = {0.0, 0.0, 0.0};
  std::size_t count = 0;

  void add(const Image& ref, const Image& test) {
    if (!ref.same_shape(test) || ref.channels() != 3) {
      throw DimensionMismatch("YUV-PSNR inputs must be matching RGB images");
    }
    const Image a = rgb_to_yuv(ref);
    const Image b = rgb_to_yuv(test);
    for (int c = 0; c < 3; ++c) {
      const double* pa = a.plane(c);
      const double* pb = b.plane(c);
      for (std::size_t i = 0; i < a.plane_size(); ++i) {
        const double d = pa[i] - pb[i];
        sq[c] += d * d;
      }
    }
    count += a.plane_size();
  }

  YuvPsnr result(YuvWeights w) const {
    if (count == 0) throw EmptyInput("YUV-PSNR over zero samples");
    YuvPsnr r;
    r.y = psnr_from_mse(sq[0] / count);
    r.u = psnr_from_mse(sq[1] / count);
    r.v = psnr_from_mse(sq[2] / count);
    r.combined = (w.y * r.y + w.u * r.u + w.v * r.v) / (w.y + w.u + w.v);
    return r;
  }
};

}  // namespace

YuvPsnr yuv_psnr(const Image& ref, const Image& test, YuvWeights w) {
  PlaneErrors e;
  e.add(ref, test);
  return e.result(w);
}

YuvPsnr yuv_psnr(std::span<const Image> ref, std::span<const Image> test, YuvWeights w) {
  if (ref.size() != test.size()) throw DimensionMismatch("view counts differ");
  PlaneErrors e;
  for (std::size_t i = 0; i < ref.size(); ++i) e.add(ref[i], test[i]);
  return e.result(w);
}

YuvPsnr yuv_psnr(const LightField& ref, const LightField& test, YuvWeights w) {
  if (ref.rows() != test.rows() || ref.cols() != test.cols()) {
    throw DimensionMismatch("light field grids differ");
  }
  return yuv_psnr(std::span<const Image>(ref.views()), std::span<const Image>(test.views()), w);
}

std::array<double, 4> fit_log_rate_cubic(std::span<const RDPoint> points) {
  if (points.size() < 4) throw InvalidArgument("a cubic fit needs at least 4 rate-distortion points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd v(n, 4);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RDPoint& p = points[static_cast<std::size_t>(i)];
    if (!(p.rate > 0.0) || !std::isfinite(p.rate) || !std::isfinite(p.quality)) {
      throw InvalidArgument("rate must be positive and quality finite");
    }
    double q = 1.0;
    for (int k = 0; k < 4; ++k) {
      v(i, k) = q;
      q *= p.quality;
    }
    y(i) = std::log(p.rate);
  }
  Eigen::VectorXd c = v.colPivHouseholderQr().solve(y);
  return {c(0), c(1), c(2), c(3)};
}

namespace {

double cubic_integral(const std::array<double, 4>& c, double lo, double hi) {
  auto prim = [&](double q) {
    return c[0] * q + c[1] * q * q / 2.0 + c[2] * q * q * q / 3.0 + c[3] * q * q * q * q / 4.0;
  };
  return prim(hi) - prim(lo);
}

std::pair<double, double> quality_range(std::span<const RDPoint> pts) {
  double lo = pts.front().quality;
  double hi = lo;
  for (const RDPoint& p : pts) {
    lo = std::min(lo, p.quality);
    hi = std::max(hi, p.quality);
  }
  return {lo, hi};
}

}  // namespace

double bd_rate(std::span<const RDPoint> anchor, std::span<const RDPoint> test) {
  const auto ca = fit_log_rate_cubic(anchor);
  const auto ct = fit_log_rate_cubic(test);
  const auto [alo, ahi] = quality_range(anchor);
  const auto [tlo, thi] = quality_range(test);
  const double lo = std::max(alo, tlo);
  const double hi = std::min(ahi, thi);
  if (!(hi > lo)) throw InvalidArgument("rate-distortion curves share no quality interval");
  const double diff = (cubic_integral(ct, lo, hi) - cubic_integral(ca, lo, hi)) / (hi - lo);
  return 100.0 * std::expm1(diff);
}

void write_rd_csv(const std::filesystem::path& path, std::span<const RdRow> rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "rank,qp,subset,bytes,psnr_y,psnr_u,psnr_v,psnr_yuv\n";
  out.precision(6);
  out << std::fixed;
  for (const RdRow& r : rows) {
    out << r.rank << ',' << r.qp << ',' << r.subset << ',' << r.bytes << ',' << r.psnr_y << ',' << r.psnr_u
        << ',' << r.psnr_v << ',' << r.psnr_yuv << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<RdRow> read_rd_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("rank,qp,subset,bytes", 0) != 0) throw InvalidArgument("unexpected CSV header in " + path.string());
  std::vector<RdRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    RdRow r;
    char c1, c2, c3, c4, c5, c6, c7;
    ss >> r.rank >> c1 >> r.qp >> c2 >> r.subset >> c3 >> r.bytes >> c4 >> r.psnr_y >> c5 >> r.psnr_u >> c6 >>
        r.psnr_v >> c7 >> r.psnr_yuv;
    if (!ss) throw InvalidArgument("malformed CSV row " + std::to_string(lineno) + " in " + path.string());
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lfhc
