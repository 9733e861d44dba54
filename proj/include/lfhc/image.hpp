#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace lfhc {

/// Planar floating point image. Samples are stored channel-major, then row-major:
/// index = (c * height + y) * width + x.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels = 3, double fill = 0.0)
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<std::size_t>(height) * width * channels, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int c, int y, int x) {
    assert(c >= 0 && c < channels_ && y >= 0 && y < height_ && x >= 0 && x < width_);
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    assert(c >= 0 && c < channels_ && y >= 0 && y < height_ && x >= 0 && x < width_);
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  double* plane(int c) { return data_.data() + c * plane_size(); }
  const double* plane(int c) const { return data_.data() + c * plane_size(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Signed angular offset of a view from the grid center. `s` indexes grid rows (vertical),
/// `t` grid columns (horizontal). The center view is (0, 0).
struct ViewCoord {
  int s = 0;
  int t = 0;
  friend bool operator==(const ViewCoord&, const ViewCoord&) = default;
  friend auto operator<=>(const ViewCoord&, const ViewCoord&) = default;
};

inline int chebyshev_radius(ViewCoord c) {
  int a = c.s < 0 ? -c.s : c.s;
  int b = c.t < 0 ? -c.t : c.t;
  return a > b ? a : b;
}

struct CodedView {
  ViewCoord coord;
  Image image;
};

}  // namespace lfhc
