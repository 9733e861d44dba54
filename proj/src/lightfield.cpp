#include "lfhc/lightfield.hpp"

#include <cmath>
#include <cstdio>

#include "lfhc/errors.hpp"
#include "lfhc/image_io.hpp"

namespace lfhc {

LightField::LightField(int rows, int cols, std::vector<Image> views)
    : rows_(rows), cols_(cols), views_(std::move(views)) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("light field grid must be non-empty");
  if (views_.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument("light field needs " + std::to_string(rows * cols) + " views, got " +
                          std::to_string(views_.size()));
  }
  height_ = views_.front().height();
  width_ = views_.front().width();
  for (std::size_t i = 0; i < views_.size(); ++i) {
    const Image& v = views_[i];
    if (v.height() != height_ || v.width() != width_ || v.channels() != 3) {
      throw DimensionMismatch("view " + std::to_string(i) + " is " + std::to_string(v.height()) +
                              "x" + std::to_string(v.width()) + ", expected " +
                              std::to_string(height_) + "x" + std::to_string(width_));
    }
    for (double s : v.data()) {
      if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
        throw InvalidArgument("view " + std::to_string(i) + " has samples outside [0,1]");
      }
    }
  }
}

const Image& LightField::view(int row, int col) const {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
    throw InvalidArgument("view index out of range");
  }
  return views_[static_cast<std::size_t>(row) * cols_ + col];
}

const Image& LightField::view(ViewCoord c) const { return view(c.s + rows_ / 2, c.t + cols_ / 2); }

Image& LightField::mutable_view(ViewCoord c) {
  if (!contains(c)) throw InvalidArgument("view coordinate out of range");
  return views_[static_cast<std::size_t>(c.s + rows_ / 2) * cols_ + (c.t + cols_ / 2)];
}

bool LightField::contains(ViewCoord c) const {
  int r = c.s + rows_ / 2;
  int k = c.t + cols_ / 2;
  return r >= 0 && r < rows_ && k >= 0 && k < cols_;
}

std::string view_filename(int row, int col) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "view_%02d_%02d.png", row, col);
  return buf;
}

LightField load_lightfield(const std::filesystem::path& dir, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw InvalidArgument("grid size must be positive");
  std::vector<Image> views;
  views.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      auto path = dir / view_filename(r, c);
      if (!std::filesystem::exists(path)) throw MissingView(r, c, path.string());
      Image img = read_png(path);
      if (!views.empty() && (img.height() != views.front().height() ||
                             img.width() != views.front().width())) {
        throw DimensionMismatch(path.string() + " is " + std::to_string(img.height()) + "x" +
                                std::to_string(img.width()) + ", expected " +
                                std::to_string(views.front().height()) + "x" +
                                std::to_string(views.front().width()));
      }
      views.push_back(std::move(img));
    }
  }
  return LightField(rows, cols, std::move(views));
}

void save_lightfield(const LightField& lf, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (int r = 0; r < lf.rows(); ++r) {
    for (int c = 0; c < lf.cols(); ++c) write_png(lf.view(r, c), dir / view_filename(r, c));
  }
}

LightField crop_inner_grid(const LightField& lf, int inner) {
  if (inner <= 0 || inner % 2 == 0) throw InvalidArgument("inner grid size must be odd");
  if (lf.rows() % 2 == 0 || lf.cols() % 2 == 0) {
    throw InvalidArgument("cropping needs an odd-sized grid with a shared center view");
  }
  if (inner > lf.rows() || inner > lf.cols()) {
    throw InvalidArgument("inner grid " + std::to_string(inner) + " exceeds " +
                          std::to_string(lf.rows()) + "x" + std::to_string(lf.cols()));
  }
  int r0 = (lf.rows() - inner) / 2;
  int c0 = (lf.cols() - inner) / 2;
  std::vector<Image> views;
  views.reserve(static_cast<std::size_t>(inner) * inner);
  for (int r = 0; r < inner; ++r) {
    for (int c = 0; c < inner; ++c) views.push_back(lf.view(r0 + r, c0 + c));
  }
  return LightField(inner, inner, std::move(views));
}

}  // namespace lfhc
