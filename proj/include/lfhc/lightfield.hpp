#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lfhc/image.hpp"

namespace lfhc {

/// Dense S x T grid of RGB views with identical H x W dimensions and samples in [0, 1].
/// Views are addressed either by zero-based grid index (row, col) or by centered ViewCoord.
class LightField {
 public:
  LightField() = default;
  /// Takes `views` in row-major grid order. Throws if the grid is incomplete, dimensions
  /// disagree, or samples are out of range.
  LightField(int rows, int cols, std::vector<Image> views);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t view_count() const { return views_.size(); }

  const Image& view(int row, int col) const;
  const Image& view(ViewCoord c) const;
  Image& mutable_view(ViewCoord c);

  ViewCoord coord_of(int row, int col) const { return {row - rows_ / 2, col - cols_ / 2}; }
  bool contains(ViewCoord c) const;

  const std::vector<Image>& views() const { return views_; }

  friend bool operator==(const LightField&, const LightField&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<Image> views_;
};

std::string view_filename(int row, int col);

/// Loads `view_{ss}_{tt}.png` files (8-bit RGB) from `dir`.
LightField load_lightfield(const std::filesystem::path& dir, int rows, int cols);

/// Writes the light field using the same naming scheme as `load_lightfield`.
void save_lightfield(const LightField& lf, const std::filesystem::path& dir);

/// Centered inner x inner sub-grid. Both `inner` and the grid sizes must be odd.
LightField crop_inner_grid(const LightField& lf, int inner);

}  // namespace lfhc
