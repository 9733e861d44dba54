#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lfhc/image.hpp"

namespace lfhc {

inline constexpr double kTransmittanceFloor = 1e-4;
inline constexpr std::array<int, 3> kLayerDisparities = {-1, 0, 1};

/// Three RGB transmittance layers at disparities -1, 0, +1. Each layer is padded by `pad`
/// pixels on every side of the H x W view extent so that shifted lookups stay in range.
class LayerStack {
 public:
  LayerStack() = default;
  /// Throws on shape disagreement or samples outside [kTransmittanceFloor, 1].
  LayerStack(std::array<Image, 3> layers, int pad);

  int pad() const { return pad_; }
  int padded_height() const { return layers_[0].height(); }
  int padded_width() const { return layers_[0].width(); }
  int view_height() const { return padded_height() - 2 * pad_; }
  int view_width() const { return padded_width() - 2 * pad_; }

  /// index 0 -> disparity -1, 1 -> 0, 2 -> +1.
  const Image& layer(int index) const { return layers_.at(index); }
  const std::array<Image, 3>& layers() const { return layers_; }

  friend bool operator==(const LayerStack&, const LayerStack&) = default;

 private:
  std::array<Image, 3> layers_;
  int pad_ = 0;
};

/// Clamps every sample into [kTransmittanceFloor, 1] and builds a stack.
LayerStack make_clamped_stack(std::array<Image, 3> layers, int pad);

struct LayerOptOptions {
  int max_iters = 2000;
  double step_size = 0.1;
  double rel_tol = 1e-6;
  std::uint64_t rng_seed = 0;
};

struct LayerOptResult {
  LayerStack stack;
  /// Objective after initialization, then after every accepted step.
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes sum over views and pixels of (L - L_m)^2, where L_m is the product of the
/// three shifted layers. Works on log-transmittance with a diagonal Gauss-Newton scaling,
/// halving the step whenever the objective would increase.
LayerOptResult optimize_layers_detailed(std::span<const CodedView> views, const LayerOptOptions& opts);

LayerStack optimize_layers(std::span<const CodedView> views, const LayerOptOptions& opts = {});

/// View (s, t): product over layers x of T_x(u + x*s, v + x*t), cropped to H x W.
Image render_view(const LayerStack& stack, ViewCoord coord);

std::vector<Image> reconstruct_subset(const LayerStack& stack, std::span<const ViewCoord> coords);

/// Pad needed so every coordinate in `coords` can be rendered.
int required_pad(std::span<const ViewCoord> coords);

/// Writes layer_m1.png, layer_0.png, layer_p1.png into `dir`.
void dump_layers_png(const LayerStack& stack, const std::filesystem::path& dir);

}  // namespace lfhc
