#pragma once

#include <cstdint>
#include <string>

#include "lfhc/image.hpp"
#include "lfhc/layers.hpp"
#include "lfhc/lightfield.hpp"

namespace lfhc {

enum class SceneKind { Constant, TexturedPlane, TwoPlane, FromLayerStack };

struct SyntheticSceneSpec {
  SceneKind kind = SceneKind::Constant;
  double value = 0.5;            // Constant
  double disparity = 0.0;        // TexturedPlane
  double near_disparity = 2.0;   // TwoPlane foreground
  double far_disparity = 0.0;    // TwoPlane background
  std::uint64_t rng_seed = 1;
};

/// Smooth periodic texture: sum of 8 random-phase sinusoids per channel, range [0.1, 0.9].
Image band_limited_texture(int height, int width, std::uint64_t seed);

/// Same texture sampled at (y + dy, x + dx); periodic, exact for any real offset.
Image band_limited_texture(int height, int width, std::uint64_t seed, double dy, double dx);

/// Random stack with smooth transmittance in [0.35, 1] for S x T views of H x W.
LayerStack random_layer_stack(int height, int width, int pad, std::uint64_t seed);

/// Builds an S x T light field. View (s, t) samples each scene plane of disparity d at
/// (y + s*d, x + t*d), wrapping periodically.
LightField generate(const SyntheticSceneSpec& spec, int rows, int cols, int height, int width);

/// Parses "constant:0.5", "plane:1.5", "two-plane:0,2", "layers" with an optional "@seed" suffix.
SyntheticSceneSpec parse_scene_spec(const std::string& text);

}  // namespace lfhc
