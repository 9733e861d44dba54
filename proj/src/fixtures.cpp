#include "lfhc/fixtures.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "lfhc/errors.hpp"
#include "lfhc/rng.hpp"

namespace lfhc {

namespace {

constexpr int kSinusoids = 8;

struct Sinusoid {
  int ky;
  int kx;
  double amplitude;
  double phase;
};

using TextureSpec = std::array<std::array<Sinusoid, kSinusoids>, 3>;

TextureSpec texture_spec(int height, int width, std::uint64_t seed) {
  const int kmax = std::max(2, std::min(height, width) / 16);
  CounterRng rng(seed);
  TextureSpec spec{};
  for (int c = 0; c < 3; ++c) {
    CounterRng ch = rng.child(static_cast<std::uint64_t>(c));
    for (int i = 0; i < kSinusoids; ++i) {
      std::uint64_t base = static_cast<std::uint64_t>(i) * 8;
      int ky = 0, kx = 0;
      std::uint64_t attempt = 0;
      while (ky == 0 && kx == 0) {
        ky = static_cast<int>(ch.bits(base + attempt) % (2 * kmax + 1)) - kmax;
        kx = static_cast<int>(ch.bits(base + attempt + 1) % (2 * kmax + 1)) - kmax;
        attempt += 2;
      }
      spec[c][i] = {ky, kx, 0.4 / kSinusoids, 2.0 * std::numbers::pi * ch.uniform(base + 7)};
    }
  }
  return spec;
}

double texture_at(const std::array<Sinusoid, kSinusoids>& waves, int height, int width, double y,
                  double x) {
  double v = 0.5;
  for (const Sinusoid& w : waves) {
    v += w.amplitude *
         std::cos(2.0 * std::numbers::pi * (w.ky * y / height + w.kx * x / width) + w.phase);
  }
  return v;
}

// Soft-edged disk alpha, periodic in both axes.
double disk_alpha(int height, int width, double y, double x) {
  auto wrap = [](double v, int n) {
    double r = std::fmod(v, static_cast<double>(n));
    if (r < 0) r += n;
    return r;
  };
  double dy = wrap(y, height) - height / 2.0;
  double dx = wrap(x, width) - width / 2.0;
  double radius = std::min(height, width) / 4.0;
  double dist = std::sqrt(dy * dy + dx * dx);
  return std::clamp(radius + 0.5 - dist, 0.0, 1.0);
}

}  // namespace

Image band_limited_texture(int height, int width, std::uint64_t seed, double dy, double dx) {
  TextureSpec spec = texture_spec(height, width, seed);
  Image img(height, width, 3);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) img.at(c, y, x) = texture_at(spec[c], height, width, y + dy, x + dx);
    }
  }
  return img;
}

Image band_limited_texture(int height, int width, std::uint64_t seed) {
  return band_limited_texture(height, width, seed, 0.0, 0.0);
}

LayerStack random_layer_stack(int height, int width, int pad, std::uint64_t seed) {
  std::array<Image, 3> layers;
  for (int l = 0; l < 3; ++l) {
    // Texture range [0.1, 0.9] maps onto [0.35, 1].
    Image t = band_limited_texture(height + 2 * pad, width + 2 * pad,
                                   CounterRng(seed).bits(static_cast<std::uint64_t>(l)));
    for (double& v : t.data()) v = 0.35 + (v - 0.1) * (0.65 / 0.8);
    layers[l] = std::move(t);
  }
  return make_clamped_stack(std::move(layers), pad);
}

LightField generate(const SyntheticSceneSpec& spec, int rows, int cols, int height, int width) {
  if (rows <= 0 || cols <= 0 || height <= 0 || width <= 0) {
    throw InvalidArgument("light field dimensions must be positive");
  }
  const int hs = rows / 2;
  const int ht = cols / 2;
  auto check_disparity = [&](double d) {
    if (std::abs(d) * std::max(hs, ht) > std::min(height, width)) {
      throw InvalidArgument("disparity exceeds the view extent");
    }
  };

  std::vector<Image> views;
  views.reserve(static_cast<std::size_t>(rows) * cols);
  switch (spec.kind) {
    case SceneKind::Constant: {
      if (!(spec.value >= 0.0 && spec.value <= 1.0)) throw InvalidArgument("constant outside [0,1]");
      for (int i = 0; i < rows * cols; ++i) views.emplace_back(height, width, 3, spec.value);
      break;
    }
    case SceneKind::TexturedPlane: {
      check_disparity(spec.disparity);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          views.push_back(band_limited_texture(height, width, spec.rng_seed, (r - hs) * spec.disparity,
                                               (c - ht) * spec.disparity));
        }
      }
      break;
    }
    case SceneKind::TwoPlane: {
      check_disparity(spec.near_disparity);
      check_disparity(spec.far_disparity);
      TextureSpec near_tex = texture_spec(height, width, spec.rng_seed);
      TextureSpec far_tex = texture_spec(height, width, CounterRng(spec.rng_seed).bits(1));
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          const int s = r - hs, t = c - ht;
          Image v(height, width, 3);
          for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
              double ny = y + s * spec.near_disparity, nx = x + t * spec.near_disparity;
              double fy = y + s * spec.far_disparity, fx = x + t * spec.far_disparity;
              double alpha = disk_alpha(height, width, ny, nx);
              for (int ch = 0; ch < 3; ++ch) {
                v.at(ch, y, x) = alpha * texture_at(near_tex[ch], height, width, ny, nx) +
                                 (1.0 - alpha) * texture_at(far_tex[ch], height, width, fy, fx);
              }
            }
          }
          views.push_back(std::move(v));
        }
      }
      break;
    }
    case SceneKind::FromLayerStack: {
      const int pad = std::max(hs, ht);
      LayerStack stack = random_layer_stack(height, width, pad, spec.rng_seed);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) views.push_back(render_view(stack, {r - hs, c - ht}));
      }
      break;
    }
  }
  return LightField(rows, cols, std::move(views));
}

SyntheticSceneSpec parse_scene_spec(const std::string& text) {
  SyntheticSceneSpec spec;
  std::string body = text;
  if (auto at = body.find('@'); at != std::string::npos) {
    spec.rng_seed = std::stoull(body.substr(at + 1));
    body = body.substr(0, at);
  }
  std::string kind = body;
  std::string args;
  if (auto colon = body.find(':'); colon != std::string::npos) {
    kind = body.substr(0, colon);
    args = body.substr(colon + 1);
  }
  try {
    if (kind == "constant") {
      spec.kind = SceneKind::Constant;
      if (!args.empty()) spec.value = std::stod(args);
    } else if (kind == "plane") {
      spec.kind = SceneKind::TexturedPlane;
      if (!args.empty()) spec.disparity = std::stod(args);
    } else if (kind == "two-plane") {
      spec.kind = SceneKind::TwoPlane;
      if (!args.empty()) {
        auto comma = args.find(',');
        if (comma == std::string::npos) throw InvalidArgument("two-plane needs 'far,near'");
        spec.far_disparity = std::stod(args.substr(0, comma));
        spec.near_disparity = std::stod(args.substr(comma + 1));
      }
    } else if (kind == "layers") {
      spec.kind = SceneKind::FromLayerStack;
    } else {
      throw InvalidArgument("unknown scene kind '" + kind + "'");
    }
  } catch (const std::logic_error&) {
    throw InvalidArgument("malformed scene spec '" + text + "'");
  }
  return spec;
}

}  // namespace lfhc
