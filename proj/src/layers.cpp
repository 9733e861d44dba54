#include "lfhc/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfhc/errors.hpp"
#include "lfhc/image_io.hpp"
#include "lfhc/rng.hpp"

namespace lfhc {

LayerStack::LayerStack(std::array<Image, 3> layers, int pad) : layers_(std::move(layers)), pad_(pad) {
  if (pad < 0) throw InvalidArgument("layer pad must be non-negative");
  const Image& ref = layers_[0];
  if (ref.channels() != 3 || ref.height() <= 2 * pad || ref.width() <= 2 * pad) {
    throw InvalidArgument("layer dimensions too small for pad " + std::to_string(pad));
  }
  for (const Image& l : layers_) {
    if (!l.same_shape(ref)) throw DimensionMismatch("layers of a stack must share one shape");
    for (double v : l.data()) {
      if (!(v >= kTransmittanceFloor && v <= 1.0)) {
        throw InvalidArgument("transmittance outside [1e-4, 1]");
      }
    }
  }
}

LayerStack make_clamped_stack(std::array<Image, 3> layers, int pad) {
  for (Image& l : layers) {
    for (double& v : l.data()) {
      v = std::isnan(v) ? kTransmittanceFloor : std::clamp(v, kTransmittanceFloor, 1.0);
    }
  }
  return LayerStack(std::move(layers), pad);
}

int required_pad(std::span<const ViewCoord> coords) {
  int p = 0;
  for (ViewCoord c : coords) p = std::max(p, chebyshev_radius(c));
  return p;
}

Image render_view(const LayerStack& stack, ViewCoord coord) {
  if (chebyshev_radius(coord) > stack.pad()) {
    throw InvalidArgument("view (" + std::to_string(coord.s) + "," + std::to_string(coord.t) +
                          ") exceeds layer pad " + std::to_string(stack.pad()));
  }
  const int h = stack.view_height();
  const int w = stack.view_width();
  const int pad = stack.pad();
  Image out(h, w, 3, 1.0);
  for (int l = 0; l < 3; ++l) {
    const int dx = kLayerDisparities[l];
    const Image& layer = stack.layer(l);
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          out.at(c, y, x) *= layer.at(c, y + pad + dx * coord.s, x + pad + dx * coord.t);
        }
      }
    }
  }
  return out;
}

std::vector<Image> reconstruct_subset(const LayerStack& stack, std::span<const ViewCoord> coords) {
  std::vector<Image> out;
  out.reserve(coords.size());
  for (ViewCoord c : coords) out.push_back(render_view(stack, c));
  return out;
}

namespace {

// Log-domain state of the three padded layers: planes[l * 3 + c] has padded_h * padded_w samples.
struct LogLayers {
  int ph = 0;
  int pw = 0;
  std::vector<std::vector<double>> planes;
};

class LayerObjective {
 public:
  LayerObjective(std::span<const CodedView> views, int pad)
      : views_(views), pad_(pad), h_(views.front().image.height()), w_(views.front().image.width()) {}

  // Objective at `a`. When `grad` is non-null also fills the gradient and Gauss-Newton diagonal.
  double evaluate(const LogLayers& a, LogLayers* grad, LogLayers* curv) const {
    if (grad) zero(*grad, a);
    if (curv) zero(*curv, a);
    const int pw = a.pw;
    double total = 0.0;
    std::vector<double> row_log(w_);
    std::vector<double> row_res(w_);
    std::vector<double> row_lm(w_);
    for (const CodedView& v : views_) {
      std::array<std::ptrdiff_t, 3> shift{};
      for (int l = 0; l < 3; ++l) {
        shift[l] = static_cast<std::ptrdiff_t>(pad_ + kLayerDisparities[l] * v.coord.s) * pw +
                   (pad_ + kLayerDisparities[l] * v.coord.t);
      }
      for (int c = 0; c < 3; ++c) {
        const double* target = v.image.plane(c);
        for (int y = 0; y < h_; ++y) {
          const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(y) * pw;
          const double* p0 = a.planes[0 * 3 + c].data() + row + shift[0];
          const double* p1 = a.planes[1 * 3 + c].data() + row + shift[1];
          const double* p2 = a.planes[2 * 3 + c].data() + row + shift[2];
          for (int x = 0; x < w_; ++x) row_log[x] = p0[x] + p1[x] + p2[x];
          const double* tr = target + static_cast<std::size_t>(y) * w_;
          for (int x = 0; x < w_; ++x) {
            double lm = std::exp(row_log[x]);
            double r = lm - tr[x];
            row_lm[x] = lm;
            row_res[x] = r;
            total += r * r;
          }
          if (!grad) continue;
          for (int l = 0; l < 3; ++l) {
            double* g = grad->planes[l * 3 + c].data() + row + shift[l];
            double* k = curv->planes[l * 3 + c].data() + row + shift[l];
            for (int x = 0; x < w_; ++x) {
              g[x] += 2.0 * row_res[x] * row_lm[x];
              k[x] += 2.0 * row_lm[x] * row_lm[x];
            }
          }
        }
      }
    }
    return total;
  }

 private:
  static void zero(LogLayers& out, const LogLayers& like) {
    out.ph = like.ph;
    out.pw = like.pw;
    out.planes.resize(like.planes.size());
    for (std::size_t i = 0; i < like.planes.size(); ++i) out.planes[i].assign(like.planes[i].size(), 0.0);
  }

  std::span<const CodedView> views_;
  int pad_;
  int h_;
  int w_;
};

void check_views(std::span<const CodedView> views) {
  if (views.empty()) throw EmptyInput("optimize_layers needs at least one view");
  const Image& ref = views.front().image;
  for (const CodedView& v : views) {
    if (!v.image.same_shape(ref) || v.image.channels() != 3) {
      throw DimensionMismatch("subset views must share one 3-channel shape");
    }
    for (double s : v.image.data()) {
      if (!std::isfinite(s)) throw NonFiniteInput("view sample");
    }
  }
}

// Mean view, edge-extended into the padded extent, then cube-rooted. The noise field is
// mirror-symmetric about the vertical axis so a horizontally mirrored problem starts from the
// mirrored initial state.
LogLayers initial_layers(std::span<const CodedView> views, int pad, std::uint64_t seed) {
  const int h = views.front().image.height();
  const int w = views.front().image.width();
  LogLayers a;
  a.ph = h + 2 * pad;
  a.pw = w + 2 * pad;
  Image mean(h, w, 3, 0.0);
  for (const CodedView& v : views) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean.data()[i] += v.image.data()[i];
  }
  for (double& m : mean.data()) m /= static_cast<double>(views.size());

  CounterRng rng(seed);
  a.planes.resize(9);
  for (int l = 0; l < 3; ++l) {
    CounterRng layer_rng = rng.child(static_cast<std::uint64_t>(l));
    for (int c = 0; c < 3; ++c) {
      auto& plane = a.planes[l * 3 + c];
      plane.resize(static_cast<std::size_t>(a.ph) * a.pw);
      for (int y = 0; y < a.ph; ++y) {
        int sy = std::clamp(y - pad, 0, h - 1);
        for (int x = 0; x < a.pw; ++x) {
          int sx = std::clamp(x - pad, 0, w - 1);
          int mx = std::min(x, a.pw - 1 - x);
          std::uint64_t counter = (static_cast<std::uint64_t>(c) * a.ph + y) * a.pw + mx;
          double noise = 0.02 * layer_rng.uniform(counter) - 0.01;
          double t = std::cbrt(std::max(mean.at(c, sy, sx), 0.0)) + noise;
          plane[static_cast<std::size_t>(y) * a.pw + x] =
              std::log(std::clamp(t, kTransmittanceFloor, 1.0));
        }
      }
    }
  }
  return a;
}

}  // namespace

LayerOptResult optimize_layers_detailed(std::span<const CodedView> views, const LayerOptOptions& opts) {
  check_views(views);
  if (opts.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(opts.rel_tol > 0.0)) throw InvalidArgument("rel_tol must be positive");
  if (!(opts.step_size > 0.0)) throw InvalidArgument("step_size must be positive");

  std::vector<ViewCoord> coords;
  for (const CodedView& v : views) coords.push_back(v.coord);
  const int pad = required_pad(coords);
  const double log_floor = std::log(kTransmittanceFloor);

  LayerObjective objective(views, pad);
  LogLayers a = initial_layers(views, pad, opts.rng_seed);
  LogLayers grad, curv, trial, trial_grad, trial_curv;
  double f = objective.evaluate(a, &grad, &curv);

  LayerOptResult result;
  result.objective_history.push_back(f);
  double step = opts.step_size;
  constexpr double kMaxStep = 1.0;
  constexpr double kMinStep = 1e-12;
  // Damping keeps the scaled step finite where a layer pixel is nearly dark in every view.
  const double damping = 1e-9;

  int iter = 0;
  while (iter < opts.max_iters && f > 0.0) {
    ++iter;
    bool accepted = false;
    double f_trial = f;
    while (step >= kMinStep) {
      trial = a;
      for (std::size_t p = 0; p < a.planes.size(); ++p) {
        const auto& g = grad.planes[p];
        const auto& k = curv.planes[p];
        auto& t = trial.planes[p];
        for (std::size_t i = 0; i < t.size(); ++i) {
          t[i] = std::clamp(t[i] - step * g[i] / (k[i] + damping), log_floor, 0.0);
        }
      }
      f_trial = objective.evaluate(trial, &trial_grad, &trial_curv);
      if (f_trial <= f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      result.converged = true;
      break;
    }
    const double decrease = (f - f_trial) / f;
    std::swap(a, trial);
    std::swap(grad, trial_grad);
    std::swap(curv, trial_curv);
    f = f_trial;
    result.objective_history.push_back(f);
    step = std::min(step * 1.5, kMaxStep);
    if (decrease < opts.rel_tol) {
      result.converged = true;
      break;
    }
  }
  if (f == 0.0) result.converged = true;
  result.iterations = iter;

  std::array<Image, 3> layers;
  for (int l = 0; l < 3; ++l) {
    layers[l] = Image(a.ph, a.pw, 3);
    for (int c = 0; c < 3; ++c) {
      const auto& plane = a.planes[l * 3 + c];
      double* dst = layers[l].plane(c);
      for (std::size_t i = 0; i < plane.size(); ++i) dst[i] = std::exp(plane[i]);
    }
  }
  result.stack = make_clamped_stack(std::move(layers), pad);
  return result;
}

LayerStack optimize_layers(std::span<const CodedView> views, const LayerOptOptions& opts) {
  return optimize_layers_detailed(views, opts).stack;
}

void dump_layers_png(const LayerStack& stack, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_png(stack.layer(0), dir / "layer_m1.png");
  write_png(stack.layer(1), dir / "layer_0.png");
  write_png(stack.layer(2), dir / "layer_p1.png");
}

}  // namespace lfhc
