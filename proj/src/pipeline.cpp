#include "lfhc/pipeline.hpp"

#include <algorithm>
#include <map>

#include "lfhc/byte_io.hpp"
#include "lfhc/errors.hpp"

namespace lfhc {

namespace {

std::vector<AngularPosition> positions_for(const std::vector<AngularPosition>& grid_positions, int cols,
                                           int rows, std::span<const ViewCoord> coords) {
  std::vector<AngularPosition> out;
  out.reserve(coords.size());
  for (ViewCoord c : coords) {
    const int row = c.s + rows / 2;
    const int col = c.t + cols / 2;
    out.push_back(grid_positions[static_cast<std::size_t>(row) * cols + col]);
  }
  return out;
}

std::vector<Image> gather(const LightField& lf, std::span<const ViewCoord> coords) {
  std::vector<Image> out;
  out.reserve(coords.size());
  for (ViewCoord c : coords) out.push_back(lf.view(c));
  return out;
}

std::vector<Image> blank_views(int rows, int cols, int h, int w) {
  return std::vector<Image>(static_cast<std::size_t>(rows) * cols, Image(h, w, 3));
}

void place(std::vector<Image>& grid, int rows, int cols, ViewCoord c, Image img) {
  grid[static_cast<std::size_t>(c.s + rows / 2) * cols + (c.t + cols / 2)] = std::move(img);
}

void clamp01(Image& img) {
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
}

// Shared Stage-II loop. `code` maps (subset index, frames, is_residual) to decoded frames,
// so the encoder codes and decodes in-loop while the decoder only decodes.
template <typename Code>
std::vector<Image> hierarchical_loop(const ScanOrder& order, int rows, int cols, int h, int w,
                                     const std::vector<double>& disparities,
                                     const std::vector<AngularPosition>& grid_positions, double lambda,
                                     int window_px, const LightField* target, Code&& code) {
  std::vector<Image> recon = blank_views(rows, cols, h, w);
  const auto& first = order.subsets.front();
  std::vector<Image> decoded = code(0, target ? gather(*target, first) : std::vector<Image>{}, false);
  FdlModel model = fit_fdl(decoded, disparities, positions_for(grid_positions, cols, rows, first), lambda, window_px);
  for (std::size_t i = 0; i < first.size(); ++i) place(recon, rows, cols, first[i], std::move(decoded[i]));

  for (std::size_t si = 1; si < order.subsets.size(); ++si) {
    const auto& subset = order.subsets[si];
    std::vector<AngularPosition> pos = positions_for(grid_positions, cols, rows, subset);
    std::vector<Image> predictions;
    predictions.reserve(subset.size());
    for (const AngularPosition& p : pos) predictions.push_back(synthesize_view(model, p));

    std::vector<Image> mapped;
    if (target) {
      for (std::size_t j = 0; j < subset.size(); ++j) {
        Image residual = target->view(subset[j]);
        for (std::size_t k = 0; k < residual.size(); ++k) residual.data()[k] -= predictions[j].data()[k];
        mapped.push_back(map_residual(residual));
      }
    }
    std::vector<Image> residuals = code(si, std::move(mapped), true);
    std::vector<Image> views;
    views.reserve(subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) {
      Image v = unmap_residual(residuals[j]);
      for (std::size_t k = 0; k < v.size(); ++k) v.data()[k] += predictions[j].data()[k];
      clamp01(v);
      views.push_back(std::move(v));
    }
    model = refine(model, views, pos);
    for (std::size_t j = 0; j < subset.size(); ++j) place(recon, rows, cols, subset[j], std::move(views[j]));
  }
  return recon;
}

std::vector<Image> decode_checked(std::span<const std::uint8_t> bytes, const CodecConfig& hints,
                                  std::size_t frames, int h, int w, bool residual, std::size_t index) {
  const std::string where = "payload " + std::to_string(index) + ": ";
  CodedPayload head = parse_payload_header(bytes);
  if (static_cast<std::size_t>(head.frame_count) != frames || head.height != h || head.width != w ||
      head.is_residual != residual) {
    throw DecodeError(0, where + "frame count, size or kind disagrees with the container");
  }
  std::vector<Image> out = decode_frames(bytes, hints);
  if (out.size() != frames) throw DecodeError(0, where + "decoded frame count mismatch");
  for (const Image& img : out) {
    if (img.height() != h || img.width() != w || img.channels() != 3) {
      throw DecodeError(0, where + "decoded frame shape mismatch");
    }
  }
  return out;
}

int effective_rank(int rank, const LayerStack& stack) {
  return std::min({rank, 3 * stack.padded_height(), stack.padded_width()});
}

}  // namespace

void EncodeConfig::validate(const LightField& lf) const {
  if (lf.rows() != lf.cols()) throw InvalidArgument("the angular grid must be square");
  if (lf.height() > 0xffff || lf.width() > 0xffff) throw InvalidArgument("view dimensions exceed the container");
  const int pad = lf.rows() / 2;
  if (rank < 1 || rank > 3 * (lf.height() + 2 * pad)) throw InvalidArgument("rank out of range");
  CodecConfig c = codec;
  c.qp = qp;
  c.validate();
  fdl_params.validate();
  if (fdl_params.window_px > std::min(lf.height(), lf.width())) {
    throw InvalidArgument("window_px exceeds the view dimensions");
  }
  if (layer_opts.max_iters < 1 || !(layer_opts.rel_tol > 0.0) || !(layer_opts.step_size > 0.0)) {
    throw InvalidArgument("invalid layer optimizer options");
  }
  if (!(bk_params.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
}

std::vector<LayerStack> optimize_subset_layers(const LightField& lf, const ScanOrder& order,
                                               const LayerOptOptions& opts) {
  std::vector<LayerStack> out;
  out.reserve(order.subsets.size());
  for (const auto& subset : order.subsets) {
    std::vector<CodedView> views;
    views.reserve(subset.size());
    for (ViewCoord c : subset) views.push_back({c, lf.view(c)});
    out.push_back(optimize_layers(views, opts));
  }
  return out;
}

EncodeResult encode(const LightField& lf, const EncodeConfig& cfg) {
  cfg.validate(lf);
  const ScanOrder order = partition_views(lf.rows(), cfg.scan_order);
  std::vector<LayerStack> layers = optimize_subset_layers(lf, order, cfg.layer_opts);
  return encode_with_layers(lf, cfg, layers);
}

EncodeResult encode_with_layers(const LightField& lf, const EncodeConfig& cfg, std::span<const LayerStack> layers) {
  cfg.validate(lf);
  const ScanOrder order = partition_views(lf.rows(), cfg.scan_order);
  if (layers.size() != order.subsets.size()) throw InvalidArgument("one layer stack per subset is required");
  const int rows = lf.rows();
  const int cols = lf.cols();
  const int h = lf.height();
  const int w = lf.width();
  CodecConfig codec = cfg.codec;
  codec.qp = cfg.qp;

  EncodeResult result;
  EncodeReport& report = result.report;
  report.subsets.resize(order.subsets.size());

  // Stage I: low-rank layers coded and decoded in-loop, rendered into the approximated field.
  std::vector<Image> approx = blank_views(rows, cols, h, w);
  std::vector<std::vector<std::uint8_t>> stage1_payloads;
  for (std::size_t si = 0; si < order.subsets.size(); ++si) {
    const LayerStack& stack = layers[si];
    if (stack.view_height() != h || stack.view_width() != w) {
      throw DimensionMismatch("layer stack does not match the light field");
    }
    BkSvdParams bk = cfg.bk_params;
    bk.rank = effective_rank(cfg.rank, stack);
    LayerStack low = approximate_stack(stack, bk);
    std::array<Image, 3> decoded;
    for (int l = 0; l < 3; ++l) {
      CodedPayload p = encode_frames(std::span<const Image>(&low.layer(l), 1), codec, false);
      decoded[l] = std::move(decode_frames(p, codec).front());
      report.subsets[si].stage1_bytes += p.bytes.size();
      stage1_payloads.push_back(std::move(p.bytes));
    }
    LayerStack coded = make_clamped_stack(std::move(decoded), stack.pad());
    std::vector<Image> views = reconstruct_subset(coded, order.subsets[si]);
    for (std::size_t j = 0; j < views.size(); ++j) place(approx, rows, cols, order.subsets[si][j], std::move(views[j]));
  }
  report.approximated = LightField(rows, cols, std::move(approx));

  // Stage II: calibration on the approximated field, then hierarchical prediction.
  std::vector<CodedView> all;
  all.reserve(report.approximated.view_count());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) all.push_back({report.approximated.coord_of(r, c), report.approximated.view(r, c)});
  }
  report.calibration = calibrate(all, cfg.fdl_params);

  Bitstream& bs = result.bitstream;
  bs.header.order = cfg.scan_order;
  bs.header.rank = cfg.rank;
  bs.header.qp = cfg.qp;
  bs.header.rows = rows;
  bs.header.cols = cols;
  bs.header.height = h;
  bs.header.width = w;
  bs.header.emit_stage1 = cfg.emit_stage1;
  ByteWriter meta;
  write_fdl_metadata(meta, report.calibration, cfg.fdl_params.lambda, cfg.fdl_params.window_px);
  bs.metadata = meta.take();

  auto code = [&](std::size_t si, std::vector<Image> frames, bool residual) {
    CodedPayload p = encode_frames(frames, codec, residual);
    std::vector<Image> decoded = decode_frames(p, codec);
    report.subsets[si].bytes = p.bytes.size();
    bs.payloads.push_back(std::move(p.bytes));
    return decoded;
  };
  std::vector<Image> recon =
      hierarchical_loop(order, rows, cols, h, w, report.calibration.disparities, report.calibration.positions,
                        cfg.fdl_params.lambda, cfg.fdl_params.window_px, &report.approximated, code);
  report.reconstruction = LightField(rows, cols, std::move(recon));

  if (cfg.emit_stage1) {
    for (auto& p : stage1_payloads) bs.payloads.push_back(std::move(p));
  }
  for (const auto& p : bs.payloads) report.payload_bytes += p.size();
  report.container_bytes = serialize(bs).size();

  for (std::size_t si = 0; si < order.subsets.size(); ++si) {
    SubsetReport& sr = report.subsets[si];
    sr.views = order.subsets[si];
    std::vector<Image> ref = gather(lf, sr.views);
    std::vector<Image> test = gather(report.reconstruction, sr.views);
    for (std::size_t j = 0; j < ref.size(); ++j) sr.view_psnr.push_back(psnr(ref[j], test[j]));
    sr.yuv = yuv_psnr(ref, test);
  }
  report.yuv = yuv_psnr(lf, report.reconstruction);
  return result;
}

LightField decode(const Bitstream& bs, const CodecConfig& hints) {
  const ContainerHeader& hd = bs.header;
  ScanOrder order;
  try {
    order = partition_views(hd.rows, hd.order);
  } catch (const UnsupportedGrid&) {
    throw DecodeError(0, "no scan order tables for the declared grid");
  }
  if (hd.rows != hd.cols) throw DecodeError(0, "angular grid must be square");
  const std::size_t expected = expected_payload_count(hd);
  if (bs.payloads.size() != expected) throw PayloadCountMismatch(0, expected, bs.payloads.size());
  if (hd.height <= 0 || hd.width <= 0) throw DecodeError(0, "empty view dimensions");

  ByteReader meta_reader(bs.metadata);
  FdlMetadata meta = read_fdl_metadata(meta_reader);
  if (meta_reader.remaining() != 0) throw DecodeError(meta_reader.offset(), "trailing metadata bytes");
  if (meta.positions.size() != static_cast<std::size_t>(hd.rows) * hd.cols) {
    throw DecodeError(0, "metadata position count does not match the grid");
  }
  if (meta.window_px > std::min<int>(hd.height, hd.width)) throw DecodeError(0, "window wider than the views");

  CodecConfig codec = hints;
  auto code = [&](std::size_t si, std::vector<Image>, bool residual) {
    return decode_checked(bs.payloads[si], codec, order.subsets[si].size(), hd.height, hd.width, residual, si);
  };
  std::vector<Image> recon = hierarchical_loop(order, hd.rows, hd.cols, hd.height, hd.width, meta.disparities,
                                               meta.positions, meta.lambda, meta.window_px, nullptr, code);
  return LightField(hd.rows, hd.cols, std::move(recon));
}

LightField decode(std::span<const std::uint8_t> bytes, const CodecConfig& hints) {
  return decode(parse_bitstream(bytes), hints);
}

std::vector<RdRow> rd_sweep(const LightField& lf, std::span<const int> ranks, std::span<const int> qps,
                            const EncodeConfig& base) {
  if (ranks.empty() || qps.empty()) throw EmptyInput("rd_sweep needs at least one rank and one qp");
  const ScanOrder order = partition_views(lf.rows(), base.scan_order);
  std::vector<LayerStack> layers = optimize_subset_layers(lf, order, base.layer_opts);
  std::vector<RdRow> rows;
  for (int rank : ranks) {
    for (int qp : qps) {
      EncodeConfig cfg = base;
      cfg.rank = rank;
      cfg.qp = qp;
      EncodeResult enc = encode_with_layers(lf, cfg, layers);
      LightField dec = decode(serialize(enc.bitstream), cfg.codec);
      YuvPsnr total = yuv_psnr(lf, dec);
      rows.push_back({rank, qp, 0, enc.report.container_bytes, total.y, total.u, total.v, total.combined});
      for (std::size_t si = 0; si < order.subsets.size(); ++si) {
        const auto& subset = order.subsets[si];
        YuvPsnr q = yuv_psnr(gather(lf, subset), gather(dec, subset));
        rows.push_back({rank, qp, static_cast<int>(si + 1), enc.report.subsets[si].bytes, q.y, q.u, q.v, q.combined});
      }
    }
  }
  return rows;
}

}  // namespace lfhc
