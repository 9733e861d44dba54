#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfhc/bitstream.hpp"
#include "lfhc/bksvd.hpp"
#include "lfhc/codec.hpp"
#include "lfhc/fdl.hpp"
#include "lfhc/layers.hpp"
#include "lfhc/lightfield.hpp"
#include "lfhc/metrics.hpp"
#include "lfhc/scan_order.hpp"

namespace lfhc {

struct EncodeConfig {
  ScanKind scan_order = ScanKind::C2;
  /// BK-SVD rank; overrides bk_params.rank. Clamped per subset to the stacked matrix shape.
  int rank = 8;
  /// Codec qp for both stages; overrides codec.qp.
  int qp = 14;
  LayerOptOptions layer_opts;
  BkSvdParams bk_params;
  FdlFitParams fdl_params;
  CodecConfig codec;
  bool emit_stage1 = false;

  /// Checks the settings against the light field shape.
  void validate(const LightField& lf) const;
};

struct SubsetReport {
  std::vector<ViewCoord> views;
  /// Bytes of this subset's transmitted payload.
  std::size_t bytes = 0;
  /// Bytes of the three coded layers of this subset (transmitted only with emit_stage1).
  std::size_t stage1_bytes = 0;
  /// PSNR of each decoded view against the original, in subset order.
  std::vector<double> view_psnr;
  YuvPsnr yuv;
};

struct EncodeReport {
  std::vector<SubsetReport> subsets;
  /// Sum of all payload sizes in the container.
  std::size_t payload_bytes = 0;
  /// Serialized container size.
  std::size_t container_bytes = 0;
  FdlCalibration calibration;
  /// Stage-I output: views rendered from the decoded low-rank layers.
  LightField approximated;
  /// The encoder's in-loop reconstruction, which the decoder reproduces exactly.
  LightField reconstruction;
  YuvPsnr yuv;
};

struct EncodeResult {
  Bitstream bitstream;
  EncodeReport report;
};

/// Stage-I layer optimization, one stack per subset of `order`.
std::vector<LayerStack> optimize_subset_layers(const LightField& lf, const ScanOrder& order,
                                               const LayerOptOptions& opts);

/// Full encode of a 9 x 9 light field.
EncodeResult encode(const LightField& lf, const EncodeConfig& cfg);

/// Encode reusing already optimized layers (one per subset, as from optimize_subset_layers).
EncodeResult encode_with_layers(const LightField& lf, const EncodeConfig& cfg, std::span<const LayerStack> layers);

/// `hints` supplies the external command when payloads use the external backend; its qp is unused.
LightField decode(const Bitstream& bs, const CodecConfig& hints = {});
LightField decode(std::span<const std::uint8_t> bytes, const CodecConfig& hints = {});

/// Encodes and decodes every (rank, qp) point. Each point contributes one row per subset and
/// a subset-0 row for the whole light field whose byte count is the container size.
std::vector<RdRow> rd_sweep(const LightField& lf, std::span<const int> ranks, std::span<const int> qps,
                            const EncodeConfig& base);

}  // namespace lfhc
