#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfhc/image.hpp"

namespace lfhc {

enum class CodecBackend : std::uint8_t { Baseline = 0, External = 1 };

struct CodecConfig {
  CodecBackend backend = CodecBackend::Baseline;
  int qp = 14;
  /// External backend only. Template with {w} {h} {n} {qp} {mode} substitutions; receives
  /// planar 8-bit YUV on stdin and writes the coded bytes to stdout.
  std::optional<std::string> external_cmd;
  /// Optional separate decoder template. Defaults to external_cmd with {mode}=decode.
  std::optional<std::string> external_decode_cmd;

  /// Throws InvalidArgument if qp is out of range or the external command is missing/present
  /// for the wrong backend.
  void validate() const;
};

/// Coded frame sequence. `bytes` is the full LFC1 payload, header included.
struct CodedPayload {
  std::vector<std::uint8_t> bytes;
  int frame_count = 0;
  int width = 0;
  int height = 0;
  bool is_residual = false;
  CodecBackend backend = CodecBackend::Baseline;
  int qp = 0;

  friend bool operator==(const CodedPayload&, const CodedPayload&) = default;
};

inline constexpr int kMaxQp = 51;

/// Quantizer step in 8-bit sample units: 2^((qp - 4) / 6). qp = 0 is the lossless escape.
double quantizer_step(int qp);

/// Frames must be non-empty, share one shape, and hold samples in [0, 1].
CodedPayload encode_frames(std::span<const Image> frames, const CodecConfig& cfg, bool is_residual);

/// Parses and decodes an LFC1 payload. Malformed input raises DecodeError.
std::vector<Image> decode_frames(std::span<const std::uint8_t> bytes, const CodecConfig& cfg);
std::vector<Image> decode_frames(const CodedPayload& payload, const CodecConfig& cfg);

/// Reads only the payload header.
CodedPayload parse_payload_header(std::span<const std::uint8_t> bytes);

/// Residual r in [-1, 1] <-> (r + 1) / 2 in [0, 1].
Image map_residual(const Image& residual);
Image unmap_residual(const Image& mapped);

}  // namespace lfhc
