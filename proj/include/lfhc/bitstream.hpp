#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfhc/scan_order.hpp"

namespace lfhc {

inline constexpr std::uint16_t kContainerVersion = 1;

struct ContainerHeader {
  std::uint16_t version = kContainerVersion;
  ScanKind order = ScanKind::C2;
  int rank = 0;
  int qp = 0;
  int rows = 0;
  int cols = 0;
  int height = 0;
  int width = 0;
  bool emit_stage1 = false;

  friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

/// Coded light field. `payloads` holds the subset-1 view payload, one residual payload per
/// later subset, then (with emit_stage1) three layer payloads per subset.
struct Bitstream {
  ContainerHeader header;
  std::vector<std::uint8_t> metadata;
  std::vector<std::vector<std::uint8_t>> payloads;

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

/// Payloads a well-formed container must carry for `header`.
std::size_t expected_payload_count(const ContainerHeader& header);

/// LFHC layout, little-endian: magic, u16 version, u8 order, u16 rank, u8 qp, u16 S, T, H, W,
/// u8 flags, u32 metadata length + metadata, u32 payload count, u32-length-prefixed payloads.
std::vector<std::uint8_t> serialize(const Bitstream& bs);

/// Structural parse. Every defect raises DecodeError (PayloadCountMismatch for a wrong count).
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

}  // namespace lfhc
