#include "lfhc/bitstream.hpp"

#include "lfhc/byte_io.hpp"
#include "lfhc/errors.hpp"

namespace lfhc {

namespace {
constexpr char kMagic[5] = "LFHC";
constexpr std::uint8_t kFlagStage1 = 0x01;
}  // namespace

std::size_t expected_payload_count(const ContainerHeader& header) {
  const std::size_t subsets = partition_views(header.rows, header.order).subsets.size();
  return header.emit_stage1 ? 4 * subsets : subsets;
}

std::vector<std::uint8_t> serialize(const Bitstream& bs) {
  const ContainerHeader& h = bs.header;
  auto fits16 = [](int v) { return v >= 0 && v <= 0xffff; };
  if (!fits16(h.rank) || !fits16(h.rows) || !fits16(h.cols) || !fits16(h.height) || !fits16(h.width) ||
      h.qp < 0 || h.qp > 0xff) {
    throw InvalidArgument("container header field out of range");
  }
  ByteWriter out;
  out.tag(kMagic);
  out.u16(h.version);
  out.u8(static_cast<std::uint8_t>(h.order));
  out.u16(static_cast<std::uint16_t>(h.rank));
  out.u8(static_cast<std::uint8_t>(h.qp));
  out.u16(static_cast<std::uint16_t>(h.rows));
  out.u16(static_cast<std::uint16_t>(h.cols));
  out.u16(static_cast<std::uint16_t>(h.height));
  out.u16(static_cast<std::uint16_t>(h.width));
  out.u8(h.emit_stage1 ? kFlagStage1 : 0);
  out.u32(static_cast<std::uint32_t>(bs.metadata.size()));
  out.bytes(bs.metadata);
  out.u32(static_cast<std::uint32_t>(bs.payloads.size()));
  for (const auto& p : bs.payloads) {
    out.u32(static_cast<std::uint32_t>(p.size()));
    out.bytes(p);
  }
  return out.take();
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes);
  Bitstream bs;
  ContainerHeader& h = bs.header;
  rd.expect_tag(kMagic);

  std::size_t at = rd.offset();
  h.version = rd.u16();
  if (h.version != kContainerVersion) throw DecodeError(at, "unsupported container version " + std::to_string(h.version));
  at = rd.offset();
  std::uint8_t order = rd.u8();
  if (order > static_cast<std::uint8_t>(ScanKind::H4)) throw DecodeError(at, "unknown scan order");
  h.order = static_cast<ScanKind>(order);
  at = rd.offset();
  h.rank = rd.u16();
  if (h.rank == 0) throw DecodeError(at, "rank must be positive");
  at = rd.offset();
  h.qp = rd.u8();
  if (h.qp > 51) throw DecodeError(at, "qp out of range");
  at = rd.offset();
  h.rows = rd.u16();
  h.cols = rd.u16();
  if (h.rows != h.cols) throw DecodeError(at, "angular grid must be square");
  at = rd.offset();
  h.height = rd.u16();
  h.width = rd.u16();
  if (h.height == 0 || h.width == 0) throw DecodeError(at, "empty view dimensions");
  at = rd.offset();
  std::uint8_t flags = rd.u8();
  if (flags & ~kFlagStage1) throw DecodeError(at, "unknown flag bits");
  h.emit_stage1 = (flags & kFlagStage1) != 0;

  std::size_t expected = 0;
  try {
    expected = expected_payload_count(h);
  } catch (const UnsupportedGrid&) {
    throw DecodeError(at, "no scan order tables for the declared grid");
  }

  std::uint32_t meta_len = rd.u32();
  auto meta = rd.bytes(meta_len, "metadata");
  bs.metadata.assign(meta.begin(), meta.end());

  at = rd.offset();
  std::uint32_t count = rd.u32();
  if (count != expected) throw PayloadCountMismatch(at, expected, count);
  bs.payloads.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t len = rd.u32();
    auto p = rd.bytes(len, "payload");
    bs.payloads.emplace_back(p.begin(), p.end());
  }
  if (rd.remaining() != 0) throw DecodeError(rd.offset(), "trailing bytes after the last payload");
  return bs;
}

}  // namespace lfhc
