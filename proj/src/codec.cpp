#include "lfhc/codec.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "codec_internal.hpp"
#include "lfhc/byte_io.hpp"
#include "lfhc/errors.hpp"
#include "lfhc/image_io.hpp"

namespace lfhc {

namespace {

constexpr char kPayloadMagic[5] = "LFC1";
constexpr int kBlock = 8;
constexpr std::int64_t kMaxLevel = 1 << 16;

// HEVC 8-point core transform. Rows are scaled DCT-II basis vectors of norm ~ 2^7.5.
constexpr std::array<std::array<int, 8>, 8> kTransform = {{
    {64, 64, 64, 64, 64, 64, 64, 64},
    {89, 75, 50, 18, -18, -50, -75, -89},
    {83, 36, -36, -83, -83, -36, 36, 83},
    {75, -18, -89, -50, 50, 89, 18, -75},
    {64, -64, -64, 64, 64, -64, -64, 64},
    {50, -89, 18, 75, -75, -18, 89, -50},
    {36, -83, 83, -36, -36, 83, -83, 36},
    {18, -50, 75, -89, 89, -75, 50, -18},
}};

constexpr std::array<int, 6> kLevelScale = {40, 45, 51, 57, 64, 72};
constexpr std::array<std::int64_t, 6> kQuantScale = {26214, 23302, 20560, 18396, 16384, 14564};

constexpr std::array<int, 64> make_zigzag() {
  std::array<int, 64> order{};
  int i = 0;
  for (int d = 0; d < 2 * kBlock - 1; ++d) {
    if (d % 2 == 0) {
      for (int y = std::min(d, kBlock - 1); y >= 0 && d - y < kBlock; --y) order[i++] = y * kBlock + (d - y);
    } else {
      for (int x = std::min(d, kBlock - 1); x >= 0 && d - x < kBlock; --x) order[i++] = (d - x) * kBlock + x;
    }
  }
  return order;
}
constexpr std::array<int, 64> kZigzag = make_zigzag();

constexpr std::array<int, 64> make_raster() {
  std::array<int, 64> order{};
  for (int i = 0; i < 64; ++i) order[i] = i;
  return order;
}
constexpr std::array<int, 64> kRaster = make_raster();

using Block = std::array<std::int64_t, 64>;

class BitWriter {
 public:
  void bit(unsigned b) {
    acc_ = static_cast<std::uint8_t>((acc_ << 1) | (b & 1u));
    if (++n_ == 8) flush_byte();
  }
  void bits(std::uint64_t v, int count) {
    for (int i = count - 1; i >= 0; --i) bit(static_cast<unsigned>((v >> i) & 1u));
  }
  // Order-0 Exp-Golomb.
  void ue(std::uint64_t v) {
    std::uint64_t x = v + 1;
    int len = 0;
    while ((x >> len) > 1) ++len;
    bits(0, len);
    bits(x, len + 1);
  }
  void se(std::int64_t v) { ue(v > 0 ? 2 * static_cast<std::uint64_t>(v) - 1 : 2 * static_cast<std::uint64_t>(-v)); }
  std::vector<std::uint8_t> finish() {
    while (n_ != 0) bit(0);
    return std::move(out_);
  }

 private:
  void flush_byte() {
    out_.push_back(acc_);
    acc_ = 0;
    n_ = 0;
  }
  std::vector<std::uint8_t> out_;
  std::uint8_t acc_ = 0;
  int n_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> data, std::size_t base) : data_(data), base_(base) {}
  unsigned bit() {
    if (pos_ >= data_.size() * 8) throw DecodeError(base_ + data_.size(), "bitstream exhausted");
    unsigned b = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    ++pos_;
    return b;
  }
  std::uint64_t ue() {
    int zeros = 0;
    while (bit() == 0) {
      if (++zeros > 40) throw DecodeError(offset(), "Exp-Golomb prefix too long");
    }
    std::uint64_t v = 1;
    for (int i = 0; i < zeros; ++i) v = (v << 1) | bit();
    return v - 1;
  }
  std::int64_t se() {
    std::uint64_t k = ue();
    return (k & 1u) ? static_cast<std::int64_t>((k + 1) / 2) : -static_cast<std::int64_t>(k / 2);
  }
  std::size_t offset() const { return base_ + pos_ / 8; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

void forward_transform(const Block& in, Block& out) {
  Block tmp{};
  for (int i = 0; i < 8; ++i) {
    for (int x = 0; x < 8; ++x) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += kTransform[i][k] * in[k * 8 + x];
      tmp[i * 8 + x] = s;
    }
  }
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += tmp[i * 8 + k] * kTransform[j][k];
      out[i * 8 + j] = s;
    }
  }
}

// out = round(M^T in M / 2^shift)
void inverse_transform(const Block& in, Block& out, int shift) {
  Block tmp{};
  for (int y = 0; y < 8; ++y) {
    for (int j = 0; j < 8; ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += kTransform[k][y] * in[k * 8 + j];
      tmp[y * 8 + j] = s;
    }
  }
  const std::int64_t round = std::int64_t{1} << (shift - 1);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      std::int64_t s = 0;
      for (int k = 0; k < 8; ++k) s += tmp[y * 8 + k] * kTransform[k][x];
      out[y * 8 + x] = (s + round) >> shift;
    }
  }
}

std::int64_t quantize(std::int64_t coef, int qp) {
  const int shift = 29 + qp / 6;
  const std::int64_t mag = coef < 0 ? -coef : coef;
  const std::int64_t level = (mag * kQuantScale[qp % 6] + (std::int64_t{1} << (shift - 1))) >> shift;
  return coef < 0 ? -level : level;
}

std::int64_t dequantize(std::int64_t level, int qp) {
  return level * kLevelScale[qp % 6] * (std::int64_t{1} << (qp / 6 + 9));
}

void write_block(BitWriter& bw, const Block& levels, const std::array<int, 64>& scan,
                 std::int64_t& prev_dc) {
  bw.se(levels[scan[0]] - prev_dc);
  prev_dc = levels[scan[0]];
  int run = 0;
  for (int i = 1; i < 64; ++i) {
    std::int64_t l = levels[scan[i]];
    if (l == 0) {
      ++run;
      continue;
    }
    bw.ue(static_cast<std::uint64_t>(run) + 1);
    std::uint64_t mag = static_cast<std::uint64_t>(l < 0 ? -l : l);
    bw.ue(2 * (mag - 1) + (l < 0 ? 1 : 0));
    run = 0;
  }
  bw.ue(0);
}

void read_block(BitReader& br, Block& levels, const std::array<int, 64>& scan, std::int64_t& prev_dc) {
  levels.fill(0);
  std::int64_t dc = prev_dc + br.se();
  if (dc > kMaxLevel || dc < -kMaxLevel) throw DecodeError(br.offset(), "DC level out of range");
  levels[scan[0]] = dc;
  prev_dc = dc;
  int pos = 1;
  while (true) {
    std::uint64_t code = br.ue();
    if (code == 0) break;
    std::uint64_t run = code - 1;
    if (run >= static_cast<std::uint64_t>(64 - pos)) throw DecodeError(br.offset(), "coefficient run overflows block");
    pos += static_cast<int>(run);
    std::uint64_t v = br.ue();
    std::uint64_t mag = v / 2 + 1;
    if (mag > static_cast<std::uint64_t>(kMaxLevel)) throw DecodeError(br.offset(), "coefficient level out of range");
    levels[scan[pos]] = (v & 1u) ? -static_cast<std::int64_t>(mag) : static_cast<std::int64_t>(mag);
    ++pos;
  }
}

int padded(int v) { return (v + kBlock - 1) / kBlock * kBlock; }

std::vector<std::uint8_t> encode_frame(const Image& frame, int qp) {
  const int h = frame.height(), w = frame.width();
  const int ph = padded(h), pw = padded(w);
  BitWriter bw;
  for (int c = 0; c < 3; ++c) {
    std::int64_t prev_dc = 0;
    for (int by = 0; by < ph; by += kBlock) {
      for (int bx = 0; bx < pw; bx += kBlock) {
        Block px{};
        for (int y = 0; y < kBlock; ++y) {
          for (int x = 0; x < kBlock; ++x) {
            px[y * 8 + x] = to_u8(frame.at(c, std::min(by + y, h - 1), std::min(bx + x, w - 1)));
          }
        }
        Block levels{};
        if (qp == 0) {
          for (int y = 0; y < kBlock; ++y) {
            for (int x = 0; x < kBlock; ++x) {
              std::int64_t pred = x > 0 ? px[y * 8 + x - 1] : (y > 0 ? px[(y - 1) * 8] : 128);
              levels[y * 8 + x] = px[y * 8 + x] - pred;
            }
          }
          write_block(bw, levels, kRaster, prev_dc);
        } else {
          Block centered{}, coefs{};
          for (int i = 0; i < 64; ++i) centered[i] = px[i] - 128;
          forward_transform(centered, coefs);
          for (int i = 0; i < 64; ++i) levels[i] = quantize(coefs[i], qp);
          write_block(bw, levels, kZigzag, prev_dc);
        }
      }
    }
  }
  return bw.finish();
}

Image decode_frame(std::span<const std::uint8_t> chunk, std::size_t base, int width, int height, int qp) {
  const int ph = padded(height), pw = padded(width);
  const std::uint64_t blocks = static_cast<std::uint64_t>(ph / kBlock) * (pw / kBlock) * 3;
  // Every block costs at least two bits (DC and end-of-block); reject before allocating.
  if (blocks * 2 > static_cast<std::uint64_t>(chunk.size()) * 8) {
    throw DecodeError(base, "frame chunk too short for declared dimensions");
  }
  Image out(height, width, 3);
  BitReader br(chunk, base);
  for (int c = 0; c < 3; ++c) {
    std::int64_t prev_dc = 0;
    for (int by = 0; by < ph; by += kBlock) {
      for (int bx = 0; bx < pw; bx += kBlock) {
        Block levels{}, px{};
        if (qp == 0) {
          read_block(br, levels, kRaster, prev_dc);
          for (int y = 0; y < kBlock; ++y) {
            for (int x = 0; x < kBlock; ++x) {
              std::int64_t pred = x > 0 ? px[y * 8 + x - 1] : (y > 0 ? px[(y - 1) * 8] : 128);
              std::int64_t v = pred + levels[y * 8 + x];
              if (v < 0 || v > 255) throw DecodeError(br.offset(), "lossless sample out of range");
              px[y * 8 + x] = v;
            }
          }
        } else {
          read_block(br, levels, kZigzag, prev_dc);
          Block coefs{}, rec{};
          for (int i = 0; i < 64; ++i) coefs[i] = dequantize(levels[i], qp);
          inverse_transform(coefs, rec, 30);
          for (int i = 0; i < 64; ++i) px[i] = std::clamp<std::int64_t>(rec[i] + 128, 0, 255);
        }
        for (int y = 0; y < kBlock && by + y < height; ++y) {
          for (int x = 0; x < kBlock && bx + x < width; ++x) {
            out.at(c, by + y, bx + x) = static_cast<double>(px[y * 8 + x]) / 255.0;
          }
        }
      }
    }
  }
  return out;
}

struct PayloadHeader {
  CodecBackend backend;
  int qp;
  int frame_count;
  int width;
  int height;
  bool is_residual;
};

PayloadHeader read_header(ByteReader& rd) {
  rd.expect_tag(kPayloadMagic);
  PayloadHeader h{};
  std::size_t at = rd.offset();
  std::uint8_t backend = rd.u8();
  if (backend > 1) throw DecodeError(at, "unknown codec backend " + std::to_string(backend));
  h.backend = static_cast<CodecBackend>(backend);
  at = rd.offset();
  h.qp = rd.u8();
  if (h.qp > kMaxQp) throw DecodeError(at, "qp out of range");
  at = rd.offset();
  h.frame_count = rd.u16();
  if (h.frame_count == 0) throw DecodeError(at, "payload declares zero frames");
  at = rd.offset();
  h.width = rd.u16();
  h.height = rd.u16();
  if (h.width == 0 || h.height == 0) throw DecodeError(at, "payload declares empty frames");
  at = rd.offset();
  std::uint8_t residual = rd.u8();
  if (residual > 1) throw DecodeError(at, "bad residual flag");
  h.is_residual = residual == 1;
  return h;
}

void check_frames(std::span<const Image> frames) {
  if (frames.empty()) throw EmptyInput("encode_frames needs at least one frame");
  const Image& ref = frames.front();
  if (ref.channels() != 3 || ref.height() <= 0 || ref.width() <= 0) {
    throw InvalidArgument("frames must be non-empty 3-channel images");
  }
  if (ref.height() > 0xffff || ref.width() > 0xffff || frames.size() > 0xffff) {
    throw InvalidArgument("frame dimensions or count exceed the payload format");
  }
  for (const Image& f : frames) {
    if (!f.same_shape(ref)) throw DimensionMismatch("frames of one payload must share a shape");
    for (double v : f.data()) {
      if (!std::isfinite(v)) throw NonFiniteInput("frame sample");
    }
  }
}

}  // namespace

void CodecConfig::validate() const {
  if (qp < 0 || qp > kMaxQp) throw InvalidArgument("qp " + std::to_string(qp) + " outside [0, 51]");
  if (backend == CodecBackend::External && !external_cmd) {
    throw InvalidArgument("external backend needs a command template");
  }
  if (backend == CodecBackend::Baseline && (external_cmd || external_decode_cmd)) {
    throw InvalidArgument("baseline backend does not take an external command");
  }
}

double quantizer_step(int qp) {
  if (qp == 0) return 1.0;
  return std::pow(2.0, (qp - 4) / 6.0);
}

CodedPayload encode_frames(std::span<const Image> frames, const CodecConfig& cfg, bool is_residual) {
  cfg.validate();
  check_frames(frames);
  const Image& ref = frames.front();

  ByteWriter out;
  out.tag(kPayloadMagic);
  out.u8(static_cast<std::uint8_t>(cfg.backend));
  out.u8(static_cast<std::uint8_t>(cfg.qp));
  out.u16(static_cast<std::uint16_t>(frames.size()));
  out.u16(static_cast<std::uint16_t>(ref.width()));
  out.u16(static_cast<std::uint16_t>(ref.height()));
  out.u8(is_residual ? 1 : 0);

  if (cfg.backend == CodecBackend::Baseline) {
    for (const Image& f : frames) {
      std::vector<std::uint8_t> chunk = encode_frame(f, cfg.qp);
      out.u32(static_cast<std::uint32_t>(chunk.size()));
      out.bytes(chunk);
    }
  } else {
    std::vector<std::uint8_t> chunk = detail::external_encode(frames, cfg);
    out.u32(static_cast<std::uint32_t>(chunk.size()));
    out.bytes(chunk);
  }

  CodedPayload p;
  p.bytes = out.take();
  p.frame_count = static_cast<int>(frames.size());
  p.width = ref.width();
  p.height = ref.height();
  p.is_residual = is_residual;
  p.backend = cfg.backend;
  p.qp = cfg.qp;
  return p;
}

CodedPayload parse_payload_header(std::span<const std::uint8_t> bytes) {
  ByteReader rd(bytes);
  PayloadHeader h = read_header(rd);
  CodedPayload p;
  p.bytes.assign(bytes.begin(), bytes.end());
  p.frame_count = h.frame_count;
  p.width = h.width;
  p.height = h.height;
  p.is_residual = h.is_residual;
  p.backend = h.backend;
  p.qp = h.qp;
  return p;
}

std::vector<Image> decode_frames(std::span<const std::uint8_t> bytes, const CodecConfig& cfg) {
  ByteReader rd(bytes);
  PayloadHeader h = read_header(rd);
  std::vector<Image> frames;
  if (h.backend == CodecBackend::Baseline) {
    frames.reserve(h.frame_count);
    for (int i = 0; i < h.frame_count; ++i) {
      std::uint32_t len = rd.u32();
      std::size_t base = rd.offset();
      auto chunk = rd.bytes(len, "frame chunk");
      frames.push_back(decode_frame(chunk, base, h.width, h.height, h.qp));
    }
  } else {
    if (!cfg.external_cmd) {
      throw DecodeError(rd.offset(), "payload needs the external backend but no command was given");
    }
    std::uint32_t len = rd.u32();
    auto chunk = rd.bytes(len, "external chunk");
    frames = detail::external_decode(chunk, h.frame_count, h.width, h.height, h.qp, cfg);
  }
  return frames;
}

std::vector<Image> decode_frames(const CodedPayload& payload, const CodecConfig& cfg) {
  return decode_frames(std::span<const std::uint8_t>(payload.bytes), cfg);
}

Image map_residual(const Image& residual) {
  Image out = residual;
  for (double& v : out.data()) v = (std::clamp(v, -1.0, 1.0) + 1.0) * 0.5;
  return out;
}

Image unmap_residual(const Image& mapped) {
  Image out = mapped;
  for (double& v : out.data()) v = 2.0 * v - 1.0;
  return out;
}

}  // namespace lfhc
