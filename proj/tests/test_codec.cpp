#include <gtest/gtest.h>

#include "lfhc/codec.hpp"
#include "lfhc/errors.hpp"
#include "lfhc/fixtures.hpp"
#include "lfhc/metrics.hpp"
#include "test_support.hpp"

using namespace lfhc;

namespace {

constexpr int kSweepQps[] = {2, 6, 10, 14, 20, 26, 38};

CodecConfig baseline(int qp) {
  CodecConfig c;
  c.qp = qp;
  return c;
}

std::vector<Image> natural_frames() {
  return {band_limited_texture(40, 56, 3), band_limited_texture(40, 56, 4)};
}

}  // namespace

TEST(Codec, ConstantGrayNearlyExactAtLowQp) {
  std::vector<Image> frames = {Image(16, 16, 3, 0.5)};
  auto out = decode_frames(encode_frames(frames, baseline(2), false), baseline(2));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_LE(testkit::max_abs_diff(out[0], frames[0]), 2.0 / 255.0);
}

TEST(Codec, LosslessAtQpZero) {
  std::vector<Image> frames = {testkit::random_image(19, 21, 1), testkit::random_image(19, 21, 2)};
  CodedPayload p = encode_frames(frames, baseline(0), false);
  auto out = decode_frames(p, baseline(0));
  ASSERT_EQ(out.size(), 2u);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(out[i], testkit::quantize8(frames[i]));
}

TEST(Codec, PayloadHeaderLayout) {
  std::vector<Image> frames(3, Image(9, 17, 3, 0.25));
  CodedPayload p = encode_frames(frames, baseline(20), true);
  ASSERT_GE(p.bytes.size(), 15u);
  EXPECT_EQ(std::string(p.bytes.begin(), p.bytes.begin() + 4), "LFC1");
  EXPECT_EQ(p.bytes[4], 0);   // baseline backend
  EXPECT_EQ(p.bytes[5], 20);  // qp
  EXPECT_EQ(p.bytes[6] | (p.bytes[7] << 8), 3);
  EXPECT_EQ(p.bytes[8] | (p.bytes[9] << 8), 17);
  EXPECT_EQ(p.bytes[10] | (p.bytes[11] << 8), 9);
  EXPECT_EQ(p.bytes[12], 1);
  CodedPayload h = parse_payload_header(p.bytes);
  EXPECT_EQ(h.frame_count, 3);
  EXPECT_EQ(h.width, 17);
  EXPECT_EQ(h.height, 9);
  EXPECT_TRUE(h.is_residual);
  EXPECT_EQ(h.qp, 20);
}

TEST(Codec, DimensionsPreservedForOddSizes) {
  std::vector<Image> frames = {testkit::random_image(13, 7, 5)};
  for (int qp : {0, 14, 38}) {
    auto out = decode_frames(encode_frames(frames, baseline(qp), false), baseline(qp));
    ASSERT_EQ(out.size(), 1u);
    EXPECT_TRUE(out[0].same_shape(frames[0]));
    for (double v : out[0].data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Codec, DeterministicBytes) {
  auto frames = natural_frames();
  EXPECT_EQ(encode_frames(frames, baseline(14), false), encode_frames(frames, baseline(14), false));
}

TEST(Codec, RateNonIncreasingInQp) {
  auto frames = natural_frames();
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (int qp : kSweepQps) {
    std::size_t n = encode_frames(frames, baseline(qp), false).bytes.size();
    EXPECT_LE(n, prev) << "qp " << qp;
    prev = n;
  }
  EXPECT_LE(encode_frames(frames, baseline(38), false).bytes.size(),
            encode_frames(frames, baseline(2), false).bytes.size());
}

TEST(Codec, QualityOrderedByQp) {
  auto frames = natural_frames();
  auto at = [&](int qp) {
    auto out = decode_frames(encode_frames(frames, baseline(qp), false), baseline(qp));
    return yuv_psnr(std::span<const Image>(frames), std::span<const Image>(out)).combined;
  };
  EXPECT_GE(at(14), at(38));
  EXPECT_GE(at(2), at(14));
}

TEST(Codec, QuantizerStepLaw) {
  EXPECT_DOUBLE_EQ(quantizer_step(4), 1.0);
  EXPECT_DOUBLE_EQ(quantizer_step(10), 2.0);
  EXPECT_DOUBLE_EQ(quantizer_step(0), 1.0);
}

TEST(Codec, EmptyAndInvalidInput) {
  EXPECT_THROW(encode_frames({}, baseline(14), false), EmptyInput);
  std::vector<Image> mixed = {Image(8, 8, 3), Image(8, 16, 3)};
  EXPECT_THROW(encode_frames(mixed, baseline(14), false), DimensionMismatch);
  EXPECT_THROW(baseline(52).validate(), InvalidArgument);
  CodecConfig ext;
  ext.backend = CodecBackend::External;
  EXPECT_THROW(ext.validate(), InvalidArgument);
}

TEST(Codec, TruncatedStreamReportsOffset) {
  auto frames = natural_frames();
  CodedPayload p = encode_frames(frames, baseline(14), false);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, p.bytes.size() / 2, p.bytes.size() - 1}) {
    std::vector<std::uint8_t> t(p.bytes.begin(), p.bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      decode_frames(t, baseline(14));
      FAIL() << "decoded a stream truncated to " << cut << " bytes";
    } catch (const DecodeError& e) {
      EXPECT_LE(e.offset(), cut);
    }
  }
}

TEST(Codec, CorruptBytesNeverCrash) {
  auto frames = natural_frames();
  CodedPayload p = encode_frames(frames, baseline(10), false);
  CounterRng rng(77);
  for (std::uint64_t i = 0; i < 300; ++i) {
    std::vector<std::uint8_t> b = p.bytes;
    std::size_t pos = rng.bits(2 * i) % b.size();
    b[pos] ^= static_cast<std::uint8_t>(1 + rng.bits(2 * i + 1) % 255);
    try {
      auto out = decode_frames(b, baseline(10));
      for (const Image& img : out) EXPECT_TRUE(img.same_shape(frames[0]));
    } catch (const Error&) {
    }
  }
}

TEST(Codec, ResidualMapping) {
  Image r(1, 3, 3);
  r.at(0, 0, 0) = -1.0;
  r.at(0, 0, 1) = 0.0;
  r.at(0, 0, 2) = 1.7;
  Image m = map_residual(r);
  EXPECT_DOUBLE_EQ(m.at(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.at(0, 0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.at(0, 0, 2), 1.0);
  Image back = unmap_residual(m);
  EXPECT_DOUBLE_EQ(back.at(0, 0, 0), -1.0);
  EXPECT_DOUBLE_EQ(back.at(0, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(back.at(0, 0, 2), 1.0);
}

TEST(ExternalCodec, IdentityCommandRoundTrip) {
  CodecConfig c;
  c.backend = CodecBackend::External;
  c.qp = 30;
  c.external_cmd = "cat";
  std::vector<Image> frames = {testkit::random_image(8, 12, 3), testkit::random_image(8, 12, 4)};
  CodedPayload p = encode_frames(frames, c, false);
  EXPECT_EQ(p.bytes[4], 1);
  auto out = decode_frames(p, c);
  ASSERT_EQ(out.size(), 2u);
  // The bridge carries 8-bit 4:4:4 YUV, so only colour conversion rounding remains.
  for (int i = 0; i < 2; ++i) EXPECT_LE(testkit::max_abs_diff(out[i], frames[i]), 3.0 / 255.0);
  EXPECT_THROW(decode_frames(p, baseline(30)), DecodeError);
}

TEST(ExternalCodec, FailingCommandIsReported) {
  CodecConfig c;
  c.backend = CodecBackend::External;
  c.external_cmd = "false";
  std::vector<Image> frames = {Image(8, 8, 3, 0.5)};
  EXPECT_THROW(encode_frames(frames, c, false), ExternalCodecError);
}
