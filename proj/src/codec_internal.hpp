#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfhc/codec.hpp"

namespace lfhc::detail {

std::vector<std::uint8_t> external_encode(std::span<const Image> frames, const CodecConfig& cfg);
std::vector<Image> external_decode(std::span<const std::uint8_t> coded, int frame_count, int width,
                                   int height, int qp, const CodecConfig& cfg);

}  // namespace lfhc::detail
