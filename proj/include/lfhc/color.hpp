#pragma once

#include "lfhc/image.hpp"

namespace lfhc {

// BT.601 full-range. Chroma is centered on 0.5 so every plane stays in [0, 1].
Image rgb_to_yuv(const Image& rgb);
Image yuv_to_rgb(const Image& yuv);

}  // namespace lfhc
