#pragma once

#include <filesystem>

#include "lfhc/image.hpp"

namespace lfhc {

/// Reads an 8-bit PNG (gray, RGB or RGBA) into a 3-channel image scaled to [0, 1].
Image read_png(const std::filesystem::path& path);

/// Writes a 3-channel image as 8-bit RGB PNG, clamping and rounding samples.
void write_png(const Image& img, const std::filesystem::path& path);

inline unsigned char to_u8(double v) {
  double s = v * 255.0 + 0.5;
  if (s < 0.0) return 0;
  if (s >= 255.0) return 255;
  return static_cast<unsigned char>(s);
}

}  // namespace lfhc
