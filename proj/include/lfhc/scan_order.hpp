#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lfhc/image.hpp"

namespace lfhc {

enum class ScanKind : unsigned char { C2 = 0, C4 = 1, H2 = 2, H4 = 3 };

/// Version of the frozen 9x9 subset tables. Bump when any membership or ordering changes.
inline constexpr int kScanTableVersion = 1;

struct ScanOrder {
  ScanKind kind = ScanKind::C2;
  std::vector<std::vector<ViewCoord>> subsets;

  std::size_t view_count() const;
};

/// Partitions a grid x grid view array into the ordered subsets of `kind`.
/// Only the 9x9 tables are defined; other sizes throw UnsupportedGrid.
ScanOrder partition_views(int grid, ScanKind kind);

std::string_view to_string(ScanKind kind);
/// Accepts "c2", "C4", ... Throws InvalidArgument otherwise.
ScanKind parse_scan_kind(std::string_view name);

}  // namespace lfhc
