#include "lfhc/scan_order.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "lfhc/errors.hpp"

namespace lfhc {

namespace {

using Membership = std::function<bool(ViewCoord)>;

// Clockwise angle on screen, starting at the view straight above the center.
double clockwise_angle(ViewCoord c) {
  double a = std::atan2(static_cast<double>(c.t), static_cast<double>(-c.s));
  return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
}

void spiral_sort(std::vector<ViewCoord>& views) {
  std::sort(views.begin(), views.end(), [](ViewCoord a, ViewCoord b) {
    int ra = chebyshev_radius(a), rb = chebyshev_radius(b);
    if (ra != rb) return ra < rb;
    return clockwise_angle(a) < clockwise_angle(b);
  });
}

bool even(int v) { return v % 2 == 0; }
int iabs(int v) { return v < 0 ? -v : v; }

// Subset membership for the 9x9 tables. The last subset of every pattern is the complement.
std::vector<Membership> memberships(ScanKind kind) {
  switch (kind) {
    case ScanKind::C2:
      return {[](ViewCoord c) { return chebyshev_radius(c) == 3; }};
    case ScanKind::H2:
      return {[](ViewCoord c) { return even(c.s) && even(c.t); }};
    case ScanKind::C4:
      return {
          [](ViewCoord c) { return chebyshev_radius(c) == 1 && (c.s == 0 || c.t == 0); },
          [](ViewCoord c) { return chebyshev_radius(c) == 2; },
          [](ViewCoord c) { return chebyshev_radius(c) == 3 && !even(c.s + c.t); },
      };
    case ScanKind::H4:
      return {
          [](ViewCoord c) { return iabs(c.s) == 1 && iabs(c.t) == 1; },
          [](ViewCoord c) {
            return (c.s == 0 && c.t == 0) || (c.s == 0 && iabs(c.t) == 2) ||
                   (iabs(c.s) == 2 && c.t == 0);
          },
          [](ViewCoord c) { return chebyshev_radius(c) == 4 && even(c.s) && even(c.t); },
      };
  }
  throw InvalidArgument("unknown scan kind");
}

}  // namespace

std::size_t ScanOrder::view_count() const {
  std::size_t n = 0;
  for (const auto& s : subsets) n += s.size();
  return n;
}

ScanOrder partition_views(int grid, ScanKind kind) {
  if (grid != 9) throw UnsupportedGrid(grid);
  const int half = grid / 2;
  std::vector<ViewCoord> remaining;
  for (int s = -half; s <= half; ++s) {
    for (int t = -half; t <= half; ++t) remaining.push_back({s, t});
  }

  ScanOrder order;
  order.kind = kind;
  for (const auto& member : memberships(kind)) {
    std::vector<ViewCoord> subset;
    std::vector<ViewCoord> rest;
    for (ViewCoord c : remaining) (member(c) ? subset : rest).push_back(c);
    spiral_sort(subset);
    order.subsets.push_back(std::move(subset));
    remaining = std::move(rest);
  }
  spiral_sort(remaining);
  order.subsets.push_back(std::move(remaining));
  return order;
}

std::string_view to_string(ScanKind kind) {
  switch (kind) {
    case ScanKind::C2: return "c2";
    case ScanKind::C4: return "c4";
    case ScanKind::H2: return "h2";
    case ScanKind::H4: return "h4";
  }
  return "?";
}

ScanKind parse_scan_kind(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "c2") return ScanKind::C2;
  if (lower == "c4") return ScanKind::C4;
  if (lower == "h2") return ScanKind::H2;
  if (lower == "h4") return ScanKind::H4;
  throw InvalidArgument("unknown scan order '" + std::string(name) + "'");
}

}  // namespace lfhc
