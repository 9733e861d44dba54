#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lfhc {

/// Stateless counter-based generator: every draw is a pure function of (key, counter), so
/// streams are reproducible across platforms and independent of evaluation order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  /// Derives a child stream, e.g. per channel or per layer.
  constexpr CounterRng child(std::uint64_t tag) const { return CounterRng(mix(key_ ^ mix(tag + 0x9e3779b97f4a7c15ULL))); }

  constexpr std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + mix(counter)); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two counter-derived uniforms.
  double normal(std::uint64_t counter) const {
    double u1 = (static_cast<double>(bits(2 * counter) >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
};

}  // namespace lfhc
