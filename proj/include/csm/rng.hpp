#pragma once

#include <cmath>
#include <cstdint>

namespace csm::rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Child-stream state for (seed, index). Distinct indices give statistically
/// independent streams, so work items can be evaluated in any order (or in
/// parallel) and still reproduce the serial results exactly.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed + 0x9e3779b97f4a7c15ull * (index + 1));
}

/// SplitMix64 stream. Hand-rolled on purpose: results depend only on the
/// 64-bit state, never on standard-library distribution internals, which are
/// implementation-defined and would break cross-platform reproducibility.
class Stream {
 public:
  explicit Stream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Consumes two uniforms per pair and
  /// caches the second value.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] keeps the log finite
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

inline Stream stream_for(std::uint64_t seed, std::uint64_t index) {
  return Stream(derive(seed, index));
}

}  // namespace csm::rng
