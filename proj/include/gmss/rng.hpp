#pragma once

// Deterministic random source used everywhere in the library. The exact
// algorithms are part of the reproducibility contract (see README): a run is
// a pure function of its seed, so the generator cannot be swapped for a
// platform-dependent one.
//
//   * core generator: PCG XSH-RR 64/32 (64-bit LCG state, 32-bit output)
//   * uniform double in [0, 1): 53 bits assembled from two 32-bit draws
//   * bounded integers: rejection sampling on the 32-bit output
//   * gaussians: Box-Muller on two uniform draws, second value cached
//   * shuffles: Fisher-Yates, descending index

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace gmss {

class Rng {
 public:
  // `stream` selects an independent sequence for the same seed; the library
  // assigns fixed stream ids per purpose so consumption orders never collide.
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    state_ = 0;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ull + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform in [0, bound). Rejection keeps the draw exactly uniform.
  std::uint32_t next_below(std::uint32_t bound) {
    const std::uint32_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  // 53-bit uniform in [0, 1): hi 27 bits + lo 26 bits.
  double next_double() {
    const auto hi = static_cast<std::uint64_t>(next_u32() >> 5);   // 27 bits
    const auto lo = static_cast<std::uint64_t>(next_u32() >> 6);   // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    const double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard; smallest representable draw
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = next_below(static_cast<std::uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Fixed stream ids. Derived seeds for per-fold work use
// `Rng(seed, stream::kFoldBase + fold_index)`.
namespace stream {
inline constexpr std::uint64_t kModelInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kPuzzleDraw = 3;
inline constexpr std::uint64_t kPermSelect = 4;
inline constexpr std::uint64_t kSynthData = 5;
inline constexpr std::uint64_t kProbeInit = 6;
inline constexpr std::uint64_t kFoldBase = 100;
}  // namespace stream

}  // namespace gmss
