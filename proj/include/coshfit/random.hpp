#pragma once

#include <cstdint>
#include <random>

namespace coshfit {

/// SplitMix64 finalizer; derives an independent stream seed for (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Uniform draws on the open interval (0, 1) with a fixed bit recipe, so
/// streams are reproducible across standard library implementations.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    // 53 random bits centred in their cell: never exactly 0 or 1.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t bound = n;
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coshfit
