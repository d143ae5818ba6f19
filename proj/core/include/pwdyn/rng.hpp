#pragma once

// SplitMix64. Fixed here (rather than std::mt19937 + distributions) because
// the standard distributions are not bit-reproducible across libraries, and
// fixtures depend on exact sample streams.

#include <cstdint>

namespace pwdyn {

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

  // Independent stream for item `index` of a seeded batch.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept {
    SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
    return SplitMix64(mix.next());
  }

private:
  std::uint64_t state_;
};

}  // namespace pwdyn
