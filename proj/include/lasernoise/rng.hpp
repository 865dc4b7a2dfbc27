#pragma once

#include <cstdint>

namespace lasernoise {

// splitmix64: the 64-bit mixing generator used everywhere randomness is
// needed. Deterministic given the seed; the state update and output mix are
// the reference constants from Steele/Lea/Burak ("Fast splittable
// pseudorandom number generators").
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Per-trial / per-channel seed derivation: mix(base, i) = splitmix64 output
// of base XOR (i+1)*golden. Distinct indices give statistically independent
// streams; index 0 differs from the base stream itself.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  SplitMix64 g(base ^ ((index + 1) * 0x9e3779b97f4a7c15ULL));
  return g.next();
}

}  // namespace lasernoise
