#pragma once

#include <cstdint>

namespace wds {

// SplitMix64 (Steele, Lea & Flood 2014). All randomness in this project goes
// through this generator so that fixed seeds reproduce bit-identical output
// on every platform; the constants below are part of the external contract
// for committed fixtures and the synth file formats.
inline constexpr std::uint64_t kSplitMix64Gamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Decorrelated sub-stream key, e.g. one stream per image or per Monte-Carlo
// chunk. Streams derived from the same seed with distinct indices may be
// consumed concurrently without coordination.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_mix(splitmix64_mix(seed + kSplitMix64Gamma) +
                        index * kSplitMix64Gamma);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += kSplitMix64Gamma;
    return splitmix64_mix(state_);
  }

  // Uniform in [0, 1), 53 significant bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Uniform integer in [lo, hi]. Uses plain modulo reduction; the bias is
  // below 2^-57 for the small spans used here.
  int next_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() % span);
  }

  bool next_bool() { return (next() & 1u) != 0; }

  // Irwin-Hall approximation of a standard normal: the sum of 12 uniforms
  // minus 6 has mean 0 and variance 1. Chosen over Box-Muller because it
  // needs no transcendental functions, so results carry across libm
  // implementations exactly.
  double next_gaussian() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += next_unit();
    return s - 6.0;
  }

 private:
  std::uint64_t state_;
};

}  // namespace wds
