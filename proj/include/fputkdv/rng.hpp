#pragma once

// Counter-based random numbers.
//
// Every draw is a pure function of (seed, purpose, realization, index), so
// the j-th noise value of a realization does not depend on window size,
// thread count, or the order in which values are requested. The mixing
// function is the SplitMix64 finalizer; a stream key is obtained by mixing
// the seed with the purpose tag and the realization index, and the value at
// index i is mix64(key + (i + 1) * golden_gamma).

#include <cstdint>

namespace fputkdv {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// What a stream is used for. Distinct purposes never share draws.
enum class StreamPurpose : std::uint64_t {
  zeta = 1,       // transparency / translucency noise ζ(j)
  iid_mass = 2,   // i.i.d. masses
  ar_driver = 3,  // drivers z(n) for the AR(1) bound check
  test = 0xFF,
};

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t realization = 0) noexcept
      : key_(mix64(mix64(seed) ^ mix64(static_cast<std::uint64_t>(purpose) * golden_gamma + 0x632BE59BD9B4E019ULL) ^
                   mix64(realization + 0x8CB92BA72F3D8DD7ULL))) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  /// Raw 64 bits at a (possibly negative) index.
  constexpr std::uint64_t bits(std::int64_t index) const noexcept {
    return mix64(key_ + (static_cast<std::uint64_t>(index) + 1U) * golden_gamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform01(std::int64_t index) const noexcept {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  constexpr double uniform(double lo, double hi, std::int64_t index) const noexcept {
    return lo + (hi - lo) * uniform01(index);
  }

 private:
  std::uint64_t key_;
};

}  // namespace fputkdv
