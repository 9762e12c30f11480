#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace liftcurve {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). A block
// of four 32-bit words is a pure function of (counter, key), so any draw can
// be produced independently of every other draw.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

// A keyed stream of random blocks addressed by (index, lane). Each sampled
// item uses its own index, and lanes separate independent uses for the same
// item (selection, jitter attempt 0, jitter attempt 1, ...).
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed);

  Philox4x32::Counter block(std::uint64_t index, std::uint64_t lane) const;

  // Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t index, std::uint64_t lane) const;

  // Two independent uniforms in [0, 1) from one block.
  std::array<double, 2> uniform_pair(std::uint64_t index, std::uint64_t lane) const;

  // Standard normal deviate (Box-Muller on one block).
  double normal(std::uint64_t index, std::uint64_t lane) const;

  // Uniform integer in [0, bound), bound > 0, by multiply-shift on 64 bits.
  std::uint64_t below(std::uint64_t bound, std::uint64_t index, std::uint64_t lane) const;

 private:
  Philox4x32::Key key_;
};

// Well-mixed 64-bit function (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

// Sub-seed for a labeled consumer of a master seed. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

// 53-bit uniform in [0, 1) from two 32-bit words.
double unit_interval(std::uint32_t hi, std::uint32_t lo);

}  // namespace liftcurve
