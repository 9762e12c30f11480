#include "liftcurve/random.hpp"

#include <cmath>
#include <numbers>

#include "liftcurve/hash.hpp"

namespace liftcurve {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

__extension__ using Uint128 = unsigned __int128;

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

CounterStream::CounterStream(std::uint64_t seed)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

Philox4x32::Counter CounterStream::block(std::uint64_t index, std::uint64_t lane) const {
  return Philox4x32::generate({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                               static_cast<std::uint32_t>(lane), static_cast<std::uint32_t>(lane >> 32)},
                              key_);
}

double unit_interval(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

double CounterStream::uniform(std::uint64_t index, std::uint64_t lane) const {
  const auto b = block(index, lane);
  return unit_interval(b[0], b[1]);
}

std::array<double, 2> CounterStream::uniform_pair(std::uint64_t index, std::uint64_t lane) const {
  const auto b = block(index, lane);
  return {unit_interval(b[0], b[1]), unit_interval(b[2], b[3])};
}

double CounterStream::normal(std::uint64_t index, std::uint64_t lane) const {
  const auto [u1, u2] = uniform_pair(index, lane);
  // 1 - u1 lies in (0, 1], so the logarithm is finite.
  const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
  return radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterStream::below(std::uint64_t bound, std::uint64_t index, std::uint64_t lane) const {
  const auto b = block(index, lane);
  const std::uint64_t bits = (std::uint64_t{b[0]} << 32) | b[1];
  return static_cast<std::uint64_t>((static_cast<Uint128>(bits) * bound) >> 64);
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return mix64(mix64(master) ^ fnv1a64(label));
}

}  // namespace liftcurve
