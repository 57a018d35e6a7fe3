#include "kancfd/rng.hpp"

#include <cmath>
#include <numbers>

namespace kancfd {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finaliser
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), key_(mix(seed ^ mix(stream + kGolden))) {}

std::uint64_t Rng::next_u64() noexcept { return mix(key_ + (++counter_) * kGolden); }

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::below(std::size_t n) noexcept {
  // 128-bit multiply-shift keeps the mapping platform independent.
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

double Rng::normal() noexcept {
  // Box-Muller, one output per pair so the stream position stays simple.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::fork(std::uint64_t id) const noexcept { return Rng(seed_, mix(key_ ^ mix(id * kGolden + 1)), 0, 0); }

}  // namespace kancfd
