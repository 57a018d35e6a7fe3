#pragma once

#include <cstddef>
#include <cstdint>

namespace kancfd {

// Counter-based generator: draw k of a stream is a pure function of
// (key, k), so results do not depend on platform or evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n must be > 0.
  std::size_t below(std::size_t n) noexcept;
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }

  // Independent child stream; does not advance this one.
  Rng fork(std::uint64_t id) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  Rng(std::uint64_t seed, std::uint64_t key, std::uint64_t counter, int) noexcept
      : seed_(seed), key_(key), counter_(counter) {}

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace kancfd
