#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kancfd {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(std::size_t n, AdamConfig cfg);

  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  AdamConfig config;
};

// Bias-corrected Adam update in place. Throws ContractViolation on length
// mismatch and NumericError on a non-finite gradient (params untouched).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace kancfd
