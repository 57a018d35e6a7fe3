#include "kancfd/adam.hpp"

#include "kancfd/error.hpp"

#include <cmath>
#include <string>

namespace kancfd {

AdamState::AdamState(std::size_t n, AdamConfig cfg) : first_moment(n, 0.0), second_moment(n, 0.0), config(cfg) {}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  require(params.size() == grads.size(), "adam_step: params and grads differ in length");
  require(state.first_moment.size() == params.size() && state.second_moment.size() == params.size(),
          "adam_step: optimizer state does not match parameter length");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i])) throw NumericError("adam_step: non-finite gradient at index " + std::to_string(i));

  const auto& cfg = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grads[i];
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grads[i] * grads[i];
    params[i] -= cfg.lr * (m / bias1) / (std::sqrt(v / bias2) + cfg.eps);
  }
}

}  // namespace kancfd
