#pragma once

#include <cmath>

namespace kancfd {

inline constexpr double kMinWidth = 1e-3;

// Gaussian radial basis exp(-(x - c)^2 / (2 sigma^2)).
struct RbfParams {
  double center = 0.0;
  double width = 1.0;

  friend bool operator==(const RbfParams&, const RbfParams&) = default;
};

struct RbfGrad {
  double d_x;
  double d_center;
  double d_width;
};

inline double rbf_eval(double x, const RbfParams& p) noexcept {
  const double u = (x - p.center) / p.width;
  return std::exp(-0.5 * u * u);
}

inline RbfGrad rbf_grad(double x, const RbfParams& p) noexcept {
  const double diff = x - p.center;
  const double s2 = p.width * p.width;
  const double phi = std::exp(-0.5 * diff * diff / s2);
  const double d_x = -phi * diff / s2;
  return {d_x, -d_x, phi * diff * diff / (s2 * p.width)};
}

inline void clamp_width(RbfParams& p) noexcept {
  if (!(p.width >= kMinWidth)) p.width = kMinWidth;
}

}  // namespace kancfd
