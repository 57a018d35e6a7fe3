#pragma once

#include <functional>
#include <span>
#include <vector>

namespace kancfd {

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x, double h = 1e-5);

// |a - b| / max(|a|, |b|, floor); the comparison used by every gradient test.
double relative_error(double a, double b, double floor = 1e-8);
double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-8);

}  // namespace kancfd
