#pragma once

#include "kancfd/matrix.hpp"
#include "kancfd/rng.hpp"

#include <span>
#include <vector>

namespace kancfd {

double silu(double x) noexcept;
double silu_grad(double x) noexcept;

// Small trainable backbone: d_x -> hidden (SiLU) -> d_f.
// Flat parameter order: W1, b1, W2, b2.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  FeatureExtractor(std::size_t d_x, std::size_t d_f, std::size_t hidden, Rng& rng);

  std::size_t d_x() const noexcept { return w1_.cols(); }
  std::size_t d_f() const noexcept { return w2_.rows(); }
  std::size_t hidden() const noexcept { return w1_.rows(); }

  struct Cache {
    Matrix input;
    Matrix pre;     // W1 x + b1
    Matrix hidden;  // silu(pre)
  };

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
  std::vector<double> forward(std::span<const double> x) const;

  struct Grad {
    std::vector<double> params;
    Matrix d_input;
  };
  Grad backward(const Cache& cache, const Matrix& d_features) const;

  std::size_t parameter_count() const noexcept;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  Matrix& w1() noexcept { return w1_; }
  Matrix& w2() noexcept { return w2_; }
  std::vector<double>& b1() noexcept { return b1_; }
  std::vector<double>& b2() noexcept { return b2_; }

  friend bool operator==(const FeatureExtractor&, const FeatureExtractor&) = default;

 private:
  Matrix w1_, w2_;
  std::vector<double> b1_, b2_;
};

}  // namespace kancfd
