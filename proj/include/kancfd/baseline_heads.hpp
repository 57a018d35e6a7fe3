#pragma once

#include "kancfd/head.hpp"

#include <array>

namespace kancfd {

// affine -> SiLU -> affine. Flat order: W1, b1, W2, b2.
class MlpHead final : public Head {
 public:
  MlpHead(std::size_t d_in, std::size_t d_out, std::size_t hidden, Rng& rng);

  HeadKind kind() const noexcept override { return HeadKind::mlp; }
  std::size_t d_in() const noexcept override { return w1_.cols(); }
  std::size_t d_out() const noexcept override { return w2_.rows(); }
  std::unique_ptr<Head> clone() const override { return std::make_unique<MlpHead>(*this); }

  Matrix forward(const Matrix& features) const override;
  HeadGrad backward(const Matrix& features, const Matrix& d_logits) const override;
  std::vector<double> trainable_parameters() const override;
  void set_trainable_parameters(std::span<const double> flat) override;
  void begin_task(const Matrix&, Rng&) override {}

 private:
  Matrix w1_, w2_;
  std::vector<double> b1_, b2_;
};

// Shared rational activation per dimension group followed by an affine map:
//   r(x) = (a0 + a1 x + a2 x^2 + a3 x^3) / (1 + (q1 x)^2 + (q2 x^2)^2)
// The denominator is >= 1, so r has no poles.
// Flat order: per-group [a0 a1 a2 a3 q1 q2], W, b.
class GroupKanHead final : public Head {
 public:
  struct Rational {
    std::array<double, 4> numer{0.0, 1.0, 0.0, 0.0};
    std::array<double, 2> denom{0.0, 0.0};

    double operator()(double x) const noexcept;
  };

  GroupKanHead(std::size_t d_in, std::size_t d_out, std::size_t groups, Rng& rng);

  HeadKind kind() const noexcept override { return HeadKind::groupkan; }
  std::size_t d_in() const noexcept override { return w_.cols(); }
  std::size_t d_out() const noexcept override { return w_.rows(); }
  std::unique_ptr<Head> clone() const override { return std::make_unique<GroupKanHead>(*this); }

  Matrix forward(const Matrix& features) const override;
  HeadGrad backward(const Matrix& features, const Matrix& d_logits) const override;
  std::vector<double> trainable_parameters() const override;
  void set_trainable_parameters(std::span<const double> flat) override;
  void begin_task(const Matrix&, Rng&) override {}

  std::vector<Rational>& rationals() noexcept { return rationals_; }
  Matrix& weights() noexcept { return w_; }
  std::vector<double>& bias() noexcept { return b_; }

 private:
  std::size_t group_of(std::size_t dim) const noexcept;

  std::vector<Rational> rationals_;
  Matrix w_;
  std::vector<double> b_;
};

}  // namespace kancfd
