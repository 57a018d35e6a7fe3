#include "kancfd/extractor.hpp"

#include "kancfd/error.hpp"
#include "kancfd/kernels.hpp"

#include <cmath>

namespace kancfd {

double silu(double x) noexcept { return x / (1.0 + std::exp(-x)); }

double silu_grad(double x) noexcept {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

FeatureExtractor::FeatureExtractor(std::size_t d_x, std::size_t d_f, std::size_t hidden, Rng& rng)
    : w1_(hidden, d_x), w2_(d_f, hidden), b1_(hidden, 0.0), b2_(d_f, 0.0) {
  const double s1 = std::sqrt(3.0 / static_cast<double>(d_x));
  const double s2 = std::sqrt(3.0 / static_cast<double>(hidden));
  for (double& v : w1_.data()) v = rng.uniform(-s1, s1);
  for (double& v : w2_.data()) v = rng.uniform(-s2, s2);
}

Matrix FeatureExtractor::forward(const Matrix& x, Cache* cache) const {
  require(x.cols() == d_x(), "extractor_forward: input width != d_x");
  Matrix pre = kernels::gemm_nt(x, w1_);
  for (std::size_t n = 0; n < pre.rows(); ++n)
    for (std::size_t j = 0; j < pre.cols(); ++j) pre(n, j) += b1_[j];
  Matrix h(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = silu(pre.data()[i]);
  Matrix out = kernels::gemm_nt(h, w2_);
  for (std::size_t n = 0; n < out.rows(); ++n)
    for (std::size_t j = 0; j < out.cols(); ++j) out(n, j) += b2_[j];
  if (cache) *cache = Cache{x, std::move(pre), std::move(h)};
  return out;
}

std::vector<double> FeatureExtractor::forward(std::span<const double> x) const {
  require(x.size() == d_x(), "extractor_forward: input length != d_x");
  const Matrix out = forward(Matrix(1, x.size(), std::vector<double>(x.begin(), x.end())));
  return out.values();
}

FeatureExtractor::Grad FeatureExtractor::backward(const Cache& cache, const Matrix& d_features) const {
  require(d_features.rows() == cache.input.rows() && d_features.cols() == d_f(),
          "FeatureExtractor::backward: upstream gradient shape");
  const Matrix d_w2 = kernels::gemm_tn(d_features, cache.hidden);
  std::vector<double> d_b2(d_f(), 0.0);
  for (std::size_t n = 0; n < d_features.rows(); ++n)
    for (std::size_t j = 0; j < d_f(); ++j) d_b2[j] += d_features(n, j);
  Matrix d_pre = kernels::gemm(d_features, w2_);
  for (std::size_t i = 0; i < d_pre.size(); ++i) d_pre.data()[i] *= silu_grad(cache.pre.data()[i]);
  const Matrix d_w1 = kernels::gemm_tn(d_pre, cache.input);
  std::vector<double> d_b1(hidden(), 0.0);
  for (std::size_t n = 0; n < d_pre.rows(); ++n)
    for (std::size_t j = 0; j < hidden(); ++j) d_b1[j] += d_pre(n, j);

  Grad g;
  g.params.reserve(parameter_count());
  g.params.insert(g.params.end(), d_w1.values().begin(), d_w1.values().end());
  g.params.insert(g.params.end(), d_b1.begin(), d_b1.end());
  g.params.insert(g.params.end(), d_w2.values().begin(), d_w2.values().end());
  g.params.insert(g.params.end(), d_b2.begin(), d_b2.end());
  g.d_input = kernels::gemm(d_pre, w1_);
  return g;
}

std::size_t FeatureExtractor::parameter_count() const noexcept {
  return w1_.size() + b1_.size() + w2_.size() + b2_.size();
}

std::vector<double> FeatureExtractor::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1_.values().begin(), w1_.values().end());
  flat.insert(flat.end(), b1_.begin(), b1_.end());
  flat.insert(flat.end(), w2_.values().begin(), w2_.values().end());
  flat.insert(flat.end(), b2_.begin(), b2_.end());
  return flat;
}

void FeatureExtractor::set_parameters(std::span<const double> flat) {
  require(flat.size() == parameter_count(), "FeatureExtractor::set_parameters: wrong length");
  auto it = flat.begin();
  for (double& v : w1_.data()) v = *it++;
  for (double& v : b1_) v = *it++;
  for (double& v : w2_.data()) v = *it++;
  for (double& v : b2_) v = *it++;
}

}  // namespace kancfd
