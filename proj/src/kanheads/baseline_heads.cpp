#include "kancfd/baseline_heads.hpp"

#include "kancfd/error.hpp"
#include "kancfd/extractor.hpp"
#include "kancfd/kernels.hpp"

#include <cmath>

namespace kancfd {
namespace {

void fill_uniform(Matrix& m, Rng& rng, double scale) {
  for (double& v : m.data()) v = rng.uniform(-scale, scale);
}

void add_row_bias(Matrix& m, const std::vector<double>& bias) {
  for (std::size_t n = 0; n < m.rows(); ++n)
    for (std::size_t j = 0; j < m.cols(); ++j) m(n, j) += bias[j];
}

std::vector<double> column_sums(const Matrix& m) {
  std::vector<double> s(m.cols(), 0.0);
  for (std::size_t n = 0; n < m.rows(); ++n)
    for (std::size_t j = 0; j < m.cols(); ++j) s[j] += m(n, j);
  return s;
}

void append(std::vector<double>& flat, std::span<const double> part) { flat.insert(flat.end(), part.begin(), part.end()); }

std::size_t take(std::span<const double> flat, std::size_t offset, std::span<double> dst) {
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), dst.size(), dst.begin());
  return offset + dst.size();
}

}  // namespace

// --- MLP -------------------------------------------------------------------

MlpHead::MlpHead(std::size_t d_in, std::size_t d_out, std::size_t hidden, Rng& rng)
    : w1_(hidden, d_in), w2_(d_out, hidden), b1_(hidden, 0.0), b2_(d_out, 0.0) {
  fill_uniform(w1_, rng, 1.0 / std::sqrt(static_cast<double>(d_in)));
  fill_uniform(w2_, rng, 1.0 / std::sqrt(static_cast<double>(hidden)));
}

Matrix MlpHead::forward(const Matrix& features) const {
  require(features.cols() == d_in(), "baseline_forward: feature width mismatch");
  Matrix pre = kernels::gemm_nt(features, w1_);
  add_row_bias(pre, b1_);
  for (double& v : pre.data()) v = silu(v);
  Matrix out = kernels::gemm_nt(pre, w2_);
  add_row_bias(out, b2_);
  return out;
}

HeadGrad MlpHead::backward(const Matrix& features, const Matrix& d_logits) const {
  require(features.cols() == d_in() && d_logits.cols() == d_out() && d_logits.rows() == features.rows(),
          "MlpHead::backward: shape mismatch");
  Matrix pre = kernels::gemm_nt(features, w1_);
  add_row_bias(pre, b1_);
  Matrix h = pre;
  for (double& v : h.data()) v = silu(v);

  const Matrix d_w2 = kernels::gemm_tn(d_logits, h);
  const auto d_b2 = column_sums(d_logits);
  Matrix d_pre = kernels::gemm(d_logits, w2_);
  for (std::size_t i = 0; i < d_pre.size(); ++i) d_pre.data()[i] *= silu_grad(pre.data()[i]);
  const Matrix d_w1 = kernels::gemm_tn(d_pre, features);
  const auto d_b1 = column_sums(d_pre);

  HeadGrad g;
  append(g.params, d_w1.data());
  append(g.params, d_b1);
  append(g.params, d_w2.data());
  append(g.params, d_b2);
  g.d_input = kernels::gemm(d_pre, w1_);
  return g;
}

std::vector<double> MlpHead::trainable_parameters() const {
  std::vector<double> flat;
  append(flat, w1_.data());
  append(flat, b1_);
  append(flat, w2_.data());
  append(flat, b2_);
  return flat;
}

void MlpHead::set_trainable_parameters(std::span<const double> flat) {
  require(flat.size() == w1_.size() + b1_.size() + w2_.size() + b2_.size(), "MlpHead: wrong parameter length");
  std::size_t off = take(flat, 0, w1_.data());
  off = take(flat, off, b1_);
  off = take(flat, off, w2_.data());
  take(flat, off, b2_);
}

// --- GroupKAN --------------------------------------------------------------

double GroupKanHead::Rational::operator()(double x) const noexcept {
  const double p = numer[0] + x * (numer[1] + x * (numer[2] + x * numer[3]));
  const double a = denom[0] * x, b = denom[1] * x * x;
  return p / (1.0 + a * a + b * b);
}

GroupKanHead::GroupKanHead(std::size_t d_in, std::size_t d_out, std::size_t groups, Rng& rng)
    : rationals_(groups), w_(d_out, d_in), b_(d_out, 0.0) {
  require(groups >= 1 && groups <= d_in, "GroupKanHead: need 1 <= groups <= d_in");
  for (auto& r : rationals_) {
    r.numer = {rng.uniform(-0.05, 0.05), 1.0, rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
    r.denom = {0.1, 0.1};
  }
  fill_uniform(w_, rng, 1.0 / std::sqrt(static_cast<double>(d_in)));
}

std::size_t GroupKanHead::group_of(std::size_t dim) const noexcept {
  const std::size_t width = d_in() / rationals_.size();
  return std::min(dim / width, rationals_.size() - 1);
}

Matrix GroupKanHead::forward(const Matrix& features) const {
  require(features.cols() == d_in(), "baseline_forward: feature width mismatch");
  Matrix act(features.rows(), features.cols());
  for (std::size_t n = 0; n < features.rows(); ++n)
    for (std::size_t i = 0; i < features.cols(); ++i) act(n, i) = rationals_[group_of(i)](features(n, i));
  Matrix out = kernels::gemm_nt(act, w_);
  add_row_bias(out, b_);
  return out;
}

HeadGrad GroupKanHead::backward(const Matrix& features, const Matrix& d_logits) const {
  require(features.cols() == d_in() && d_logits.cols() == d_out() && d_logits.rows() == features.rows(),
          "GroupKanHead::backward: shape mismatch");
  const std::size_t rows = features.rows(), d = features.cols(), g = rationals_.size();
  Matrix act(rows, d);
  for (std::size_t n = 0; n < rows; ++n)
    for (std::size_t i = 0; i < d; ++i) act(n, i) = rationals_[group_of(i)](features(n, i));
  const Matrix d_w = kernels::gemm_tn(d_logits, act);
  const auto d_b = column_sums(d_logits);
  const Matrix d_act = kernels::gemm(d_logits, w_);

  std::vector<double> d_rat(6 * g, 0.0);
  HeadGrad out{{}, Matrix(rows, d)};
  for (std::size_t n = 0; n < rows; ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t gi = group_of(i);
      const auto& r = rationals_[gi];
      const double x = features(n, i), up = d_act(n, i);
      const double x2 = x * x, x3 = x2 * x, x4 = x2 * x2;
      const double p = r.numer[0] + r.numer[1] * x + r.numer[2] * x2 + r.numer[3] * x3;
      const double dp = r.numer[1] + 2.0 * r.numer[2] * x + 3.0 * r.numer[3] * x2;
      const double q1 = r.denom[0], q2 = r.denom[1];
      const double q = 1.0 + q1 * q1 * x2 + q2 * q2 * x4;
      const double dq = 2.0 * q1 * q1 * x + 4.0 * q2 * q2 * x3;
      double* dr = d_rat.data() + 6 * gi;
      dr[0] += up / q;
      dr[1] += up * x / q;
      dr[2] += up * x2 / q;
      dr[3] += up * x3 / q;
      dr[4] += up * (-p / (q * q)) * 2.0 * q1 * x2;
      dr[5] += up * (-p / (q * q)) * 2.0 * q2 * x4;
      out.d_input(n, i) = up * (dp * q - p * dq) / (q * q);
    }
  }
  append(out.params, d_rat);
  append(out.params, d_w.data());
  append(out.params, d_b);
  return out;
}

std::vector<double> GroupKanHead::trainable_parameters() const {
  std::vector<double> flat;
  for (const auto& r : rationals_) {
    append(flat, r.numer);
    append(flat, r.denom);
  }
  append(flat, w_.data());
  append(flat, b_);
  return flat;
}

void GroupKanHead::set_trainable_parameters(std::span<const double> flat) {
  require(flat.size() == 6 * rationals_.size() + w_.size() + b_.size(), "GroupKanHead: wrong parameter length");
  std::size_t off = 0;
  for (auto& r : rationals_) {
    off = take(flat, off, r.numer);
    off = take(flat, off, r.denom);
  }
  off = take(flat, off, w_.data());
  take(flat, off, b_);
}

}  // namespace kancfd
