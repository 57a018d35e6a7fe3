#include "kancfd/losses.hpp"

#include "kancfd/error.hpp"
#include "kancfd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace kancfd {

void LossConfig::validate() const {
  require(lambda_sc >= 0.0 && lambda_kd >= 0.0, "LossConfig: loss weights must be non-negative");
  require(tau > 0.0, "LossConfig: tau must be positive");
}

ScalarLoss bce_loss(std::span<const double> logits, std::span<const int> labels) {
  require(logits.size() == labels.size(), "bce_loss: logits and labels differ in length");
  require(!logits.empty(), "bce_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(logits.size());
  ScalarLoss out{0.0, std::vector<double>(logits.size())};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double y = labels[i] ? 1.0 : 0.0;
    // max(z, 0) - z y + log(1 + exp(-|z|))
    out.value += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    out.grad[i] = (p - y) * inv_n;
  }
  out.value *= inv_n;
  return out;
}

MatrixLoss supcon_loss(const Matrix& features, std::span<const int> domain_labels, double tau, bool normalize) {
  const std::size_t n = features.rows();
  require(domain_labels.size() == n, "supcon_loss: labels length != batch size");
  require(n >= 2, "supcon_loss: need at least two samples");
  require(tau > 0.0, "supcon_loss: tau must be positive");
  if (std::all_of(domain_labels.begin(), domain_labels.end(), [&](int d) { return d == domain_labels[0]; }))
    throw ContractViolation("supcon_loss: no negatives (batch has a single domain label)");

  std::vector<double> norms;
  const Matrix z = normalize ? kernels::normalize_rows(features, &norms) : features;
  const Matrix sim = kernels::gemm_nt(z, z);

  // d_sim(i, k) accumulates dL/d s_ik for the row-i anchor term.
  Matrix d_sim(n, n);
  std::vector<double> anchor_loss(n, 0.0);
  std::vector<char> valid(n, 0);

#pragma omp parallel for schedule(static) if (n >= 128)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::size_t positives = 0;
    double max_neg = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      if (domain_labels[k] == domain_labels[i])
        ++positives;
      else
        max_neg = std::max(max_neg, sim(i, k) / tau);
    }
    if (positives == 0 || max_neg == -INFINITY) continue;
    valid[i] = 1;
    double denom = 0.0;
    double pos_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      if (domain_labels[k] != domain_labels[i])
        denom += std::exp(sim(i, k) / tau - max_neg);
      else
        pos_sum += sim(i, k) / tau;
    }
    const double log_denom = max_neg + std::log(denom);
    const double inv_p = 1.0 / static_cast<double>(positives);
    anchor_loss[i] = log_denom - pos_sum * inv_p;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      if (domain_labels[k] != domain_labels[i])
        d_sim(i, k) = std::exp(sim(i, k) / tau - log_denom) / tau;
      else
        d_sim(i, k) = -inv_p / tau;
    }
  }

  std::size_t n_valid = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (valid[i]) {
      ++n_valid;
      total += anchor_loss[i];
    }
  MatrixLoss out{0.0, Matrix(n, features.cols())};
  if (n_valid == 0) return out;
  const double scale = 1.0 / static_cast<double>(n_valid);
  out.value = total * scale;

  // s_ik = z_i . z_k, so dL/dz_i = sum_k (d_sim(i,k) + d_sim(k,i)) z_k.
  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) sym(i, k) = (d_sim(i, k) + d_sim(k, i)) * scale;
  const Matrix d_z = kernels::gemm(sym, z);
  if (!normalize) {
    out.grad = d_z;
    return out;
  }
  // Back through z = f / |f|: df = (dz - z (z . dz)) / |f|.
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] == 0.0) continue;
    double dot = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) dot += z(i, c) * d_z(i, c);
    for (std::size_t c = 0; c < z.cols(); ++c) out.grad(i, c) = (d_z(i, c) - z(i, c) * dot) / norms[i];
  }
  return out;
}

MatrixLoss kd_loss(const Matrix& teacher, const Matrix& student) {
  require(teacher.rows() == student.rows() && teacher.cols() == student.cols(), "kd_loss: shape mismatch");
  require(teacher.rows() > 0 && teacher.cols() > 0, "kd_loss: empty batch");
  const double inv = 1.0 / static_cast<double>(teacher.size());
  MatrixLoss out{0.0, Matrix(student.rows(), student.cols())};
  for (std::size_t i = 0; i < teacher.size(); ++i) {
    const double diff = student.data()[i] - teacher.data()[i];
    out.value += diff * diff;
    out.grad.data()[i] = 2.0 * diff * inv;
  }
  out.value *= inv;
  return out;
}

MatrixLoss align_loss(const Matrix& projected, const Matrix& current) {
  require(projected.rows() == current.rows() && projected.cols() == current.cols(), "align_loss: shape mismatch");
  return kd_loss(current, projected);
}

double overall_loss(double cls, double sc, double kd, const LossConfig& cfg) {
  return cls + cfg.lambda_sc * sc + cfg.lambda_kd * kd;
}

}  // namespace kancfd
