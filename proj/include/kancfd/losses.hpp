#pragma once

#include "kancfd/matrix.hpp"

#include <span>
#include <vector>

namespace kancfd {

struct LossConfig {
  double lambda_sc = 2.0;  // weight of the supervised contrastive term
  double lambda_kd = 1.0;  // weight of feature distillation
  double tau = 0.1;
  bool normalize_features = true;

  void validate() const;
};

// Features plus 2T-way domain-class labels (2 * task + is_fake) and the
// binary real/fake label.
struct DomainLabeledBatch {
  Matrix features;
  std::vector<int> domain_labels;
  std::vector<int> labels;
};

struct ScalarLoss {
  double value = 0.0;
  std::vector<double> grad;
};

struct MatrixLoss {
  double value = 0.0;
  Matrix grad;
};

// Mean sigmoid cross-entropy; gradient w.r.t. the logits.
ScalarLoss bce_loss(std::span<const double> logits, std::span<const int> labels);

// Supervised contrastive loss with a negatives-only denominator. For anchor
// i with positives P(i) (same domain label, j != i) and negatives N(i):
//   l_i = mean_{j in P(i)} -log( exp(z_i.z_j / tau) / sum_{k in N(i)} exp(z_i.z_k / tau) )
// where z are the L2-normalised features (unless disabled). Anchors without
// a positive or a negative are skipped; the loss is the mean over the rest.
// Throws ContractViolation when the batch has a single domain label.
MatrixLoss supcon_loss(const Matrix& features, std::span<const int> domain_labels, double tau,
                       bool normalize = true);
inline MatrixLoss supcon_loss(const DomainLabeledBatch& batch, double tau, bool normalize = true) {
  return supcon_loss(batch.features, batch.domain_labels, tau, normalize);
}

// Mean over rows of the per-row mean squared difference. Gradient w.r.t. student.
MatrixLoss kd_loss(const Matrix& teacher, const Matrix& student);
// Same form; gradient w.r.t. `projected`.
MatrixLoss align_loss(const Matrix& projected, const Matrix& current);

double overall_loss(double cls, double sc, double kd, const LossConfig& cfg);

}  // namespace kancfd
