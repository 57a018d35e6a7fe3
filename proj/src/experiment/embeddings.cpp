#include "kancfd/error.hpp"
#include "kancfd/experiment.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <ostream>

namespace kancfd {

PcaResult pca2(const Matrix& x) {
  require(x.cols() >= 2, "dump_embeddings: need at least two feature dimensions");
  require(x.rows() >= 1, "dump_embeddings: no samples");
  const std::size_t n = x.rows(), d = x.cols();
  PcaResult out;
  out.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out.mean[c] += x(r, c);
  for (double& m : out.mean) m /= static_cast<double>(n);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov(a, b) += (x(r, a) - out.mean[a]) * (x(r, b) - out.mean[b]);
  cov /= static_cast<double>(n);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const double total = cov.trace();
  out.components = Matrix(2, d);
  for (std::size_t k = 0; k < 2; ++k) {
    // Eigen sorts eigenvalues ascending.
    const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - k);
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (std::size_t c = 0; c < d; ++c) out.components(k, c) = v(static_cast<Eigen::Index>(c));
    out.explained.push_back(total > 0.0 ? eig.eigenvalues()(col) / total : 0.0);
  }
  out.projected = Matrix(n, 2);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < 2; ++k) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += (x(r, c) - out.mean[c]) * out.components(k, c);
      out.projected(r, k) = s;
    }
  return out;
}

void dump_embeddings(const Trainer& trainer, const std::vector<Dataset>& evals, std::ostream& out) {
  Matrix pooled;
  std::vector<int> domains, labels;
  for (const auto& e : evals) {
    pooled.append_rows(trainer.features(e.x));
    domains.insert(domains.end(), e.domains.begin(), e.domains.end());
    labels.insert(labels.end(), e.labels.begin(), e.labels.end());
  }
  const auto pca = pca2(pooled);
  out << "pc1,pc2,domain,label,split\n";
  out.precision(17);
  for (std::size_t r = 0; r < pooled.rows(); ++r)
    out << pca.projected(r, 0) << ',' << pca.projected(r, 1) << ',' << domains[r] << ',' << labels[r] << ",eval\n";
}

}  // namespace kancfd
