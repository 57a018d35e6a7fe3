#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP version in
// `kancfd::kernels` and a plain loop in `kancfd::kernels::serial` kept as the
// reference for tests and the benchmark. Reductions run in a fixed order
// inside a single thread (parallelism is over independent outputs), so both
// versions return bit-identical results for any thread count.

#include "kancfd/matrix.hpp"
#include "kancfd/rbf.hpp"

#include <span>
#include <vector>

namespace kancfd::kernels {

// C = A * B
Matrix gemm(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix gemm_nt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix gemm_tn(const Matrix& a, const Matrix& b);

// Per-dimension group RBF activations: out(n, i) = rbf(x(n, i), params[group_of[i]]).
Matrix rbf_activate(const Matrix& x, std::span<const RbfParams> params, std::span<const std::size_t> group_of);

// Backward through rbf_activate. Given upstream d_act (N x d_in), returns the
// input gradient and accumulates per-group center/width gradients.
struct RbfBackward {
  Matrix d_input;
  std::vector<double> d_center;
  std::vector<double> d_width;
};
RbfBackward rbf_backward(const Matrix& x, const Matrix& d_act, std::span<const RbfParams> params,
                         std::span<const std::size_t> group_of);

// Row-wise L2 normalisation; zero rows stay zero. Norms are returned.
Matrix normalize_rows(const Matrix& x, std::vector<double>* norms = nullptr);

namespace serial {
Matrix gemm(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix rbf_activate(const Matrix& x, std::span<const RbfParams> params, std::span<const std::size_t> group_of);
RbfBackward rbf_backward(const Matrix& x, const Matrix& d_act, std::span<const RbfParams> params,
                         std::span<const std::size_t> group_of);
Matrix normalize_rows(const Matrix& x, std::vector<double>* norms = nullptr);
}  // namespace serial

int max_threads();

}  // namespace kancfd::kernels
