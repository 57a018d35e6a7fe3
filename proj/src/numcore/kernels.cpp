#include "kancfd/kernels.hpp"

#include "kancfd/error.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kancfd::kernels {
namespace {

void check_groups(const Matrix& x, std::span<const RbfParams> params, std::span<const std::size_t> group_of) {
  require(group_of.size() == x.cols(), "rbf kernel: group map length must equal input width");
  for (std::size_t g : group_of) require(g < params.size(), "rbf kernel: group index out of range");
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Matrix gemm(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix c(n, m);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
#pragma omp parallel for schedule(static) if (n * k * m > 32768)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* crow = pc + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "gemm_nt: inner dimensions differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  Matrix c(n, m);
#pragma omp parallel for schedule(static) if (n * k * m > 32768)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const auto brow = b.row(j);
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c(i, j) = acc;
    }
  }
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "gemm_tn: inner dimensions differ");
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  Matrix c(n, m);
  // Each output row i is owned by one thread and summed over p in order.
#pragma omp parallel for schedule(static) if (n * k * m > 32768)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(p, i);
      const auto brow = b.row(p);
      for (std::size_t j = 0; j < m; ++j) c(i, j) += av * brow[j];
    }
  }
  return c;
}

Matrix rbf_activate(const Matrix& x, std::span<const RbfParams> params, std::span<const std::size_t> group_of) {
  check_groups(x, params, group_of);
  Matrix out(x.rows(), x.cols());
  const std::size_t d = x.cols();
#pragma omp parallel for schedule(static) if (x.size() > 8192)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(x.rows()); ++n)
    for (std::size_t i = 0; i < d; ++i) out(n, i) = rbf_eval(x(n, i), params[group_of[i]]);
  return out;
}

RbfBackward rbf_backward(const Matrix& x, const Matrix& d_act, std::span<const RbfParams> params,
                         std::span<const std::size_t> group_of) {
  check_groups(x, params, group_of);
  require(d_act.rows() == x.rows() && d_act.cols() == x.cols(), "rbf_backward: upstream gradient shape");
  const std::size_t rows = x.rows(), d = x.cols(), g = params.size();
  RbfBackward out{Matrix(rows, d), std::vector<double>(g, 0.0), std::vector<double>(g, 0.0)};
  Matrix d_c(rows, d), d_s(rows, d);
#pragma omp parallel for schedule(static) if (x.size() > 8192)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(rows); ++n) {
    for (std::size_t i = 0; i < d; ++i) {
      const RbfGrad gr = rbf_grad(x(n, i), params[group_of[i]]);
      const double up = d_act(n, i);
      out.d_input(n, i) = up * gr.d_x;
      d_c(n, i) = up * gr.d_center;
      d_s(n, i) = up * gr.d_width;
    }
  }
  // Group reduction in fixed (row, column) order.
#pragma omp parallel for schedule(static) if (x.size() > 8192)
  for (std::ptrdiff_t gi = 0; gi < static_cast<std::ptrdiff_t>(g); ++gi) {
    double sc = 0.0, ss = 0.0;
    for (std::size_t n = 0; n < rows; ++n)
      for (std::size_t i = 0; i < d; ++i)
        if (group_of[i] == static_cast<std::size_t>(gi)) {
          sc += d_c(n, i);
          ss += d_s(n, i);
        }
    out.d_center[gi] = sc;
    out.d_width[gi] = ss;
  }
  return out;
}

Matrix normalize_rows(const Matrix& x, std::vector<double>* norms) {
  Matrix out(x.rows(), x.cols());
  if (norms) norms->assign(x.rows(), 0.0);
#pragma omp parallel for schedule(static) if (x.size() > 8192)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(x.rows()); ++n) {
    double s = 0.0;
    for (double v : x.row(n)) s += v * v;
    const double norm = std::sqrt(s);
    if (norms) (*norms)[n] = norm;
    if (norm > 0.0)
      for (std::size_t i = 0; i < x.cols(); ++i) out(n, i) = x(n, i) / norm;
  }
  return out;
}

namespace serial {

Matrix gemm(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, p) * b(p, j);
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "gemm_nt: inner dimensions differ");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(j, p);
      c(i, j) = acc;
    }
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "gemm_tn: inner dimensions differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t p = 0; p < a.rows(); ++p)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(p, i) * b(p, j);
  return c;
}

Matrix rbf_activate(const Matrix& x, std::span<const RbfParams> params, std::span<const std::size_t> group_of) {
  check_groups(x, params, group_of);
  Matrix out(x.rows(), x.cols());
  for (std::size_t n = 0; n < x.rows(); ++n)
    for (std::size_t i = 0; i < x.cols(); ++i) out(n, i) = rbf_eval(x(n, i), params[group_of[i]]);
  return out;
}

RbfBackward rbf_backward(const Matrix& x, const Matrix& d_act, std::span<const RbfParams> params,
                         std::span<const std::size_t> group_of) {
  check_groups(x, params, group_of);
  require(d_act.rows() == x.rows() && d_act.cols() == x.cols(), "rbf_backward: upstream gradient shape");
  RbfBackward out{Matrix(x.rows(), x.cols()), std::vector<double>(params.size(), 0.0),
                  std::vector<double>(params.size(), 0.0)};
  for (std::size_t n = 0; n < x.rows(); ++n)
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const RbfGrad gr = rbf_grad(x(n, i), params[group_of[i]]);
      out.d_input(n, i) = d_act(n, i) * gr.d_x;
      out.d_center[group_of[i]] += d_act(n, i) * gr.d_center;
      out.d_width[group_of[i]] += d_act(n, i) * gr.d_width;
    }
  return out;
}

Matrix normalize_rows(const Matrix& x, std::vector<double>* norms) {
  Matrix out(x.rows(), x.cols());
  if (norms) norms->assign(x.rows(), 0.0);
  for (std::size_t n = 0; n < x.rows(); ++n) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.cols(); ++i) s += x(n, i) * x(n, i);
    const double norm = std::sqrt(s);
    if (norms) (*norms)[n] = norm;
    if (norm > 0.0)
      for (std::size_t i = 0; i < x.cols(); ++i) out(n, i) = x(n, i) / norm;
  }
  return out;
}

}  // namespace serial
}  // namespace kancfd::kernels
