// Serial reference vs OpenMP kernels. Run with e.g.
//   OMP_NUM_THREADS=4 ./kernel_bench --benchmark_filter=gemm

#include "kancfd/kernels.hpp"
#include "kancfd/rng.hpp"

#include <benchmark/benchmark.h>

using namespace kancfd;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

struct RbfCase {
  Matrix x, up;
  std::vector<RbfParams> params;
  std::vector<std::size_t> groups;

  explicit RbfCase(std::size_t n) : x(random_matrix(n, 16, 3)), up(random_matrix(n, 16, 4)) {
    for (std::size_t g = 0; g < 4; ++g) params.push_back({0.1 * static_cast<double>(g), 0.8});
    for (std::size_t i = 0; i < 16; ++i) groups.push_back(i / 4);
  }
};

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_gemm_nt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 64, 1), b = random_matrix(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_gemm_tn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 64, 1), b = random_matrix(n, 16, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <Matrix (*F)(const Matrix&, std::span<const RbfParams>, std::span<const std::size_t>)>
void BM_rbf_activate(benchmark::State& state) {
  const RbfCase c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(F(c.x, c.params, c.groups));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <kernels::RbfBackward (*F)(const Matrix&, const Matrix&, std::span<const RbfParams>, std::span<const std::size_t>)>
void BM_rbf_backward(benchmark::State& state) {
  const RbfCase c(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(F(c.x, c.up, c.params, c.groups));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Matrix (*F)(const Matrix&, std::vector<double>*)>
void BM_normalize_rows(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(F(x, nullptr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

#define KANCFD_PAIR(name, fn)                                                                       \
  BENCHMARK_TEMPLATE(name, kernels::serial::fn)->Name(#fn "/serial")->RangeMultiplier(8)->Range(64, 32768); \
  BENCHMARK_TEMPLATE(name, kernels::fn)->Name(#fn "/omp")->RangeMultiplier(8)->Range(64, 32768)

KANCFD_PAIR(BM_gemm_nt, gemm_nt);
KANCFD_PAIR(BM_gemm_tn, gemm_tn);
KANCFD_PAIR(BM_rbf_activate, rbf_activate);
KANCFD_PAIR(BM_rbf_backward, rbf_backward);
KANCFD_PAIR(BM_normalize_rows, normalize_rows);

BENCHMARK_MAIN();
