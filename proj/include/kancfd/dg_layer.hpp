#pragma once

#include "kancfd/matrix.hpp"
#include "kancfd/rbf.hpp"
#include "kancfd/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kancfd {

// Domain-group layer: every input dimension i goes through the Gaussian
// shared by its group, then a dense d_out x d_in weight matrix mixes them.
//
//   y = W * [phi_{group(1)}(x_1), ..., phi_{group(d_in)}(x_{d_in})]^T
//
// Groups are contiguous blocks of floor(d_in / g) dimensions; the last group
// also takes the remainder when g does not divide d_in.
//
// Flat parameter order: W (row-major), centers (g), widths (g).
class DgLayer {
 public:
  DgLayer() = default;
  DgLayer(int task_id, std::size_t d_in, std::size_t d_out, std::size_t groups);

  int task_id() const noexcept { return task_id_; }
  std::size_t d_in() const noexcept { return weights_.cols(); }
  std::size_t d_out() const noexcept { return weights_.rows(); }
  std::size_t groups() const noexcept { return rbfs_.size(); }
  std::size_t group_width() const noexcept { return d_in() / groups(); }
  std::size_t group_of(std::size_t dim) const noexcept { return group_of_[dim]; }
  std::span<const std::size_t> group_map() const noexcept { return group_of_; }
  // Half-open [begin, end) dimension range of a group.
  std::pair<std::size_t, std::size_t> group_range(std::size_t group) const noexcept;

  bool frozen() const noexcept { return frozen_; }
  void freeze() noexcept { frozen_ = true; }

  Matrix& weights() noexcept { return weights_; }
  const Matrix& weights() const noexcept { return weights_; }
  std::span<RbfParams> rbfs() noexcept { return rbfs_; }
  std::span<const RbfParams> rbfs() const noexcept { return rbfs_; }

  // Centers = per-group mean of `features`, widths = per-group std clamped to
  // [min_width, max_width], W ~ U(-weight_scale, weight_scale).
  void init_from_features(const Matrix& features, Rng& rng, double weight_scale = 0.1, double min_width = 0.05,
                          double max_width = 2.0);

  std::vector<double> forward(std::span<const double> x) const;
  Matrix forward(const Matrix& x) const;

  struct Grad {
    std::vector<double> params;  // flat, same order as parameters()
    Matrix d_input;
  };
  Grad backward(const Matrix& x, const Matrix& d_out) const;

  std::size_t parameter_count() const noexcept { return weights_.size() + 2 * rbfs_.size(); }
  std::vector<double> parameters() const;
  // Writes flat parameters back; widths are clamped to kMinWidth.
  void set_parameters(std::span<const double> flat);

  friend bool operator==(const DgLayer&, const DgLayer&) = default;

 private:
  int task_id_ = 0;
  Matrix weights_;
  std::vector<RbfParams> rbfs_;
  std::vector<std::size_t> group_of_;
  bool frozen_ = false;
};

}  // namespace kancfd
