#include "kancfd/dg_layer.hpp"

#include "kancfd/error.hpp"
#include "kancfd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace kancfd {

DgLayer::DgLayer(int task_id, std::size_t d_in, std::size_t d_out, std::size_t groups)
    : task_id_(task_id), weights_(d_out, d_in), rbfs_(groups), group_of_(d_in) {
  require(groups >= 1 && groups <= d_in, "DgLayer: need 1 <= groups <= d_in");
  const std::size_t width = d_in / groups;
  for (std::size_t i = 0; i < d_in; ++i) group_of_[i] = std::min(i / width, groups - 1);
}

std::pair<std::size_t, std::size_t> DgLayer::group_range(std::size_t group) const noexcept {
  const std::size_t width = group_width();
  const std::size_t begin = group * width;
  const std::size_t end = group + 1 == groups() ? d_in() : begin + width;
  return {begin, end};
}

void DgLayer::init_from_features(const Matrix& features, Rng& rng, double weight_scale, double min_width,
                                 double max_width) {
  require(features.rows() > 0, "DgLayer::init_from_features: empty feature sample");
  require(features.cols() == d_in(), "DgLayer::init_from_features: feature width != d_in");
  for (std::size_t g = 0; g < groups(); ++g) {
    const auto [begin, end] = group_range(g);
    double sum = 0.0;
    for (std::size_t n = 0; n < features.rows(); ++n)
      for (std::size_t i = begin; i < end; ++i) sum += features(n, i);
    const double count = static_cast<double>(features.rows() * (end - begin));
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t n = 0; n < features.rows(); ++n)
      for (std::size_t i = begin; i < end; ++i) sq += (features(n, i) - mean) * (features(n, i) - mean);
    const double sd = std::sqrt(sq / count);
    rbfs_[g] = {mean, std::clamp(sd, min_width, max_width)};
  }
  for (double& w : weights_.data()) w = rng.uniform(-weight_scale, weight_scale);
}

std::vector<double> DgLayer::forward(std::span<const double> x) const {
  require(x.size() == d_in(), "dg_layer_forward: input length != d_in");
  std::vector<double> y(d_out(), 0.0);
  for (std::size_t k = 0; k < d_out(); ++k)
    for (std::size_t i = 0; i < d_in(); ++i) y[k] += weights_(k, i) * rbf_eval(x[i], rbfs_[group_of_[i]]);
  return y;
}

Matrix DgLayer::forward(const Matrix& x) const {
  require(x.cols() == d_in(), "dg_layer_forward: input width != d_in");
  return kernels::gemm_nt(kernels::rbf_activate(x, rbfs_, group_of_), weights_);
}

DgLayer::Grad DgLayer::backward(const Matrix& x, const Matrix& d_out_mat) const {
  require(x.cols() == d_in() && d_out_mat.cols() == d_out() && d_out_mat.rows() == x.rows(),
          "DgLayer::backward: shape mismatch");
  const Matrix act = kernels::rbf_activate(x, rbfs_, group_of_);
  const Matrix d_w = kernels::gemm_tn(d_out_mat, act);
  const Matrix d_act = kernels::gemm(d_out_mat, weights_);
  auto rb = kernels::rbf_backward(x, d_act, rbfs_, group_of_);

  Grad g;
  g.params.reserve(parameter_count());
  g.params.insert(g.params.end(), d_w.values().begin(), d_w.values().end());
  g.params.insert(g.params.end(), rb.d_center.begin(), rb.d_center.end());
  g.params.insert(g.params.end(), rb.d_width.begin(), rb.d_width.end());
  g.d_input = std::move(rb.d_input);
  return g;
}

std::vector<double> DgLayer::parameters() const {
  std::vector<double> flat(weights_.values());
  for (const auto& p : rbfs_) flat.push_back(p.center);
  for (const auto& p : rbfs_) flat.push_back(p.width);
  return flat;
}

void DgLayer::set_parameters(std::span<const double> flat) {
  require(flat.size() == parameter_count(), "DgLayer::set_parameters: wrong length");
  const std::size_t nw = weights_.size();
  std::copy_n(flat.begin(), nw, weights_.data().begin());
  for (std::size_t g = 0; g < groups(); ++g) {
    rbfs_[g].center = flat[nw + g];
    rbfs_[g].width = flat[nw + groups() + g];
    clamp_width(rbfs_[g]);
  }
}

}  // namespace kancfd
