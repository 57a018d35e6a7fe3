#include "kancfd/dgkd_head.hpp"

#include "kancfd/error.hpp"

#include <ostream>

namespace kancfd {

DgkdHead::DgkdHead(std::size_t d_in, std::size_t d_out, std::size_t groups)
    : d_in_(d_in), d_out_(d_out), groups_(groups) {
  require(groups >= 1 && groups <= d_in, "DgkdHead: need 1 <= groups <= d_in");
}

Matrix DgkdHead::forward(const Matrix& features) const {
  require(!layers_.empty(), "dgkd_forward: head has no layers");
  Matrix out = layers_.front().forward(features);
  for (std::size_t k = 1; k < layers_.size(); ++k) {
    const Matrix part = layers_[k].forward(features);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += part.data()[i];
  }
  return out;
}

std::vector<double> DgkdHead::forward(std::span<const double> x) const {
  require(!layers_.empty(), "dgkd_forward: head has no layers");
  std::vector<double> out(d_out_, 0.0);
  for (const auto& layer : layers_) {
    const auto part = layer.forward(x);
    for (std::size_t k = 0; k < d_out_; ++k) out[k] += part[k];
  }
  return out;
}

HeadGrad DgkdHead::backward(const Matrix& features, const Matrix& d_logits) const {
  require(!layers_.empty(), "DgkdHead::backward: head has no layers");
  HeadGrad out{{}, Matrix(features.rows(), features.cols())};
  for (const auto& layer : layers_) {
    auto g = layer.backward(features, d_logits);
    for (std::size_t i = 0; i < out.d_input.size(); ++i) out.d_input.data()[i] += g.d_input.data()[i];
    if (!layer.frozen()) out.params = std::move(g.params);
  }
  return out;
}

std::vector<double> DgkdHead::trainable_parameters() const {
  if (layers_.empty() || layers_.back().frozen()) return {};
  return layers_.back().parameters();
}

void DgkdHead::set_trainable_parameters(std::span<const double> flat) {
  if (layers_.empty() || layers_.back().frozen()) {
    require(flat.empty(), "DgkdHead: no trainable layer");
    return;
  }
  layers_.back().set_parameters(flat);
}

void DgkdHead::add_task_layer(const Matrix& features, Rng& rng) {
  require(features.rows() > 0, "add_task_layer: empty feature sample");
  DgLayer layer(active_task() + 1, d_in_, d_out_, groups_);
  layer.init_from_features(features, rng);
  for (auto& l : layers_) l.freeze();
  layers_.push_back(std::move(layer));
}

void DgkdHead::push_layer(DgLayer layer) {
  require(layer.d_in() == d_in_ && layer.d_out() == d_out_ && layer.groups() == groups_,
          "DgkdHead::push_layer: layer shape differs from head");
  for (auto& l : layers_) l.freeze();
  layers_.push_back(std::move(layer));
}

std::vector<double> activation_profile(const DgkdHead& head, std::size_t group, std::span<const double> xs) {
  require(group < head.groups(), "activation_profile: group index out of range");
  std::vector<double> mean_weight;
  for (const auto& layer : head.layers()) {
    const auto [begin, end] = layer.group_range(group);
    double s = 0.0;
    for (std::size_t k = 0; k < layer.d_out(); ++k)
      for (std::size_t i = begin; i < end; ++i) s += layer.weights()(k, i);
    mean_weight.push_back(s / static_cast<double>(layer.d_out() * (end - begin)));
  }
  std::vector<double> out(xs.size(), 0.0);
  for (std::size_t p = 0; p < xs.size(); ++p)
    for (std::size_t k = 0; k < head.layers().size(); ++k)
      out[p] += mean_weight[k] * rbf_eval(xs[p], head.layers()[k].rbfs()[group]);
  return out;
}

void write_activation_profile_csv(std::ostream& out, const DgkdHead& head, std::size_t group,
                                  std::span<const double> xs) {
  const auto values = activation_profile(head, group, xs);
  out << "x,value,task_count\n";
  out.precision(17);
  for (std::size_t p = 0; p < xs.size(); ++p) out << xs[p] << ',' << values[p] << ',' << head.layers().size() << '\n';
}

}  // namespace kancfd
