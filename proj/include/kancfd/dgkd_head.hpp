#pragma once

#include "kancfd/dg_layer.hpp"
#include "kancfd/head.hpp"

#include <iosfwd>
#include <vector>

namespace kancfd {

// Sum of per-task DG layers. Layer k is created for task k; earlier layers
// are frozen when a new one is appended, so only the newest layer trains.
class DgkdHead final : public Head {
 public:
  DgkdHead(std::size_t d_in, std::size_t d_out, std::size_t groups);

  HeadKind kind() const noexcept override { return HeadKind::dgkd; }
  std::size_t d_in() const noexcept override { return d_in_; }
  std::size_t d_out() const noexcept override { return d_out_; }
  std::size_t groups() const noexcept { return groups_; }
  std::unique_ptr<Head> clone() const override { return std::make_unique<DgkdHead>(*this); }

  Matrix forward(const Matrix& features) const override;
  std::vector<double> forward(std::span<const double> x) const;
  HeadGrad backward(const Matrix& features, const Matrix& d_logits) const override;

  std::vector<double> trainable_parameters() const override;
  void set_trainable_parameters(std::span<const double> flat) override;

  void begin_task(const Matrix& features, Rng& rng) override { add_task_layer(features, rng); }
  void add_task_layer(const Matrix& features, Rng& rng);
  // Appends a prepared layer (tests and deserialisation).
  void push_layer(DgLayer layer);

  const std::vector<DgLayer>& layers() const noexcept { return layers_; }
  DgLayer& layer(std::size_t k) { return layers_.at(k); }
  int active_task() const noexcept { return static_cast<int>(layers_.size()); }

 private:
  std::size_t d_in_, d_out_, groups_;
  std::vector<DgLayer> layers_;
};

// Composite activation of one group across tasks, sum_k wbar_k * phi_k(x),
// where wbar_k is the mean of layer k's W entries in that group's columns.
std::vector<double> activation_profile(const DgkdHead& head, std::size_t group, std::span<const double> xs);

// CSV with header "x,value,task_count".
void write_activation_profile_csv(std::ostream& out, const DgkdHead& head, std::size_t group,
                                  std::span<const double> xs);

}  // namespace kancfd
