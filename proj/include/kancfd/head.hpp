#pragma once

#include "kancfd/matrix.hpp"
#include "kancfd/rng.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kancfd {

enum class HeadKind { dgkd, mlp, groupkan };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);

struct HeadGrad {
  std::vector<double> params;  // gradient of the trainable parameters only
  Matrix d_input;
};

// Detector head mapping a batch of features (N x d_in) to logits (N x d_out).
class Head {
 public:
  virtual ~Head() = default;

  virtual HeadKind kind() const noexcept = 0;
  virtual std::size_t d_in() const noexcept = 0;
  virtual std::size_t d_out() const noexcept = 0;
  virtual std::unique_ptr<Head> clone() const = 0;

  virtual Matrix forward(const Matrix& features) const = 0;
  virtual HeadGrad backward(const Matrix& features, const Matrix& d_logits) const = 0;

  virtual std::vector<double> trainable_parameters() const = 0;
  virtual void set_trainable_parameters(std::span<const double> flat) = 0;

  // Called with current-task features before training on a new task.
  virtual void begin_task(const Matrix& features, Rng& rng) = 0;
};

struct HeadOptions {
  std::size_t groups = 4;
  std::size_t mlp_hidden = 32;
};

std::unique_ptr<Head> make_head(HeadKind kind, std::size_t d_in, std::size_t d_out, const HeadOptions& options,
                                Rng& rng);

}  // namespace kancfd
