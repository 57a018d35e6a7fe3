#pragma once

#include "kancfd/adam.hpp"
#include "kancfd/dg_layer.hpp"
#include "kancfd/losses.hpp"
#include "kancfd/matrix.hpp"
#include "kancfd/rng.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace kancfd {

// Domain-class label coding shared by memory, losses and the trainer.
inline int domain_class_label(int task_index, int is_fake) noexcept { return 2 * task_index + is_fake; }
inline int binary_from_domain_class(int d) noexcept { return d % 2; }
inline int task_from_domain_class(int d) noexcept { return d / 2; }

// Representative features kept from past tasks. Rows live in the feature
// space of task `space_task` (1-based); `raw` is only filled when raw-sample
// replay is enabled and then holds the originating inputs row-aligned.
struct FeatureMemory {
  Matrix features;
  std::vector<int> domain_labels;
  std::vector<int> labels;
  std::vector<int> source_tasks;  // 0-based task index
  std::size_t budget = 500;
  int space_task = 0;
  Matrix raw;

  std::size_t size() const noexcept { return features.rows(); }
  bool empty() const noexcept { return features.rows() == 0; }
  std::vector<int> distinct_labels() const;
  void validate() const;
};

// Per-label herding. Quotas are budget / L with the remainder going to the
// lowest labels; quota a label cannot use is handed to the next labels in
// order. Returns selected row indices grouped by ascending label, each group
// in selection order. budget >= rows selects everything.
std::vector<std::size_t> herding_select(const Matrix& features, std::span<const int> domain_labels,
                                        std::size_t budget);

FeatureMemory select_features(const Matrix& features, std::span<const int> domain_labels, std::size_t budget,
                              int space_task = 0);

// Residual projection p(f) = f + DgLayer(f) from the feature space of task
// target_task - 1 into that of target_task. W starts at zero, so a fresh
// projection is exactly the identity.
class KdcpProjection {
 public:
  KdcpProjection() = default;
  KdcpProjection(std::size_t d_f, std::size_t groups, int target_task);

  // Places the group Gaussians over `features` (previous-space features).
  void init_from_features(const Matrix& features, double min_width = 0.05, double max_width = 2.0);

  Matrix apply(const Matrix& features) const;
  std::vector<double> apply(std::span<const double> f) const;

  int target_task() const noexcept { return target_task_; }
  DgLayer& layer() noexcept { return layer_; }
  const DgLayer& layer() const noexcept { return layer_; }

 private:
  DgLayer layer_;
  int target_task_ = 0;
};

// One Adam step on align_loss(p(teacher), student) w.r.t. the projection's
// parameters. Returns the loss before the step.
double train_projection_step(KdcpProjection& proj, const Matrix& teacher, const Matrix& student, AdamState& opt);

// Gradient of align_loss(p(teacher), student) w.r.t. the flat layer parameters.
std::vector<double> projection_gradient(const KdcpProjection& proj, const Matrix& teacher, const Matrix& student,
                                        double* loss = nullptr);

// Maps every stored row through `proj`. The memory must be in the space the
// projection starts from (target_task - 1); afterwards it is tagged with
// target_task, so a second application with the same projection throws.
FeatureMemory project_memory(const FeatureMemory& mem, const KdcpProjection& proj);

struct AugmentConfig {
  double alpha = 0.5;
  std::size_t samples_per_feature = 1;
};

// Label-balanced replay batch: pick a label uniformly, a stored row of that
// label uniformly, then add N(0, (alpha * std_label)^2) per dimension.
// count == 0 means samples_per_feature * memory size.
DomainLabeledBatch augment_features(const FeatureMemory& mem, const AugmentConfig& cfg, Rng& rng,
                                    std::size_t count = 0);

// Versioned CSV snapshot: a "# kancfd-memory v1 ..." line, a header
// f_0..f_{d-1},domain_label,label,source_task[,x_0..], then one row per entry.
void save_memory(std::ostream& out, const FeatureMemory& mem);
FeatureMemory load_memory(std::istream& in);
void save_memory(const std::filesystem::path& path, const FeatureMemory& mem);
FeatureMemory load_memory(const std::filesystem::path& path);

}  // namespace kancfd
