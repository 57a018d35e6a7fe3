#pragma once

#include "kancfd/adam.hpp"
#include "kancfd/extractor.hpp"
#include "kancfd/fskdcp.hpp"
#include "kancfd/head.hpp"
#include "kancfd/losses.hpp"
#include "kancfd/metrics.hpp"
#include "kancfd/rng.hpp"
#include "kancfd/synthbench.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace kancfd {

struct Ablation {
  bool use_sc = true;
  bool use_kd = true;
  bool use_kdcp = true;
  bool use_raw_replay = false;  // upper bound: replay stored raw inputs instead of features

  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct TrainerConfig {
  HeadKind head = HeadKind::dgkd;
  std::size_t d_x = 8;
  std::size_t d_f = 16;
  std::size_t hidden = 64;
  std::size_t groups = 16;
  std::size_t projection_groups = 16;
  std::size_t mlp_hidden = 32;
  LossConfig loss;
  Ablation ablation;
  AugmentConfig augment;
  bool sc_first_task = false;  // contrast real vs fake on task 1, before any memory exists
  std::size_t memory_budget = 500;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  std::size_t replay_batch = 64;
  double lr = 2e-4;
  double projection_lr = 5e-4;
  std::uint64_t seed = 1;

  void validate() const;
};

struct StepStats {
  double cls = 0.0;
  double sc = 0.0;
  double kd = 0.0;
  double align = 0.0;
  double total = 0.0;
};

// Sequential domain-incremental trainer. One instance owns the backbone,
// its frozen teacher, the head, the replay memory and the drift projection.
class Trainer {
 public:
  explicit Trainer(TrainerConfig cfg);

  // Trains on the next task; task indices are assigned in call order.
  void train_task(const Dataset& train);

  // Acc/AUC of the current model on each dataset (one per seen task).
  struct Evaluation {
    std::vector<double> acc;
    std::vector<double> auc;
  };
  Evaluation evaluate(const std::vector<Dataset>& evals) const;
  // Evaluates and appends a row to the score matrix.
  void evaluate_all(const std::vector<Dataset>& evals);

  Matrix features(const Matrix& x) const { return extractor_.forward(x); }
  Matrix logits(const Matrix& x) const { return head_->forward(extractor_.forward(x)); }

  const TrainerConfig& config() const noexcept { return cfg_; }
  int tasks_seen() const noexcept { return task_; }
  const FeatureExtractor& extractor() const noexcept { return extractor_; }
  const std::optional<FeatureExtractor>& teacher() const noexcept { return teacher_; }
  const Head& head() const noexcept { return *head_; }
  const FeatureMemory& memory() const noexcept { return memory_; }
  const std::optional<KdcpProjection>& projection() const noexcept { return projection_; }
  const ScoreMatrix& scores() const noexcept { return scores_; }
  const StepStats& last_step() const noexcept { return last_; }
  // Mean step losses of the most recent epoch.
  const StepStats& last_epoch() const noexcept { return epoch_mean_; }

 private:
  void begin_task(const Dataset& train);
  void step(const Matrix& x, std::span<const int> y);
  void end_task(const Dataset& train);
  DomainLabeledBatch replay_features(std::size_t count);
  std::vector<std::size_t> replay_rows(std::size_t count);

  TrainerConfig cfg_;
  Rng rng_;
  FeatureExtractor extractor_;
  std::optional<FeatureExtractor> teacher_;
  std::unique_ptr<Head> head_;
  FeatureMemory memory_;
  std::optional<KdcpProjection> projection_;
  AdamState extractor_opt_, head_opt_, projection_opt_;
  ScoreMatrix scores_;
  StepStats last_, epoch_mean_;
  int task_ = 0;  // tasks completed
};

}  // namespace kancfd
