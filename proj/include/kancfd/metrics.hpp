#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace kancfd {

// Percentage of correct decisions with threshold 0.5 on sigmoid(logit),
// i.e. logit >= 0 predicts the positive (fake) class.
double accuracy(std::span<const double> logits, std::span<const int> labels);

// Mann-Whitney AUC x 100 via average-rank summation (ties count one half).
double auc(std::span<const double> scores, std::span<const int> labels);

enum class MetricKind { acc, auc };

// Lower-triangular grid: row i = model after task i (0-based), column j <= i
// = evaluation on task j.
class ScoreMatrix {
 public:
  void append_row(std::vector<double> acc, std::vector<double> auc);

  std::size_t steps() const noexcept { return acc_.size(); }
  double at(std::size_t step, std::size_t task, MetricKind kind) const;
  const std::vector<double>& row(std::size_t step, MetricKind kind) const;

  // Mean over the tasks seen at `step` (0-based).
  double average(std::size_t step, MetricKind kind) const;

  // CSV "train_step,eval_task,acc,auc" with 1-based indices.
  void write_csv(std::ostream& out) const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::vector<std::vector<double>> acc_;
  std::vector<std::vector<double>> auc_;
};

// Mean drop from first-learned to latest score over the previous tasks:
// (1 / (t - 1)) * sum_{i < t} (first_i - last_i), with t the 1-based step.
double average_forgetting(std::span<const double> first, std::span<const double> last);
double average_forgetting(const ScoreMatrix& m, std::size_t step_1based, MetricKind kind);

}  // namespace kancfd
