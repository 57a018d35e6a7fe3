#include "kancfd/metrics.hpp"

#include "kancfd/error.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace kancfd {

double accuracy(std::span<const double> logits, std::span<const int> labels) {
  require(logits.size() == labels.size(), "accuracy: logits and labels differ in length");
  require(!logits.empty(), "accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) correct += ((logits[i] >= 0.0 ? 1 : 0) == (labels[i] ? 1 : 0));
  return 100.0 * static_cast<double>(correct) / static_cast<double>(logits.size());
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), "auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ContractViolation("auc: both classes must be present");
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return 100.0 * u / static_cast<double>(n_pos * n_neg);
}

void ScoreMatrix::append_row(std::vector<double> acc, std::vector<double> auc) {
  require(acc.size() == acc_.size() + 1 && auc.size() == acc.size(),
          "ScoreMatrix::append_row: row t must hold t + 1 entries");
  for (double v : acc) require(v >= 0.0 && v <= 100.0, "ScoreMatrix: accuracy outside [0, 100]");
  for (double v : auc) require(v >= 0.0 && v <= 100.0, "ScoreMatrix: AUC outside [0, 100]");
  acc_.push_back(std::move(acc));
  auc_.push_back(std::move(auc));
}

const std::vector<double>& ScoreMatrix::row(std::size_t step, MetricKind kind) const {
  require(step < acc_.size(), "ScoreMatrix: step out of range");
  return kind == MetricKind::acc ? acc_[step] : auc_[step];
}

double ScoreMatrix::at(std::size_t step, std::size_t task, MetricKind kind) const {
  const auto& r = row(step, kind);
  require(task < r.size(), "ScoreMatrix: task not yet seen at this step");
  return r[task];
}

double ScoreMatrix::average(std::size_t step, MetricKind kind) const {
  const auto& r = row(step, kind);
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

void ScoreMatrix::write_csv(std::ostream& out) const {
  out << "train_step,eval_task,acc,auc\n";
  out.precision(17);
  for (std::size_t i = 0; i < acc_.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) out << i + 1 << ',' << j + 1 << ',' << acc_[i][j] << ',' << auc_[i][j] << '\n';
}

double average_forgetting(std::span<const double> first, std::span<const double> last) {
  require(first.size() == last.size(), "average_forgetting: first and last differ in length");
  if (first.empty()) throw ContractViolation("AF undefined for first task");
  double s = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) s += first[i] - last[i];
  return s / static_cast<double>(first.size());
}

double average_forgetting(const ScoreMatrix& m, std::size_t step_1based, MetricKind kind) {
  if (step_1based < 2) throw ContractViolation("AF undefined for first task");
  require(step_1based <= m.steps(), "average_forgetting: step beyond recorded rows");
  std::vector<double> first, last;
  for (std::size_t i = 0; i + 1 < step_1based; ++i) {
    first.push_back(m.at(i, i, kind));
    last.push_back(m.at(step_1based - 1, i, kind));
  }
  return average_forgetting(first, last);
}

}  // namespace kancfd
