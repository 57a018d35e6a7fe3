#include "kancfd/error.hpp"
#include "kancfd/fskdcp.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace kancfd {
namespace {

// Greedy mean matching within one label.
std::vector<std::size_t> herd(const Matrix& features, const std::vector<std::size_t>& rows, std::size_t quota) {
  const std::size_t d = features.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t r : rows)
    for (std::size_t c = 0; c < d; ++c) mean[c] += features(r, c);
  for (double& m : mean) m /= static_cast<double>(rows.size());

  std::vector<double> running(d, 0.0);
  std::vector<char> taken(rows.size(), 0);
  std::vector<std::size_t> picked;
  picked.reserve(quota);
  for (std::size_t step = 1; step <= quota; ++step) {
    const double inv = 1.0 / static_cast<double>(step);
    std::size_t best = rows.size();
    double best_dist = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (taken[j]) continue;
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = mean[c] - (running[c] + features(rows[j], c)) * inv;
        dist += diff * diff;
      }
      if (best == rows.size() || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    taken[best] = 1;
    for (std::size_t c = 0; c < d; ++c) running[c] += features(rows[best], c);
    picked.push_back(rows[best]);
  }
  return picked;
}

}  // namespace

std::vector<int> FeatureMemory::distinct_labels() const {
  std::set<int> s(domain_labels.begin(), domain_labels.end());
  return {s.begin(), s.end()};
}

void FeatureMemory::validate() const {
  const std::size_t m = features.rows();
  require(domain_labels.size() == m && labels.size() == m && source_tasks.size() == m,
          "FeatureMemory: label columns not aligned with rows");
  require(m <= budget, "FeatureMemory: budget exceeded");
  require(raw.rows() == 0 || raw.rows() == m, "FeatureMemory: raw rows not aligned");
}

std::vector<std::size_t> herding_select(const Matrix& features, std::span<const int> domain_labels,
                                        std::size_t budget) {
  require(features.rows() > 0, "select_features: empty input");
  require(domain_labels.size() == features.rows(), "select_features: labels length != rows");

  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t r = 0; r < features.rows(); ++r) by_label[domain_labels[r]].push_back(r);
  require(budget >= by_label.size(), "select_features: budget smaller than number of labels");

  std::vector<std::size_t> out;
  if (budget >= features.rows()) {
    for (const auto& [label, rows] : by_label) out.insert(out.end(), rows.begin(), rows.end());
    return out;
  }

  const std::size_t n_labels = by_label.size();
  std::vector<std::size_t> quota(n_labels), avail(n_labels);
  std::size_t li = 0;
  for (const auto& [label, rows] : by_label) {
    quota[li] = budget / n_labels + (li < budget % n_labels ? 1 : 0);
    avail[li] = rows.size();
    ++li;
  }
  std::size_t surplus = 0;
  for (std::size_t l = 0; l < n_labels; ++l)
    if (quota[l] > avail[l]) {
      surplus += quota[l] - avail[l];
      quota[l] = avail[l];
    }
  while (surplus > 0) {
    bool gave = false;
    for (std::size_t l = 0; l < n_labels && surplus > 0; ++l)
      if (quota[l] < avail[l]) {
        ++quota[l];
        --surplus;
        gave = true;
      }
    if (!gave) break;
  }

  li = 0;
  for (const auto& [label, rows] : by_label) {
    const auto picked = herd(features, rows, quota[li++]);
    out.insert(out.end(), picked.begin(), picked.end());
  }
  return out;
}

FeatureMemory select_features(const Matrix& features, std::span<const int> domain_labels, std::size_t budget,
                              int space_task) {
  const auto idx = herding_select(features, domain_labels, budget);
  FeatureMemory mem;
  mem.budget = budget;
  mem.space_task = space_task;
  mem.features = features.select_rows(idx);
  for (std::size_t r : idx) {
    const int d = domain_labels[r];
    mem.domain_labels.push_back(d);
    mem.labels.push_back(binary_from_domain_class(d));
    mem.source_tasks.push_back(task_from_domain_class(d));
  }
  return mem;
}

}  // namespace kancfd
