#include "kancfd/error.hpp"
#include "kancfd/fskdcp.hpp"

#include <cmath>
#include <map>

namespace kancfd {

DomainLabeledBatch augment_features(const FeatureMemory& mem, const AugmentConfig& cfg, Rng& rng, std::size_t count) {
  require(!mem.empty(), "augment_features: memory is empty");
  require(cfg.alpha >= 0.0, "augment_features: alpha must be non-negative");
  if (count == 0) count = cfg.samples_per_feature * mem.size();
  const std::size_t d = mem.features.cols();

  std::map<int, std::vector<std::size_t>> rows_of;
  for (std::size_t r = 0; r < mem.size(); ++r) rows_of[mem.domain_labels[r]].push_back(r);

  struct Stats {
    std::vector<std::size_t> rows;
    std::vector<double> sd;
  };
  std::vector<Stats> stats;
  stats.reserve(rows_of.size());
  for (auto& [label, rows] : rows_of) {
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (std::size_t r : rows)
      for (std::size_t c = 0; c < d; ++c) mean[c] += mem.features(r, c);
    for (double& m : mean) m /= static_cast<double>(rows.size());
    for (std::size_t r : rows)
      for (std::size_t c = 0; c < d; ++c) sd[c] += (mem.features(r, c) - mean[c]) * (mem.features(r, c) - mean[c]);
    for (double& s : sd) s = std::sqrt(s / static_cast<double>(rows.size()));
    stats.push_back({std::move(rows), std::move(sd)});
  }

  DomainLabeledBatch out{Matrix(count, d), {}, {}};
  out.domain_labels.reserve(count);
  out.labels.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto& st = stats[rng.below(stats.size())];
    const std::size_t r = st.rows[rng.below(st.rows.size())];
    for (std::size_t c = 0; c < d; ++c) {
      double v = mem.features(r, c);
      if (cfg.alpha > 0.0) v += cfg.alpha * st.sd[c] * rng.normal();
      out.features(s, c) = v;
    }
    out.domain_labels.push_back(mem.domain_labels[r]);
    out.labels.push_back(mem.labels[r]);
  }
  return out;
}

}  // namespace kancfd
