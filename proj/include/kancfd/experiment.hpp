#pragma once

#include "kancfd/metrics.hpp"
#include "kancfd/synthbench.hpp"
#include "kancfd/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace kancfd {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline constexpr int kConfigVersion = 1;
inline constexpr int kSummarySchemaVersion = 1;

struct ExperimentConfig {
  std::string protocol = "four-task";
  std::uint64_t seed = 1;
  TrainerConfig trainer;
  std::size_t n_train = 1000;
  std::size_t n_eval = 500;
  double shift_step = 0.0;  // 0 keeps the protocol default
  std::string output_dir = "results";

  void validate() const;  // throws ConfigError
};

// Flat "key = value" text with a "version = 1" line. Unknown keys, bad types
// and out-of-range values raise ConfigError naming the field.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical form: every key, fixed order, round-trip precision.
void write_config(std::ostream& out, const ExperimentConfig& cfg);
std::string canonical_config(const ExperimentConfig& cfg);
// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

// Applies "--ablate sc,kd,kdcp" style switches.
void apply_ablation_list(Ablation& ablation, const std::string& list);

struct ExperimentRun {
  TaskStream stream;
  std::vector<Dataset> evals;
  std::unique_ptr<Trainer> trainer;
  const ScoreMatrix& scores() const { return trainer->scores(); }
};

using ProgressFn = std::function<void(std::size_t task, const Trainer&)>;

// Generates the stream, then trains and evaluates task by task.
ExperimentRun run_protocol(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// Per-step AA / AF summary (AF null at step 1).
std::string summary_json(const ScoreMatrix& scores, const ExperimentConfig& cfg);

// Writes scores.csv, summary.json, config.txt, stream.txt, memory_task<k>.csv
// and manifest.json into cfg.output_dir. On failure a manifest with
// "status": "failed" and the error is still written before rethrowing.
void run_experiment(const ExperimentConfig& cfg);

// Re-runs the experiment into a scratch directory and compares artifact
// hashes with those recorded in `dir`. Returns the mismatching file names.
std::vector<std::string> verify_experiment(const std::filesystem::path& dir);

// Markdown tables of AA/AF per step, recomputed from scores.csv and checked
// against summary.json. Throws std::runtime_error listing missing files.
std::string report(const std::filesystem::path& dir);

// Principal-component projection of pooled eval features.
struct PcaResult {
  Matrix components;  // 2 x d, unit rows, largest-magnitude loading positive
  std::vector<double> mean;
  std::vector<double> explained;  // variance fraction of each component
  Matrix projected;               // N x 2
};
PcaResult pca2(const Matrix& x);

// CSV "pc1,pc2,domain,label,split" for every eval sample of seen tasks.
void dump_embeddings(const Trainer& trainer, const std::vector<Dataset>& evals, std::ostream& out);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace kancfd
