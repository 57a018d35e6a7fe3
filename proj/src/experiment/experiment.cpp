#include "kancfd/experiment.hpp"

#include "kancfd/error.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace kancfd {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

json nullable_af(const ScoreMatrix& m, std::size_t step, MetricKind kind) {
  if (step < 2) return nullptr;
  return average_forgetting(m, step, kind);
}

// Files whose bytes depend only on (config minus output_dir, seed).
std::vector<std::string> reproducible_artifacts(std::size_t tasks) {
  std::vector<std::string> names{"scores.csv", "summary.json", "stream.txt"};
  for (std::size_t t = 1; t <= tasks; ++t) names.push_back("memory_task" + std::to_string(t) + ".csv");
  return names;
}

}  // namespace

ExperimentRun run_protocol(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  TrainerConfig tc = cfg.trainer;
  tc.seed = cfg.seed;
  ExperimentRun run;
  run.stream = gen_sequence(cfg.protocol, cfg.seed, StreamOptions{tc.d_x, cfg.n_train, cfg.n_eval, cfg.shift_step});
  run.trainer = std::make_unique<Trainer>(tc);
  for (std::size_t t = 0; t < run.stream.size(); ++t) {
    const Dataset train = gen_domain(run.stream.domains[t], cfg.seed, Split::train);
    run.evals.push_back(gen_domain(run.stream.domains[t], cfg.seed, Split::eval));
    run.trainer->train_task(train);
    run.trainer->evaluate_all(run.evals);
    if (progress) progress(t, *run.trainer);
  }
  return run;
}

std::string summary_json(const ScoreMatrix& scores, const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = kSummarySchemaVersion;
  j["protocol"] = cfg.protocol;
  j["seed"] = cfg.seed;
  j["head"] = to_string(cfg.trainer.head);
  j["steps"] = json::array();
  for (std::size_t s = 1; s <= scores.steps(); ++s) {
    j["steps"].push_back({{"step", s},
                          {"aa_acc", scores.average(s - 1, MetricKind::acc)},
                          {"aa_auc", scores.average(s - 1, MetricKind::auc)},
                          {"af_acc", nullable_af(scores, s, MetricKind::acc)},
                          {"af_auc", nullable_af(scores, s, MetricKind::auc)}});
  }
  return j.dump(2) + "\n";
}

void run_experiment(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const std::string hash = config_hash(cfg);
  write_file(dir / "config.txt", canonical_config(cfg));

  json manifest;
  manifest["schema_version"] = kSummarySchemaVersion;
  manifest["config_hash"] = hash;
  manifest["seed"] = cfg.seed;
  manifest["protocol"] = cfg.protocol;
  try {
    std::size_t done = 0;
    auto run = run_protocol(cfg, [&](std::size_t t, const Trainer& tr) {
      save_memory(dir / ("memory_task" + std::to_string(t + 1) + ".csv"), tr.memory());
      done = t + 1;
    });
    {
      std::ostringstream os;
      save_stream(os, run.stream);
      write_file(dir / "stream.txt", os.str());
    }
    {
      std::ostringstream os;
      run.scores().write_csv(os);
      write_file(dir / "scores.csv", os.str());
    }
    write_file(dir / "summary.json", summary_json(run.scores(), cfg));
    manifest["status"] = "ok";
    manifest["tasks"] = done;
    json hashes = json::object();
    for (const auto& name : reproducible_artifacts(done)) hashes[name] = hex64(fnv1a64(read_file(dir / name)));
    manifest["artifacts"] = hashes;
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    throw;
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<std::string> verify_experiment(const fs::path& dir) {
  const json manifest = json::parse(read_file(dir / "manifest.json"));
  if (manifest.value("status", "") != "ok") throw std::runtime_error("verify: recorded run did not complete");
  ExperimentConfig cfg = load_config(dir / "config.txt");
  if (config_hash(cfg) != manifest.at("config_hash").get<std::string>())
    throw std::runtime_error("verify: config.txt does not match the manifest hash");

  const fs::path scratch = dir / ".verify";
  fs::remove_all(scratch);
  cfg.output_dir = scratch.string();
  run_experiment(cfg);
  const json fresh = json::parse(read_file(scratch / "manifest.json"));

  std::vector<std::string> mismatched;
  for (const auto& [name, h] : manifest.at("artifacts").items()) {
    if (!fresh.at("artifacts").contains(name) || fresh.at("artifacts").at(name) != h) mismatched.push_back(name);
  }
  fs::remove_all(scratch);
  return mismatched;
}

}  // namespace kancfd
