#include "kancfd/dgkd_head.hpp"
#include "kancfd/error.hpp"
#include "kancfd/experiment.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace kancfd;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string head;
  std::string ablate;
  bool replay_raw = false;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config file (defaults are used when omitted)");
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--head", o.head, "detector head: dgkd, mlp or groupkan");
  cmd->add_option("--ablate", o.ablate, "comma list of components to switch off: sc, kd, kdcp");
  cmd->add_flag("--replay-raw", o.replay_raw, "replay stored raw inputs (upper bound)");
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.head.empty()) {
    try {
      cfg.trainer.head = head_kind_from_string(o.head);
    } catch (const std::exception& e) {
      throw ConfigError("head", e.what());
    }
  }
  if (!o.ablate.empty()) apply_ablation_list(cfg.trainer.ablation, o.ablate);
  if (o.replay_raw) cfg.trainer.ablation.use_raw_replay = true;
  cfg.validate();
  return cfg;
}

void log_progress(std::size_t task, const Trainer& t) {
  const auto& s = t.scores();
  std::cerr << "task " << task + 1 << ": acc " << s.average(task, MetricKind::acc);
  if (task > 0) std::cerr << "  AF " << average_forgetting(s, task + 1, MetricKind::acc);
  std::cerr << '\n';
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continual forgery-detection experiments on synthetic domain streams"};
  app.require_subcommand(1);

  Overrides run_o;
  auto* run = app.add_subcommand("run", "train a protocol and write scores, summary, memory and manifest");
  add_override_flags(run, run_o);
  run->add_option("--out", run_o.out, "output directory (overrides output_dir)");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "print AA/AF tables of a finished run");
  rep->add_option("dir", report_dir, "results directory")->required();

  Overrides prof_o;
  std::size_t group = 0;
  double lo = -4.0, hi = 4.0;
  std::size_t points = 161;
  auto* prof = app.add_subcommand("dump-profile", "train, then write the composite activation of one group as CSV");
  add_override_flags(prof, prof_o);
  prof->add_option("--out", prof_o.out, "CSV path (stdout when omitted)");
  prof->add_option("--group", group, "group index");
  prof->add_option("--from", lo, "first scan point");
  prof->add_option("--to", hi, "last scan point");
  prof->add_option("--points", points, "number of scan points")->check(CLI::Range(2, 100000));

  Overrides emb_o;
  auto* emb = app.add_subcommand("dump-embeddings", "train, then write 2-D PCA of eval features as CSV");
  add_override_flags(emb, emb_o);
  emb->add_option("--out", emb_o.out, "CSV path (stdout when omitted)");

  std::string verify_dir;
  auto* ver = app.add_subcommand("verify", "re-run a finished experiment and compare artifact hashes");
  ver->add_option("dir", verify_dir, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      ExperimentConfig cfg = resolve(run_o);
      if (!run_o.out.empty()) cfg.output_dir = run_o.out;
      run_experiment(cfg);
      std::cout << report(cfg.output_dir);
      std::cout << "artifacts in " << cfg.output_dir << '\n';
    } else if (*rep) {
      std::cout << report(report_dir);
    } else if (*prof) {
      const ExperimentConfig cfg = resolve(prof_o);
      if (cfg.trainer.head != HeadKind::dgkd) throw ConfigError("head", "dump-profile needs the dgkd head");
      if (group >= cfg.trainer.groups) throw ConfigError("group", "must be below the configured group count");
      if (!(hi > lo)) throw ConfigError("to", "scan range is empty");
      auto result = run_protocol(cfg, log_progress);
      std::vector<double> xs(points);
      for (std::size_t i = 0; i < points; ++i) xs[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
      const auto& head = dynamic_cast<const DgkdHead&>(result.trainer->head());
      if (prof_o.out.empty()) {
        write_activation_profile_csv(std::cout, head, group, xs);
      } else {
        auto f = open_out(prof_o.out);
        write_activation_profile_csv(f, head, group, xs);
      }
    } else if (*emb) {
      const ExperimentConfig cfg = resolve(emb_o);
      auto result = run_protocol(cfg, log_progress);
      if (emb_o.out.empty()) {
        dump_embeddings(*result.trainer, result.evals, std::cout);
      } else {
        auto f = open_out(emb_o.out);
        dump_embeddings(*result.trainer, result.evals, f);
      }
    } else if (*ver) {
      const auto bad = verify_experiment(verify_dir);
      if (!bad.empty()) {
        std::cerr << "verify: artifacts differ:";
        for (const auto& b : bad) std::cerr << ' ' << b;
        std::cerr << '\n';
        return kExitRuntime;
      }
      std::cout << "verify: all artifacts reproduced\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedVersion& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
