#include "doctest.h"

#include "gradsuite.hpp"

#include "kancfd/error.hpp"
#include "kancfd/experiment.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace kancfd;

namespace {

ExperimentConfig tiny(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.protocol = "two-task-overlap";
  cfg.n_train = 120;
  cfg.n_eval = 60;
  cfg.trainer.epochs = 1;
  cfg.trainer.memory_budget = 20;
  cfg.output_dir = out.string();
  return cfg;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("kancfd_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KANCFD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig def;
  CHECK(def.trainer.loss.lambda_sc == 2.0);
  CHECK(def.trainer.loss.lambda_kd == 1.0);
  CHECK(def.trainer.loss.tau == 0.1);
  CHECK(def.trainer.batch_size == 64);
  CHECK(def.trainer.memory_budget == 500);
  CHECK(def.trainer.lr == 2e-4);
  CHECK(def.trainer.projection_lr == 5e-4);

  ExperimentConfig cfg;
  cfg.seed = 77;
  cfg.trainer.head = HeadKind::groupkan;
  cfg.trainer.ablation.use_kd = false;
  cfg.trainer.loss.tau = 0.3;
  cfg.shift_step = 2.75;
  const auto back = parse(canonical_config(cfg));
  CHECK(canonical_config(back) == canonical_config(cfg));
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
}

TEST_CASE("config hash tracks every field") {
  const ExperimentConfig base;
  const auto h = config_hash(base);
  CHECK(config_hash(ExperimentConfig{}) == h);
  std::vector<std::function<void(ExperimentConfig&)>> edits = {
      [](ExperimentConfig& c) { c.seed = 2; },
      [](ExperimentConfig& c) { c.protocol = "ten-task"; },
      [](ExperimentConfig& c) { c.trainer.head = HeadKind::mlp; },
      [](ExperimentConfig& c) { c.trainer.ablation.use_sc = false; },
      [](ExperimentConfig& c) { c.trainer.ablation.use_raw_replay = true; },
      [](ExperimentConfig& c) { c.trainer.loss.lambda_sc = 2.5; },
      [](ExperimentConfig& c) { c.trainer.groups = 2; },
      [](ExperimentConfig& c) { c.trainer.epochs = 3; },
      [](ExperimentConfig& c) { c.trainer.lr = 1e-3; },
      [](ExperimentConfig& c) { c.n_train = 50; },
      [](ExperimentConfig& c) { c.shift_step = 1.0; },
      [](ExperimentConfig& c) { c.output_dir = "elsewhere"; },
  };
  for (const auto& edit : edits) {
    ExperimentConfig c;
    edit(c);
    CHECK(config_hash(c) != h);
  }
}

TEST_CASE("config errors name the field") {
  auto field_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<no error>");
  };
  CHECK(field_of("version = 1\nepochs = many\n") == "epochs");
  CHECK(field_of("version = 1\nwarp = 9\n") == "warp");
  CHECK(field_of("version = 1\nhead = transformer\n") == "head");
  CHECK(field_of("version = 1\ntau = 0\n") == "tau");
  CHECK(field_of("version = 1\ngroups = 40\n") == "groups");
  CHECK(field_of("version = 1\nprotocol = six-task\n") == "protocol");
  CHECK(field_of("version = 1\nuse_sc = maybe\n") == "use_sc");
  CHECK(field_of("version = 1\nseed = 1\nseed = 2\n") == "seed");
  CHECK(field_of("epochs = 2\n") == "version");
  CHECK(field_of("version = 2\n") == "version");
  CHECK(field_of("version = 1\n# comment\n\nepochs = 3\n") == "<no error>");

  Ablation ab;
  apply_ablation_list(ab, "sc,kdcp");
  CHECK_FALSE(ab.use_sc);
  CHECK(ab.use_kd);
  CHECK_FALSE(ab.use_kdcp);
  CHECK_THROWS_AS(apply_ablation_list(ab, "sc,dropout"), ConfigError);
}

TEST_CASE("run writes artifacts and report matches the summary") {
  const auto dir = scratch("run");
  const auto cfg = tiny(dir);
  run_experiment(cfg);
  for (const char* f : {"scores.csv", "summary.json", "config.txt", "stream.txt", "manifest.json", "memory_task1.csv",
                        "memory_task2.csv"})
    CHECK(fs::exists(dir / f));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["config_hash"] == config_hash(cfg));
  CHECK(manifest["seed"] == cfg.seed);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  const std::string md = report(dir);
  const auto& steps = summary["steps"];
  REQUIRE(steps.size() == 2);
  CHECK(steps[0]["af_acc"].is_null());
  for (const auto& step : steps)
    for (const char* key : {"aa_acc", "af_acc", "aa_auc", "af_auc"}) CHECK(md.find(step[key].dump()) != std::string::npos);

  // Rebuild the summary numbers straight from scores.csv.
  std::ifstream in(dir / "scores.csv");
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> acc(2);
  while (std::getline(in, line)) {
    int step = 0, task = 0;
    double a = 0, u = 0;
    std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &step, &task, &a, &u);
    acc[static_cast<std::size_t>(step - 1)].push_back(a);
  }
  CHECK(std::abs((acc[0][0] - acc[1][0]) - steps[1]["af_acc"].get<double>()) <= 1e-9);
  CHECK(verify_experiment(dir).empty());
  fs::remove_all(dir);
}

TEST_CASE("identical runs produce identical bytes") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_experiment(tiny(a));
  run_experiment(tiny(b));
  for (const char* f : {"scores.csv", "summary.json", "memory_task2.csv"}) CHECK(slurp(a / f) == slurp(b / f));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("report lists missing artifacts") {
  const auto dir = scratch("empty");
  fs::create_directories(dir);
  try {
    report(dir);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("scores.csv") != std::string::npos);
    CHECK(what.find("summary.json") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("failed run leaves an error manifest") {
  const auto dir = scratch("fail");
  auto cfg = tiny(dir);
  cfg.trainer.lr = 1e300;
  CHECK_THROWS(run_experiment(cfg));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "failed");
  CHECK_FALSE(manifest["error"].get<std::string>().empty());
  fs::remove_all(dir);
}

TEST_CASE("pca") {
  Rng rng(31);
  const std::size_t d = 16, n = 20000;
  Matrix x(n, d);
  for (double& v : x.data()) v = rng.normal();
  const auto p = pca2(x);
  CHECK(p.explained[0] + p.explained[1] == doctest::Approx(2.0 / d).epsilon(0.15));
  for (std::size_t k = 0; k < 2; ++k) {
    double norm = 0.0, big = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      norm += p.components(k, c) * p.components(k, c);
      if (std::abs(p.components(k, c)) > std::abs(big)) big = p.components(k, c);
    }
    CHECK(norm == doctest::Approx(1.0));
    CHECK(big > 0.0);
  }

  const Matrix y = gradsuite::random_matrix(rng, 50, 5, -1, 1);
  Matrix twice = y;
  twice.append_rows(y);
  const auto a = pca2(y), b = pca2(twice);
  for (std::size_t r = 0; r < 50; ++r)
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(b.projected(r, k) == doctest::Approx(a.projected(r, k)).epsilon(1e-9));
      CHECK(b.projected(r + 50, k) == b.projected(r, k));
    }
  CHECK_THROWS_AS(pca2(Matrix(10, 1)), ContractViolation);
}

TEST_CASE("embedding dump has one row per eval sample") {
  auto cfg = tiny(scratch("emb"));
  const auto run = run_protocol(cfg);
  std::ostringstream os;
  dump_embeddings(*run.trainer, run.evals, os);
  std::size_t lines = 0;
  for (char c : os.str()) lines += c == '\n';
  CHECK(lines == 1 + 2 * cfg.n_eval);
  CHECK(os.str().rfind("pc1,pc2,domain,label,split\n", 0) == 0);
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "version = 1\nprotocol = two-task-overlap\nn_train = 80\nn_eval = 40\nepochs = 1\nmemory_budget = 10\n";
    std::ofstream bad(dir / "bad.cfg");
    bad << "version = 1\nepochs = lots\n";
  }
  const std::string out = (dir / "out").string();
  CHECK(run_cli("run --config " + (dir / "run.cfg").string() + " --out " + out) == 0);
  CHECK(run_cli("report " + out) == 0);
  CHECK(run_cli("verify " + out) == 0);
  CHECK(run_cli("dump-embeddings --config " + (dir / "run.cfg").string() + " --out " + (dir / "e.csv").string()) == 0);
  CHECK(run_cli("run --config " + (dir / "bad.cfg").string() + " --out " + out) == 2);
  CHECK(run_cli("run --ablate sc,wings --out " + out) == 2);
  CHECK(run_cli("run --config " + (dir / "missing.cfg").string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("report " + (dir / "nowhere").string()) == 3);
  fs::remove_all(dir);
}

}
