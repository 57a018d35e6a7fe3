#include "kancfd/experiment.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace kancfd {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CsvCell {
  double value;
  std::string text;
};

}  // namespace

std::string report(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const char* name : {"scores.csv", "summary.json"})
    if (!fs::exists(dir / name)) missing.push_back((dir / name).string());
  if (!missing.empty()) {
    std::string msg = "report: missing artifacts:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw std::runtime_error(msg);
  }

  // step -> task -> (acc, auc)
  std::map<std::size_t, std::map<std::size_t, std::pair<CsvCell, CsvCell>>> grid;
  {
    std::ifstream in(dir / "scores.csv");
    std::string line;
    std::getline(in, line);
    if (line != "train_step,eval_task,acc,auc") throw std::runtime_error("report: unexpected scores.csv header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream is(line);
      std::string step, task, acc, auc_s;
      std::getline(is, step, ',');
      std::getline(is, task, ',');
      std::getline(is, acc, ',');
      std::getline(is, auc_s, ',');
      grid[std::stoul(step)][std::stoul(task)] = {{std::stod(acc), acc}, {std::stod(auc_s), auc_s}};
    }
  }
  ScoreMatrix scores;
  for (const auto& [step, row] : grid) {
    std::vector<double> acc, auc_v;
    for (const auto& [task, cells] : row) {
      acc.push_back(cells.first.value);
      auc_v.push_back(cells.second.value);
    }
    scores.append_row(std::move(acc), std::move(auc_v));
  }

  std::ifstream sin(dir / "summary.json");
  const json summary = json::parse(sin);
  const auto& steps = summary.at("steps");
  if (steps.size() != scores.steps()) throw std::runtime_error("report: summary.json and scores.csv disagree on steps");

  std::ostringstream md;
  md << "## " << summary.value("protocol", "") << " (head " << summary.value("head", "") << ", seed "
     << summary.value("seed", 0) << ")\n\n";
  md << "| step | AA acc | AF acc | AA auc | AF auc |\n|---|---|---|---|---|\n";
  for (std::size_t s = 1; s <= scores.steps(); ++s) {
    const auto& js = steps.at(s - 1);
    // Recompute from the CSV and insist it agrees with the JSON summary.
    const auto check = [&](const char* key, double recomputed) {
      const double recorded = js.at(key).get<double>();
      if (std::abs(recorded - recomputed) > 1e-9)
        throw std::runtime_error(std::string("report: ") + key + " at step " + std::to_string(s) +
                                 " differs between scores.csv and summary.json");
    };
    check("aa_acc", scores.average(s - 1, MetricKind::acc));
    check("aa_auc", scores.average(s - 1, MetricKind::auc));
    if (s >= 2) {
      check("af_acc", average_forgetting(scores, s, MetricKind::acc));
      check("af_auc", average_forgetting(scores, s, MetricKind::auc));
    }
    md << "| " << s << " | " << js.at("aa_acc").dump() << " | " << js.at("af_acc").dump() << " | "
       << js.at("aa_auc").dump() << " | " << js.at("af_auc").dump() << " |\n";
  }

  md << "\n| step |";
  for (std::size_t t = 1; t <= scores.steps(); ++t) md << " task " << t << " acc / auc |";
  md << "\n|---|";
  for (std::size_t t = 1; t <= scores.steps(); ++t) md << "---|";
  md << '\n';
  for (const auto& [step, row] : grid) {
    md << "| " << step << " |";
    for (std::size_t t = 1; t <= scores.steps(); ++t) {
      const auto it = row.find(t);
      if (it == row.end())
        md << " - |";
      else
        md << ' ' << it->second.first.text << " / " << it->second.second.text << " |";
    }
    md << '\n';
  }
  return md.str();
}

}  // namespace kancfd
