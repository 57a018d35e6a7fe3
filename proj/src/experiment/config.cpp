#include "kancfd/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace kancfd {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::string fmt_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// One schema row per key: how to read it into the config and how to print it.
struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <typename T>
Field size_field(std::string key, T ExperimentConfig::*member) {
  return {key, [key, member](ExperimentConfig& c, const std::string& v) { c.*member = static_cast<T>(parse_uint(key, v)); },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field trainer_size(std::string key, std::size_t TrainerConfig::*member) {
  return {key, [key, member](ExperimentConfig& c, const std::string& v) { c.trainer.*member = parse_uint(key, v); },
          [member](const ExperimentConfig& c) { return std::to_string(c.trainer.*member); }};
}

Field trainer_real(std::string key, double TrainerConfig::*member) {
  return {key, [key, member](ExperimentConfig& c, const std::string& v) { c.trainer.*member = parse_real(key, v); },
          [member](const ExperimentConfig& c) { return fmt_real(c.trainer.*member); }};
}

Field loss_real(std::string key, double LossConfig::*member) {
  return {key, [key, member](ExperimentConfig& c, const std::string& v) { c.trainer.loss.*member = parse_real(key, v); },
          [member](const ExperimentConfig& c) { return fmt_real(c.trainer.loss.*member); }};
}

Field ablation_bool(std::string key, bool Ablation::*member) {
  return {key,
          [key, member](ExperimentConfig& c, const std::string& v) { c.trainer.ablation.*member = parse_bool(key, v); },
          [member](const ExperimentConfig& c) { return std::string(c.trainer.ablation.*member ? "true" : "false"); }};
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"protocol", [](ExperimentConfig& c, const std::string& v) { c.protocol = v; },
       [](const ExperimentConfig& c) { return c.protocol; }},
      size_field("seed", &ExperimentConfig::seed),
      {"head",
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.trainer.head = head_kind_from_string(v);
         } catch (const std::exception& e) {
           throw ConfigError("head", e.what());
         }
       },
       [](const ExperimentConfig& c) { return to_string(c.trainer.head); }},
      ablation_bool("use_sc", &Ablation::use_sc),
      ablation_bool("use_kd", &Ablation::use_kd),
      ablation_bool("use_kdcp", &Ablation::use_kdcp),
      ablation_bool("replay_raw", &Ablation::use_raw_replay),
      loss_real("lambda_sc", &LossConfig::lambda_sc),
      loss_real("lambda_kd", &LossConfig::lambda_kd),
      loss_real("tau", &LossConfig::tau),
      {"normalize_features",
       [](ExperimentConfig& c, const std::string& v) { c.trainer.loss.normalize_features = parse_bool("normalize_features", v); },
       [](const ExperimentConfig& c) { return std::string(c.trainer.loss.normalize_features ? "true" : "false"); }},
      trainer_size("d_x", &TrainerConfig::d_x),
      trainer_size("d_f", &TrainerConfig::d_f),
      trainer_size("hidden", &TrainerConfig::hidden),
      trainer_size("groups", &TrainerConfig::groups),
      trainer_size("projection_groups", &TrainerConfig::projection_groups),
      trainer_size("mlp_hidden", &TrainerConfig::mlp_hidden),
      trainer_size("memory_budget", &TrainerConfig::memory_budget),
      {"sc_first_task",
       [](ExperimentConfig& c, const std::string& v) { c.trainer.sc_first_task = parse_bool("sc_first_task", v); },
       [](const ExperimentConfig& c) { return std::string(c.trainer.sc_first_task ? "true" : "false"); }},
      {"augment_alpha",
       [](ExperimentConfig& c, const std::string& v) { c.trainer.augment.alpha = parse_real("augment_alpha", v); },
       [](const ExperimentConfig& c) { return fmt_real(c.trainer.augment.alpha); }},
      trainer_size("epochs", &TrainerConfig::epochs),
      trainer_size("batch_size", &TrainerConfig::batch_size),
      trainer_size("replay_batch", &TrainerConfig::replay_batch),
      trainer_real("lr", &TrainerConfig::lr),
      trainer_real("projection_lr", &TrainerConfig::projection_lr),
      size_field("n_train", &ExperimentConfig::n_train),
      size_field("n_eval", &ExperimentConfig::n_eval),
      {"shift_step", [](ExperimentConfig& c, const std::string& v) { c.shift_step = parse_real("shift_step", v); },
       [](const ExperimentConfig& c) { return fmt_real(c.shift_step); }},
      {"output_dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; },
       [](const ExperimentConfig& c) { return c.output_dir; }},
  };
  return fields;
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto protocols = known_protocols();
  if (std::find(protocols.begin(), protocols.end(), protocol) == protocols.end())
    throw ConfigError("protocol", "unknown protocol '" + protocol + "'");
  if (n_train < 4) throw ConfigError("n_train", "must be at least 4");
  if (n_eval < 2) throw ConfigError("n_eval", "must be at least 2");
  if (!(shift_step >= 0.0) || !std::isfinite(shift_step)) throw ConfigError("shift_step", "must be finite and non-negative");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  const auto& t = trainer;
  if (t.loss.tau <= 0.0) throw ConfigError("tau", "must be positive");
  if (t.loss.lambda_sc < 0.0) throw ConfigError("lambda_sc", "must be non-negative");
  if (t.loss.lambda_kd < 0.0) throw ConfigError("lambda_kd", "must be non-negative");
  if (t.d_x < 2) throw ConfigError("d_x", "must be at least 2");
  if (t.d_f < 2) throw ConfigError("d_f", "must be at least 2");
  if (t.hidden < 1) throw ConfigError("hidden", "must be positive");
  if (t.groups < 1 || t.groups > t.d_f) throw ConfigError("groups", "must be in [1, d_f]");
  if (t.projection_groups < 1 || t.projection_groups > t.d_f)
    throw ConfigError("projection_groups", "must be in [1, d_f]");
  if (t.mlp_hidden < 1) throw ConfigError("mlp_hidden", "must be positive");
  if (t.memory_budget < 2) throw ConfigError("memory_budget", "must be at least 2");
  if (t.augment.alpha < 0.0) throw ConfigError("augment_alpha", "must be non-negative");
  if (t.epochs < 1) throw ConfigError("epochs", "must be at least 1");
  if (t.batch_size < 2) throw ConfigError("batch_size", "must be at least 2");
  if (t.replay_batch < 1) throw ConfigError("replay_batch", "must be at least 1");
  if (!(t.lr > 0.0)) throw ConfigError("lr", "must be positive");
  if (!(t.projection_lr > 0.0)) throw ConfigError("projection_lr", "must be positive");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, const Field*> by_key;
  for (const auto& f : schema()) by_key[f.key] = &f;

  std::set<std::string> seen;
  bool have_version = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key (line " + std::to_string(lineno) + ")");
    if (key == "version") {
      if (parse_uint(key, value) != kConfigVersion)
        throw ConfigError("version", "unsupported config version " + value + " (expected " +
                                         std::to_string(kConfigVersion) + ")");
      have_version = true;
      continue;
    }
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError(key, "unknown key (line " + std::to_string(lineno) + ")");
    it->second->set(cfg, value);
  }
  if (!have_version) throw ConfigError("version", "missing version line");
  cfg.trainer.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << "# kancfd experiment config\n";
  out << "version = " << kConfigVersion << '\n';
  for (const auto& f : schema()) out << f.key << " = " << f.get(cfg) << '\n';
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(canonical_config(cfg))); }

void apply_ablation_list(Ablation& ablation, const std::string& list) {
  std::istringstream is(list);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "sc") ablation.use_sc = false;
    else if (item == "kd") ablation.use_kd = false;
    else if (item == "kdcp") ablation.use_kdcp = false;
    else throw ConfigError("ablate", "unknown switch '" + item + "' (expected sc, kd or kdcp)");
  }
}

}  // namespace kancfd
