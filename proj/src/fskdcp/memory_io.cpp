#include "kancfd/error.hpp"
#include "kancfd/fskdcp.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace kancfd {
namespace {

constexpr int kMemoryVersion = 1;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

double parse_real(const std::string& s, std::size_t line, const std::string& field) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ParseError(line, field, "not a number: '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, std::size_t line, const std::string& field) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError(line, field, "not an integer: '" + s + "'");
  return v;
}

}  // namespace

void save_memory(std::ostream& out, const FeatureMemory& mem) {
  mem.validate();
  const std::size_t d = mem.features.cols(), dx = mem.raw.cols();
  out << "# kancfd-memory v" << kMemoryVersion << " space_task=" << mem.space_task << " budget=" << mem.budget
      << " dims=" << d << " raw_dims=" << dx << '\n';
  for (std::size_t c = 0; c < d; ++c) out << "f_" << c << ',';
  out << "domain_label,label,source_task";
  for (std::size_t c = 0; c < dx; ++c) out << ",x_" << c;
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < mem.size(); ++r) {
    for (std::size_t c = 0; c < d; ++c) out << mem.features(r, c) << ',';
    out << mem.domain_labels[r] << ',' << mem.labels[r] << ',' << mem.source_tasks[r];
    for (std::size_t c = 0; c < dx; ++c) out << ',' << mem.raw(r, c);
    out << '\n';
  }
}

FeatureMemory load_memory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "header", "missing version line");
  std::istringstream hs(line);
  std::string hash, magic, version;
  hs >> hash >> magic >> version;
  if (hash != "#" || magic != "kancfd-memory") throw ParseError(1, "header", "not a kancfd memory snapshot");
  if (version != "v" + std::to_string(kMemoryVersion))
    throw UnsupportedVersion("memory snapshot version '" + version + "' is not supported (expected v" +
                             std::to_string(kMemoryVersion) + ")");
  FeatureMemory mem;
  std::size_t d = 0, dx = 0;
  bool have_dims = false;
  std::string kv;
  while (hs >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError(1, kv, "expected key=value");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "space_task") mem.space_task = static_cast<int>(parse_int(value, 1, key));
    else if (key == "budget") mem.budget = static_cast<std::size_t>(parse_int(value, 1, key));
    else if (key == "dims") { d = static_cast<std::size_t>(parse_int(value, 1, key)); have_dims = true; }
    else if (key == "raw_dims") dx = static_cast<std::size_t>(parse_int(value, 1, key));
    else throw ParseError(1, key, "unknown header key");
  }
  if (!have_dims) throw ParseError(1, "dims", "missing");
  if (!std::getline(in, line)) throw ParseError(2, "columns", "missing column header");
  const std::size_t expected = d + 3 + dx;
  if (split(line, ',').size() != expected) throw ParseError(2, "columns", "wrong column count");

  std::vector<double> feats, raw;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != expected)
      throw ParseError(lineno, "row", "expected " + std::to_string(expected) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < d; ++c) feats.push_back(parse_real(cells[c], lineno, "f_" + std::to_string(c)));
    mem.domain_labels.push_back(static_cast<int>(parse_int(cells[d], lineno, "domain_label")));
    mem.labels.push_back(static_cast<int>(parse_int(cells[d + 1], lineno, "label")));
    mem.source_tasks.push_back(static_cast<int>(parse_int(cells[d + 2], lineno, "source_task")));
    for (std::size_t c = 0; c < dx; ++c) raw.push_back(parse_real(cells[d + 3 + c], lineno, "x_" + std::to_string(c)));
  }
  const std::size_t m = mem.domain_labels.size();
  mem.features = Matrix(m, d, std::move(feats));
  if (dx > 0) mem.raw = Matrix(m, dx, std::move(raw));
  mem.validate();
  return mem;
}

void save_memory(const std::filesystem::path& path, const FeatureMemory& mem) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_memory(out, mem);
}

FeatureMemory load_memory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return load_memory(in);
}

}  // namespace kancfd
