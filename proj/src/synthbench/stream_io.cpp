#include "kancfd/error.hpp"
#include "kancfd/synthbench.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace kancfd {
namespace {

constexpr int kStreamVersion = 1;

// Stream files are "key = value" lines. Vectors are space separated.
// Domain keys are flattened: domain.<k>.<class>.<c>.<field>.
struct Entry {
  std::string value;
  std::size_t line;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Fields {
 public:
  explicit Fields(std::map<std::string, Entry> m) : m_(std::move(m)) {}

  const Entry& get(const std::string& key) const {
    const auto it = m_.find(key);
    if (it == m_.end()) throw ParseError(last_line_, key, "missing required key");
    return it->second;
  }
  std::size_t last_line() const { return last_line_; }
  void set_last_line(std::size_t l) { last_line_ = l; }

  std::string str(const std::string& key) const { return get(key).value; }

  long long integer(const std::string& key) const {
    const auto& e = get(key);
    long long v = 0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
      throw ParseError(e.line, key, "expected an integer, got '" + e.value + "'");
    return v;
  }

  double real(const std::string& key) const {
    const auto& e = get(key);
    return parse_real(e.value, e.line, key);
  }

  std::vector<double> vec(const std::string& key, std::size_t expected) const {
    const auto& e = get(key);
    std::istringstream is(e.value);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_real(tok, e.line, key));
    if (out.size() != expected)
      throw ParseError(e.line, key, "expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
    return out;
  }

 private:
  static double parse_real(const std::string& s, std::size_t line, const std::string& key) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw ParseError(line, key, "expected a real number, got '" + s + "'");
    return v;
  }

  std::map<std::string, Entry> m_;
  std::size_t last_line_ = 0;
};

void write_vec(std::ostream& out, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
}

void write_components(std::ostream& out, const std::string& prefix, const std::vector<MixtureComponent>& comps) {
  out << prefix << ".components = " << comps.size() << '\n';
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const std::string p = prefix + '.' + std::to_string(c);
    out << p << ".weight = " << comps[c].weight << '\n';
    out << p << ".mean = ";
    write_vec(out, comps[c].mean);
    out << '\n' << p << ".stddev = ";
    write_vec(out, comps[c].stddev);
    out << '\n';
  }
}

std::vector<MixtureComponent> read_components(const Fields& f, const std::string& prefix, std::size_t d) {
  const long long n = f.integer(prefix + ".components");
  if (n < 1) throw ParseError(f.get(prefix + ".components").line, prefix + ".components", "must be >= 1");
  std::vector<MixtureComponent> comps;
  for (long long c = 0; c < n; ++c) {
    const std::string p = prefix + '.' + std::to_string(c);
    comps.push_back({f.real(p + ".weight"), f.vec(p + ".mean", d), f.vec(p + ".stddev", d)});
  }
  return comps;
}

}  // namespace

void save_stream(std::ostream& out, const TaskStream& stream) {
  out.precision(17);
  out << "# kancfd task stream\n";
  out << "version = " << kStreamVersion << '\n';
  out << "protocol = " << stream.protocol << '\n';
  out << "seed = " << stream.seed << '\n';
  out << "shift_step = " << stream.shift_step << '\n';
  out << "d_x = " << (stream.domains.empty() ? 0 : stream.domains[0].d_x()) << '\n';
  out << "domains = " << stream.domains.size() << '\n';
  for (std::size_t k = 0; k < stream.domains.size(); ++k) {
    const auto& d = stream.domains[k];
    const std::string p = "domain." + std::to_string(k);
    out << p << ".id = " << d.id << '\n';
    out << p << ".n_train = " << d.n_train << '\n';
    out << p << ".n_eval = " << d.n_eval << '\n';
    out << p << ".shift = ";
    write_vec(out, d.shift);
    out << '\n';
    write_components(out, p + ".real", d.real);
    write_components(out, p + ".fake", d.fake);
  }
}

TaskStream load_stream(std::istream& in) {
  std::map<std::string, Entry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, t, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(lineno, "", "empty key");
    if (!entries.emplace(key, Entry{trim(t.substr(eq + 1)), lineno}).second)
      throw ParseError(lineno, key, "duplicate key");
  }
  Fields f(std::move(entries));
  f.set_last_line(lineno + 1);

  const long long version = f.integer("version");
  if (version != kStreamVersion)
    throw UnsupportedVersion("task stream version " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kStreamVersion) + ")");
  TaskStream s;
  s.protocol = f.str("protocol");
  s.seed = static_cast<std::uint64_t>(f.integer("seed"));
  s.shift_step = f.real("shift_step");
  const auto d = static_cast<std::size_t>(f.integer("d_x"));
  const long long n = f.integer("domains");
  if (n < 1) throw ParseError(f.get("domains").line, "domains", "must be >= 1");
  for (long long k = 0; k < n; ++k) {
    const std::string p = "domain." + std::to_string(k);
    DomainSpec spec;
    spec.id = static_cast<int>(f.integer(p + ".id"));
    spec.n_train = static_cast<std::size_t>(f.integer(p + ".n_train"));
    spec.n_eval = static_cast<std::size_t>(f.integer(p + ".n_eval"));
    spec.shift = f.vec(p + ".shift", d);
    spec.real = read_components(f, p + ".real", d);
    spec.fake = read_components(f, p + ".fake", d);
    s.domains.push_back(std::move(spec));
  }
  return s;
}

void save_stream(const std::filesystem::path& path, const TaskStream& stream) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_stream(out, stream);
}

TaskStream load_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return load_stream(in);
}

}  // namespace kancfd
