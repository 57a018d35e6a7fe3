#include "doctest.h"

#include "kancfd/error.hpp"
#include "kancfd/synthbench.hpp"

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

using namespace kancfd;

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::set<std::string> row_keys(const Dataset& d) {
  std::set<std::string> keys;
  for (std::size_t r = 0; r < d.size(); ++r) {
    std::ostringstream os;
    os.precision(17);
    for (double v : d.x.row(r)) os << v << ',';
    keys.insert(os.str());
  }
  return keys;
}

}  // namespace

TEST_SUITE("synthbench") {

TEST_CASE("generation is deterministic and sized") {
  const auto s = gen_sequence("four-task", 5);
  const auto& spec = s.domains[1];
  const auto a = gen_domain(spec, 5, Split::train), b = gen_domain(spec, 5, Split::train);
  CHECK(a.x == b.x);
  CHECK(a.labels == b.labels);
  CHECK(a.size() == 1000);
  CHECK(gen_domain(spec, 5, Split::eval).size() == 500);
  const auto odd = gen_domain(spec, 5, Split::train, 7);
  int fakes = 0;
  for (int y : odd.labels) fakes += y;
  CHECK(fakes == 3);
  for (int d : a.domains) CHECK(d == 1);
  CHECK_FALSE(gen_domain(spec, 6, Split::train).x == a.x);
}

TEST_CASE("real-class sample mean matches the domain parameters") {
  const auto s = gen_sequence("four-task", 2);
  const auto& spec = s.domains[2];
  const std::size_t n = 20000;
  const auto data = gen_domain(spec, 2, Split::train, n);
  const std::size_t d = spec.d_x();
  for (std::size_t i = 0; i < d; ++i) {
    double expect = spec.shift[i], second = 0.0;
    double wsum = 0.0;
    for (const auto& c : spec.real) wsum += c.weight;
    for (const auto& c : spec.real) {
      expect += c.weight / wsum * c.mean[i];
      const double m = spec.shift[i] + c.mean[i];
      second += c.weight / wsum * (c.stddev[i] * c.stddev[i] + m * m);
    }
    const double var = second - expect * expect;
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t r = 0; r < n; ++r)
      if (data.labels[r] == 0) {
        sum += data.x(r, i);
        ++k;
      }
    CHECK(std::abs(sum / static_cast<double>(k) - expect) <= 3.0 * std::sqrt(var / static_cast<double>(k)));
  }
}

TEST_CASE("protocol shapes") {
  CHECK(gen_sequence("ten-task", 1).size() == 10);
  CHECK(gen_sequence("four-task", 1).size() == 4);
  CHECK(gen_sequence("two-task-overlap", 1).size() == 2);
  CHECK_THROWS_WITH_AS(gen_sequence("five-task", 1), doctest::Contains("five-task"), ContractViolation);
  for (const auto& p : known_protocols())
    for (const auto& dom : gen_sequence(p, 3).domains) {
      CHECK(dom.real != dom.fake);
      CHECK(dom.d_x() == 8);
    }
}

TEST_CASE("separated and overlapping domain distances") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto sep = gen_sequence("two-task-separated", seed);
    const double sigma = std::max(sep.domains[0].max_stddev(), sep.domains[1].max_stddev());
    CHECK(distance(sep.domains[0].mean(), sep.domains[1].mean()) >= 10.0 * sigma);
    const auto ov = gen_sequence("two-task-overlap", seed);
    const double s2 = std::max(ov.domains[0].max_stddev(), ov.domains[1].max_stddev());
    CHECK(distance(ov.domains[0].mean(), ov.domains[1].mean()) <= s2);
  }
}

TEST_CASE("consecutive domain means differ by the configured shift") {
  for (double step : {0.0, 1.5, 8.0}) {
    StreamOptions opt;
    opt.shift_step = step;
    for (const char* p : {"four-task", "ten-task"}) {
      const auto s = gen_sequence(p, 4, opt);
      CHECK(s.shift_step > 0.0);
      if (step > 0.0) CHECK(s.shift_step == step);
      for (std::size_t t = 1; t < s.size(); ++t)
        CHECK(std::abs(distance(s.domains[t].mean(), s.domains[t - 1].mean()) - s.shift_step) <= 1e-9);
    }
  }
}

TEST_CASE("the walk never returns near an earlier domain") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    for (const char* p : {"four-task", "ten-task"}) {
      const auto s = gen_sequence(p, seed);
      for (std::size_t t = 2; t < s.size(); ++t)
        for (std::size_t k = 0; k + 1 < t; ++k)
          CHECK(distance(s.domains[t].mean(), s.domains[k].mean()) >= s.shift_step);
    }
}

TEST_CASE("train and eval splits are disjoint") {
  for (const auto& dom : gen_sequence("ten-task", 8, StreamOptions{8, 60, 60}).domains) {
    const auto tr = row_keys(gen_domain(dom, 8, Split::train)), ev = row_keys(gen_domain(dom, 8, Split::eval));
    CHECK(tr.size() == 60);
    for (const auto& k : ev) CHECK(tr.count(k) == 0);
  }
}

TEST_CASE("invalid covariance is rejected") {
  auto spec = gen_sequence("four-task", 1).domains[0];
  spec.real[0].stddev[2] = 0.0;
  CHECK_THROWS_AS(gen_domain(spec, 1, Split::train), ContractViolation);
  spec.real[0].stddev[2] = std::nan("");
  CHECK_THROWS_AS(gen_domain(spec, 1, Split::train), ContractViolation);
}

TEST_CASE("stream round trip") {
  StreamOptions opt;
  opt.shift_step = 4.25;
  const auto s = gen_sequence("four-task", 9, opt);
  std::stringstream ss;
  save_stream(ss, s);
  const std::string text = ss.str();
  const auto back = load_stream(ss);
  CHECK(back == s);
  for (std::size_t t = 0; t < s.size(); ++t)
    CHECK(gen_domain(back.domains[t], back.seed, Split::eval).x == gen_domain(s.domains[t], s.seed, Split::eval).x);

  const auto path = std::filesystem::temp_directory_path() / "kancfd_stream_test.txt";
  save_stream(path, s);
  CHECK(load_stream(path) == s);
  std::filesystem::remove(path);

  std::istringstream trunc(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_stream(trunc), ParseError);
  std::string v9 = text;
  v9.replace(v9.find("version = 1"), 11, "version = 9");
  std::istringstream bad(v9);
  CHECK_THROWS_AS(load_stream(bad), UnsupportedVersion);
  std::string garbled = text;
  const auto at = garbled.find("domains = ");
  garbled.replace(at, garbled.find('\n', at) - at, "domains = two");
  std::istringstream garbage(garbled);
  try {
    load_stream(garbage);
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "domains");
    CHECK(e.line() > 1);
  }
}

TEST_CASE("dataset csv") {
  const auto d = gen_domain(gen_sequence("four-task", 1).domains[0], 1, Split::eval, 3);
  std::ostringstream os;
  write_dataset_csv(os, d);
  const std::string text = os.str();
  CHECK(text.rfind("x_0,x_1,x_2,x_3,x_4,x_5,x_6,x_7,label,domain\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 4);
}

}
