#include "doctest.h"

#include "gradsuite.hpp"

#include "kancfd/baseline_heads.hpp"
#include "kancfd/dg_layer.hpp"
#include "kancfd/dgkd_head.hpp"
#include "kancfd/error.hpp"
#include "kancfd/extractor.hpp"
#include "kancfd/head.hpp"
#include "kancfd/rbf.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

using namespace kancfd;

namespace {

DgLayer simple_layer(double w0, double w1) {
  DgLayer l(1, 2, 1, 1);
  l.weights() = Matrix{{w0, w1}};
  l.rbfs()[0] = {0.0, 1.0};
  return l;
}

std::vector<unsigned char> bytes_of(const DgLayer& l) {
  const auto p = l.parameters();
  std::vector<unsigned char> out(p.size() * sizeof(double));
  std::memcpy(out.data(), p.data(), out.size());
  return out;
}

}  // namespace

TEST_SUITE("kanheads") {

TEST_CASE("rbf values and partials") {
  const RbfParams p{0.0, 1.0};
  CHECK(rbf_eval(0.0, p) == 1.0);
  CHECK(rbf_eval(1.0, p) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(rbf_eval(10.0, p) < 2e-22);
  const auto at_peak = rbf_grad(0.0, p);
  CHECK(at_peak.d_x == 0.0);
  CHECK(at_peak.d_center == 0.0);
  CHECK(at_peak.d_width == 0.0);
  const auto g = rbf_grad(1.0, p);
  CHECK(g.d_x == doctest::Approx(-0.60653066).epsilon(1e-7));
  CHECK(g.d_center == -g.d_x);
  RbfParams tiny{0.0, 1e-9};
  clamp_width(tiny);
  CHECK(tiny.width == kMinWidth);
  CHECK(gradsuite::rbf(200) < 1e-6);
}

TEST_CASE("dg layer hand values") {
  const auto l = simple_layer(1, 1);
  CHECK(l.forward(std::vector<double>{0, 0})[0] == doctest::Approx(2.0));
  CHECK(std::abs(l.forward(std::vector<double>{0, 10})[0] - 1.0) < 1e-20);
  DgLayer zero(1, 5, 3, 2);
  for (double v : zero.forward(std::vector<double>{1, 2, 3, 4, 5})) CHECK(v == 0.0);
  CHECK_THROWS_AS(l.forward(std::vector<double>{1, 2, 3}), ContractViolation);
}

TEST_CASE("dg layer groups absorb the remainder") {
  DgLayer l(1, 10, 1, 3);
  CHECK(l.group_width() == 3);
  CHECK(l.group_of(0) == 0);
  CHECK(l.group_of(5) == 1);
  CHECK(l.group_of(9) == 2);
  CHECK(l.group_range(2) == std::pair<std::size_t, std::size_t>{6, 10});
}

TEST_CASE("group sharing perturbs a whole group identically") {
  Rng rng(2);
  DgLayer l(1, 6, 6, 2);
  l.weights() = Matrix::identity(6);
  const std::vector<double> x{0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
  const auto before = l.forward(x);
  l.rbfs()[0].center += 0.2;
  const auto after = l.forward(x);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(after[i] - before[i] == doctest::Approx(after[0] - before[0]).epsilon(1e-15));
    CHECK(after[i] != before[i]);
  }
  for (std::size_t i = 3; i < 6; ++i) CHECK(after[i] == before[i]);
}

TEST_CASE("dg layer gradients") { CHECK(gradsuite::dg_layer(100) < 1e-4); }

TEST_CASE("widths stay above the floor") {
  DgLayer l(1, 4, 1, 2);
  auto p = l.parameters();
  p[p.size() - 1] = -3.0;
  p[p.size() - 2] = 0.0;
  l.set_parameters(p);
  for (const auto& r : l.rbfs()) CHECK(r.width >= kMinWidth);
}

TEST_CASE("new layer is placed over the supplied features") {
  Rng rng(4);
  Matrix f(50, 6);
  for (double& v : f.data()) v = rng.normal(1.5, 0.8);
  DgkdHead head(6, 1, 2);
  CHECK_THROWS(head.add_task_layer(Matrix(0, 6), rng));
  head.add_task_layer(f, rng);
  REQUIRE(head.layers().size() == 1);
  CHECK_FALSE(head.layers()[0].frozen());
  for (std::size_t g = 0; g < 2; ++g) {
    // Independent two-pass mean over the group's block of columns.
    long double s = 0.0L;
    for (std::size_t r = 0; r < f.rows(); ++r)
      for (std::size_t c = 3 * g; c < 3 * g + 3; ++c) s += f(r, c);
    const double mean = static_cast<double>(s / (f.rows() * 3));
    CHECK(std::abs(head.layers()[0].rbfs()[g].center - mean) < 1e-9);
    CHECK(head.layers()[0].rbfs()[g].width >= 0.05);
    CHECK(head.layers()[0].rbfs()[g].width <= 2.0);
  }
  for (double w : head.layers()[0].weights().data()) CHECK(std::abs(w) <= 0.1);
  head.add_task_layer(f, rng);
  CHECK(head.layers().size() == 2);
  CHECK(head.layers()[0].frozen());
  CHECK_FALSE(head.layers()[1].frozen());
  CHECK(head.active_task() == 2);
}

TEST_CASE("dgkd sums layers") {
  DgkdHead head(2, 1, 1);
  CHECK_THROWS_AS(head.forward(Matrix(1, 2)), ContractViolation);
  auto first = simple_layer(0.7, -0.2);
  first.freeze();
  head.push_layer(first);
  const std::vector<double> x{0.4, -0.3};
  CHECK(head.forward(x)[0] == first.forward(x)[0]);
  DgLayer zero(2, 2, 1, 1);
  head.push_layer(zero);
  CHECK(head.forward(x)[0] == doctest::Approx(first.forward(x)[0]).epsilon(1e-15));
}

TEST_CASE("locality: a far layer barely moves the output") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + rng.below(6), g = 1 + rng.below(d);
    DgkdHead head(d, 1, g);
    DgLayer near(1, d, 1, g), far(2, d, 1, g);
    for (double& w : near.weights().data()) w = rng.uniform(-1, 1);
    for (double& w : far.weights().data()) w = rng.uniform(-1, 1);
    for (std::size_t k = 0; k < g; ++k) {
      near.rbfs()[k] = {rng.uniform(-1, 1), rng.uniform(0.2, 1.0)};
      far.rbfs()[k] = {rng.uniform(20, 30), rng.uniform(0.2, 1.0)};
    }
    near.freeze();
    head.push_layer(near);
    head.push_layer(far);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& c = near.rbfs()[near.group_of(i)];
      x[i] = c.center + rng.uniform(-6, 6) * c.width;
      // Keep every coordinate at least 6 widths from the far layer.
      const auto& f = far.rbfs()[far.group_of(i)];
      REQUIRE(std::abs(x[i] - f.center) >= 6 * f.width);
    }
    double max_w = 0.0;
    for (double w : far.weights().data()) max_w = std::max(max_w, std::abs(w));
    const double bound = 1.0 * d * max_w * std::exp(-18.0);
    CHECK(std::abs(head.forward(x)[0] - near.forward(x)[0]) <= bound);
  }
}

TEST_CASE("frozen layers keep their bytes through training") {
  Rng rng(10);
  Matrix f(40, 4);
  for (double& v : f.data()) v = rng.normal();
  DgkdHead head(4, 1, 2);
  head.add_task_layer(f, rng);
  head.add_task_layer(f, rng);
  const auto frozen_bytes = bytes_of(head.layers()[0]);
  AdamState opt(head.trainable_parameters().size(), AdamConfig{0.05});
  for (int s = 0; s < 30; ++s) {
    const auto g = head.backward(f, Matrix(40, 1, 1.0));
    auto p = head.trainable_parameters();
    adam_step(p, g.params, opt);
    head.set_trainable_parameters(p);
  }
  CHECK(bytes_of(head.layers()[0]) == frozen_bytes);
  CHECK(head.layers()[1].parameters() != DgLayer(2, 4, 1, 2).parameters());
}

TEST_CASE("dgkd gradients train only the newest layer") { CHECK(gradsuite::dgkd_head(100) < 1e-4); }

TEST_CASE("activation profile") {
  DgkdHead head(2, 1, 1);
  auto l1 = simple_layer(0.5, 1.5);
  head.push_layer(l1);
  const std::vector<double> peak{0.0};
  CHECK(activation_profile(head, 0, peak)[0] == doctest::Approx(1.0));
  const std::vector<double> far{11.0};
  CHECK(std::abs(activation_profile(head, 0, far)[0]) < 2e-22 * 1.0);
  DgLayer l2(2, 2, 1, 1);
  l2.weights() = Matrix{{2.0, -1.0}};
  l2.rbfs()[0] = {1.0, 0.5};
  DgkdHead only2(2, 1, 1);
  only2.push_layer(l2);
  head.push_layer(l2);
  const std::vector<double> xs{-1.0, 0.0, 0.5, 1.0, 2.0};
  const auto a = activation_profile(head, 0, xs);
  DgkdHead only1(2, 1, 1);
  only1.push_layer(l1);
  const auto b = activation_profile(only1, 0, xs), c = activation_profile(only2, 0, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(a[i] == doctest::Approx(b[i] + c[i]).epsilon(1e-14));
  std::ostringstream csv;
  write_activation_profile_csv(csv, head, 0, xs);
  CHECK(csv.str().rfind("x,value,task_count\n", 0) == 0);
}

TEST_CASE("baseline heads") {
  Rng rng(6);
  MlpHead mlp(4, 1, 8, rng);
  auto p = mlp.trainable_parameters();
  std::fill(p.begin(), p.end(), 0.0);
  mlp.set_trainable_parameters(p);
  const Matrix zero_out = mlp.forward(Matrix(3, 4, 1.3));
  for (double v : zero_out.data()) CHECK(v == 0.0);

  GroupKanHead gk(3, 2, 1, rng);
  gk.rationals()[0] = GroupKanHead::Rational{};  // P(x) = x, Q(x) = 1
  gk.weights() = Matrix{{1, 2, 3}, {-1, 0, 0.5}};
  gk.bias() = {0.5, -0.25};
  const Matrix x{{0.2, -1.0, 4.0}};
  const Matrix y = gk.forward(x);
  CHECK(y(0, 0) == doctest::Approx(0.2 - 2.0 + 12.0 + 0.5));
  CHECK(y(0, 1) == doctest::Approx(-0.2 + 2.0 - 0.25));
  CHECK(gradsuite::mlp_head(100) < 1e-4);
  CHECK(gradsuite::groupkan_head(100) < 1e-4);
  for (auto kind : {HeadKind::dgkd, HeadKind::mlp, HeadKind::groupkan}) {
    auto h = make_head(kind, 16, 1, HeadOptions{}, rng);
    h->begin_task(Matrix(10, 16, 0.5), rng);
    CHECK(h->forward(Matrix(5, 16)).rows() == 5);
    CHECK(h->forward(Matrix(5, 16)).cols() == 1);
    CHECK(head_kind_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS(head_kind_from_string("kac"));
}

TEST_CASE("extractor") {
  Rng rng(7);
  FeatureExtractor ex(8, 16, 64, rng);
  const Matrix x(3, 8, 0.4);
  const Matrix f = ex.forward(x);
  CHECK(f.rows() == 3);
  CHECK(f.cols() == 16);
  CHECK(ex.forward(x) == f);
  FeatureExtractor copy = ex;
  auto p = copy.parameters();
  std::fill(p.begin(), p.end(), 0.0);
  copy.set_parameters(p);
  CHECK(ex.forward(x) == f);  // deep copy
  auto p2 = copy.parameters();
  for (std::size_t i = p2.size() - 16; i < p2.size(); ++i) p2[i] = static_cast<double>(i % 5);
  copy.set_parameters(p2);
  const Matrix bias_img = copy.forward(Matrix(2, 8, -3.0));
  for (std::size_t c = 0; c < 16; ++c) CHECK(bias_img(0, c) == bias_img(1, c));
  CHECK_THROWS_AS(ex.forward(std::vector<double>(7)), ContractViolation);
  CHECK(gradsuite::extractor(100) < 1e-4);
}

}
