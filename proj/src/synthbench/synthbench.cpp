#include "kancfd/synthbench.hpp"

#include "kancfd/error.hpp"
#include "kancfd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace kancfd {
namespace {

// Generator geometry. Every domain mixes two components per class placed at
// +-kComponentOffset along a domain direction; fakes sit kFakeOffset further
// along their own domain-specific direction. The class-averaged mean of a
// domain is exactly its shift vector.
constexpr double kNoise = 0.7;
constexpr double kComponentOffset = 1.2;
constexpr double kFakeOffset = 2.4;
constexpr double kFourTaskStep = 8.0;
constexpr double kTenTaskStep = 8.0;
constexpr double kOverlapDistance = 0.5;  // in units of the domain's max stddev
constexpr double kSeparatedDistance = 12.0;

constexpr int kWalkAttempts = 4096;
constexpr std::uint64_t kSpecStream = 0x5EC;

std::vector<double> random_unit(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (n2 < 1e-12);
  const double n = std::sqrt(n2);
  for (double& x : v) x /= n;
  return v;
}

// Unit vector orthogonal to `ref` (a unit vector).
std::vector<double> random_unit_orthogonal(Rng& rng, const std::vector<double>& ref) {
  for (;;) {
    auto v = random_unit(rng, ref.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * ref[i];
    double n2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] -= dot * ref[i];
      n2 += v[i] * v[i];
    }
    if (n2 < 1e-6) continue;
    for (double& x : v) x /= std::sqrt(n2);
    return v;
  }
}

DomainSpec make_domain(int id, Rng& rng, std::vector<double> shift, const StreamOptions& opt) {
  const std::size_t d = opt.d_x;
  const auto spread = random_unit(rng, d);
  const auto fake_dir = random_unit_orthogonal(rng, spread);
  DomainSpec spec;
  spec.id = id;
  spec.shift = std::move(shift);
  spec.n_train = opt.n_train;
  spec.n_eval = opt.n_eval;
  for (int side : {-1, 1}) {
    MixtureComponent real{0.5, std::vector<double>(d), std::vector<double>(d, kNoise)};
    MixtureComponent fake{0.5, std::vector<double>(d), std::vector<double>(d, kNoise)};
    for (std::size_t i = 0; i < d; ++i) {
      real.mean[i] = side * kComponentOffset * spread[i] - 0.5 * kFakeOffset * fake_dir[i];
      fake.mean[i] = side * kComponentOffset * spread[i] + 0.5 * kFakeOffset * fake_dir[i];
    }
    spec.real.push_back(std::move(real));
    spec.fake.push_back(std::move(fake));
  }
  return spec;
}

TaskStream walk(const std::string& protocol, std::uint64_t seed, std::size_t tasks, double step,
                const StreamOptions& opt) {
  Rng rng(seed, kSpecStream);
  TaskStream stream{protocol, seed, step, {}};
  std::vector<std::vector<double>> centers{std::vector<double>(opt.d_x, 0.0)};
  for (std::size_t t = 0; t < tasks; ++t) {
    if (t > 0) {
      // Walk away from every earlier domain: keep the candidate step whose
      // nearest earlier center is farthest.
      std::vector<double> best;
      double best_gap = -1.0;
      for (int attempt = 0; attempt < kWalkAttempts && best_gap < step; ++attempt) {
        const auto dir = random_unit(rng, opt.d_x);
        std::vector<double> c(centers.back());
        for (std::size_t i = 0; i < opt.d_x; ++i) c[i] += step * dir[i];
        double gap = INFINITY;
        for (std::size_t k = 0; k + 1 < centers.size(); ++k) {
          double d2 = 0.0;
          for (std::size_t i = 0; i < opt.d_x; ++i) d2 += (c[i] - centers[k][i]) * (c[i] - centers[k][i]);
          gap = std::min(gap, std::sqrt(d2));
        }
        if (gap > best_gap) {
          best_gap = gap;
          best = std::move(c);
        }
      }
      centers.push_back(std::move(best));
    }
    stream.domains.push_back(make_domain(static_cast<int>(t), rng, centers.back(), opt));
  }
  return stream;
}

const MixtureComponent& pick(const std::vector<MixtureComponent>& comps, Rng& rng) {
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  double u = rng.uniform() * total;
  for (const auto& c : comps) {
    if (u < c.weight) return c;
    u -= c.weight;
  }
  return comps.back();
}

}  // namespace

std::vector<double> DomainSpec::mean() const {
  std::vector<double> m(shift);
  for (const auto* cls : {&real, &fake}) {
    double total = 0.0;
    for (const auto& c : *cls) total += c.weight;
    for (const auto& c : *cls)
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += 0.5 * c.weight / total * c.mean[i];
  }
  return m;
}

double DomainSpec::max_stddev() const {
  // Var = E[var] + Var[mean] over the equal-weight class mixture.
  const auto mu = mean();
  double worst = 0.0;
  for (std::size_t i = 0; i < d_x(); ++i) {
    double var = 0.0;
    for (const auto* cls : {&real, &fake}) {
      double total = 0.0;
      for (const auto& c : *cls) total += c.weight;
      for (const auto& c : *cls) {
        const double w = 0.5 * c.weight / total;
        const double dm = c.mean[i] + shift[i] - mu[i];
        var += w * (c.stddev[i] * c.stddev[i] + dm * dm);
      }
    }
    worst = std::max(worst, std::sqrt(var));
  }
  return worst;
}

void DomainSpec::validate() const {
  require(!shift.empty(), "DomainSpec: zero input dimension");
  require(!real.empty() && !fake.empty(), "DomainSpec: both classes need at least one component");
  for (const auto* cls : {&real, &fake})
    for (const auto& c : *cls) {
      require(c.mean.size() == d_x() && c.stddev.size() == d_x(), "DomainSpec: component dimension mismatch");
      require(c.weight > 0.0, "DomainSpec: component weights must be positive");
      for (double s : c.stddev)
        if (!(s > 0.0) || !std::isfinite(s))
          throw ContractViolation("DomainSpec: invalid covariance (standard deviations must be positive and finite)");
    }
  require(real != fake, "DomainSpec: real and fake generators are identical");
}

Dataset gen_domain(const DomainSpec& spec, std::uint64_t seed, Split split) {
  return gen_domain(spec, seed, split, split == Split::train ? spec.n_train : spec.n_eval);
}

Dataset gen_domain(const DomainSpec& spec, std::uint64_t seed, Split split, std::size_t n) {
  spec.validate();
  const std::uint64_t sub = (static_cast<std::uint64_t>(spec.id) << 1) | (split == Split::eval ? 1u : 0u);
  Rng rng(seed, 0xDA7A0000ULL + sub);
  const std::size_t d = spec.d_x();
  Dataset out{Matrix(n, d), std::vector<int>(n), std::vector<int>(n, spec.id)};
  for (std::size_t r = 0; r < n; ++r) {
    const int fake = static_cast<int>(r % 2);
    const auto& comp = pick(fake ? spec.fake : spec.real, rng);
    for (std::size_t i = 0; i < d; ++i) out.x(r, i) = spec.shift[i] + comp.mean[i] + comp.stddev[i] * rng.normal();
    out.labels[r] = fake;
  }
  return out;
}

std::vector<std::string> known_protocols() {
  return {"four-task", "ten-task", "two-task-separated", "two-task-overlap"};
}

TaskStream gen_sequence(const std::string& protocol, std::uint64_t seed, const StreamOptions& options) {
  require(options.d_x >= 2, "gen_sequence: d_x must be at least 2");
  if (protocol == "four-task") return walk(protocol, seed, 4, options.shift_step > 0.0 ? options.shift_step : kFourTaskStep, options);
  if (protocol == "ten-task") return walk(protocol, seed, 10, options.shift_step > 0.0 ? options.shift_step : kTenTaskStep, options);
  if (protocol == "two-task-separated" || protocol == "two-task-overlap") {
    Rng rng(seed, kSpecStream);
    TaskStream stream{protocol, seed, 0.0, {}};
    stream.domains.push_back(make_domain(0, rng, std::vector<double>(options.d_x, 0.0), options));
    stream.domains.push_back(make_domain(1, rng, std::vector<double>(options.d_x, 0.0), options));
    const double unit = std::max(stream.domains[0].max_stddev(), stream.domains[1].max_stddev());
    const double distance = (protocol == "two-task-separated" ? kSeparatedDistance : kOverlapDistance) * unit;
    const auto dir = random_unit(rng, options.d_x);
    for (std::size_t i = 0; i < options.d_x; ++i) stream.domains[1].shift[i] = distance * dir[i];
    stream.shift_step = distance;
    return stream;
  }
  throw ContractViolation("gen_sequence: unknown protocol '" + protocol + "'");
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t c = 0; c < data.x.cols(); ++c) out << "x_" << c << ',';
  out << "label,domain\n";
  out.precision(17);
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < data.x.cols(); ++c) out << data.x(r, c) << ',';
    out << data.labels[r] << ',' << data.domains[r] << '\n';
  }
}

}  // namespace kancfd
