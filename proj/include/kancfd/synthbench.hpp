#pragma once

#include "kancfd/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kancfd {

// One diagonal Gaussian component of a class-conditional mixture.
struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> stddev;

  friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

struct DomainSpec {
  int id = 0;
  std::vector<MixtureComponent> real;
  std::vector<MixtureComponent> fake;
  std::vector<double> shift;  // added to every sample of the domain
  std::size_t n_train = 1000;
  std::size_t n_eval = 500;

  std::size_t d_x() const noexcept { return shift.size(); }
  // Analytic mean of the whole domain (both classes, equal class weight).
  std::vector<double> mean() const;
  // Largest per-dimension standard deviation of the whole domain mixture.
  double max_stddev() const;
  void validate() const;

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

struct TaskStream {
  std::string protocol;
  std::uint64_t seed = 0;
  double shift_step = 0.0;
  std::vector<DomainSpec> domains;

  std::size_t size() const noexcept { return domains.size(); }
  friend bool operator==(const TaskStream&, const TaskStream&) = default;
};

// Raw samples with binary labels (1 = fake) and the 0-based domain index.
struct Dataset {
  Matrix x;
  std::vector<int> labels;
  std::vector<int> domains;

  std::size_t size() const noexcept { return x.rows(); }
};

enum class Split { train, eval };

// Exactly n/2 fake samples (odd n: the extra one is real). Train and eval
// draw from disjoint RNG substreams keyed by (seed, domain id, split).
Dataset gen_domain(const DomainSpec& spec, std::uint64_t seed, Split split);
Dataset gen_domain(const DomainSpec& spec, std::uint64_t seed, Split split, std::size_t n);

struct StreamOptions {
  std::size_t d_x = 8;
  std::size_t n_train = 1000;
  std::size_t n_eval = 500;
  double shift_step = 0.0;  // 0 keeps the protocol's own step
};

// Protocols: four-task, ten-task, two-task-separated, two-task-overlap.
TaskStream gen_sequence(const std::string& protocol, std::uint64_t seed, const StreamOptions& options = {});
std::vector<std::string> known_protocols();

void save_stream(std::ostream& out, const TaskStream& stream);
TaskStream load_stream(std::istream& in);
void save_stream(const std::filesystem::path& path, const TaskStream& stream);
TaskStream load_stream(const std::filesystem::path& path);

// CSV with header x_0..x_{d-1},label,domain.
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace kancfd
