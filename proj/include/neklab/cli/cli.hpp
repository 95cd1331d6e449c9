#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neklab/core/io.hpp"
#include "neklab/errors.hpp"

namespace neklab::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; `field` is the dotted key at fault.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

std::vector<std::string> subcommands();

struct SmoothSection {
  /// Dimension of the test family (1 or 2).
  std::size_t n = 1;
  /// 0 selects 2000 harmonics for n = 1 and 1000 for n = 2.
  int k_max = 0;
  std::size_t action_nodes = 0;
  std::vector<std::size_t> angle_nodes;
  double R = 1.0;
};

struct SteepnessSection {
  std::vector<std::vector<double>> points;
  std::size_t grid_nodes = 3;
  std::size_t random_points = 16;
  std::size_t frames = 16;
  double xi_max = 0.1;
  std::size_t xi_points = 8;
  double xi_decades = 2.0;
  /// Domain of a Hamiltonian read from a file.
  std::vector<double> center;
  double radius = 0.5;
};

struct GeographySection {
  std::vector<double> center{0.0, 0.0, 1.0};
  double radius = 0.5;
  double eps0 = 1.0;
  double M = 1.0;
  std::size_t coverage_samples = 10'000;
  std::size_t disjointness_samples = 10'000;
};

struct NormalformSection {
  std::string benchmark = "pendulum1";
  std::size_t probes = 16;
  std::size_t steps = 0;
  int lie_order = 3;
  int fit_degree = 12;
};

struct StabilitySection {
  double eps0 = 1.0;
  double M = 1.0;
  std::vector<double> center{0.0, 0.0, 1.0};
  double ic_radius = 0.1;
  std::size_t initial_conditions = 4;
  double dt = 0.05;
  std::size_t max_steps = 10'000'000;
  std::size_t stride = 100;
  bool itineraries = true;
};

struct FitSection {
  std::vector<std::string> inputs;
  std::string column = "max_drift";
  double ell = 0.0;
};

/// Everything a run needs. Built from a YAML file (see README for the schema)
/// and command-line overrides.
struct ExperimentConfig {
  std::string subcommand;
  /// Built-in benchmark id, or empty when `hamiltonian_file` is set.
  std::string hamiltonian = "convex3";
  std::string hamiltonian_file;
  std::optional<std::size_t> n;
  std::optional<double> ell;
  std::vector<double> alpha;
  /// Empty means the subcommand's default sweep.
  std::optional<std::vector<double>> sweep;
  core::json prefactors = core::json::object();
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// 0 disables the wall-clock budget.
  double budget_secs = 0.0;
  std::string output = "neklab-out";

  SmoothSection smooth;
  SteepnessSection steepness;
  GeographySection geography;
  NormalformSection normalform;
  StabilitySection stability;
  FitSection fit;

  /// Resolved configuration echoed into the manifest.
  core::json to_json() const;
};

/// Parses YAML text. Relative file paths are resolved against `base_dir`.
/// Unknown keys, wrong types and violated invariants raise ConfigError.
ExperimentConfig parse_config(const std::string& yaml_text, const std::string& subcommand,
                              const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path, const std::string& subcommand);
/// Checks the cross-field invariants (files exist, sweep non-empty, n).
void validate(const ExperimentConfig& cfg);

struct RunResult {
  int exit_code = 0;
  std::string message;
  /// Output file name → content, written in name order.
  std::map<std::string, std::string> files;
};

/// Runs the subcommand and returns the artifacts without touching the disk.
/// Exit codes: 0 success, 1 validation failure, 2 budget exceeded, 3 internal
/// invariant violation (a witness.json artifact is included).
RunResult execute(const ExperimentConfig& cfg);

/// Writes the artifacts and manifest.json into cfg.output.
void write_artifacts(const ExperimentConfig& cfg, const RunResult& result, double wall_time);

std::string sha256_hex(const std::string& data);

}  // namespace neklab::cli
