#pragma once

// Experiment configuration, orchestration and output emission.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlc/leslie.hpp"

namespace qlc {

enum class ExperimentKind { PhaseTable, ClosureValidate, HomogeneousRun, FieldRun, SmallDe, EnergyAudit };

const char* kindName(ExperimentKind k);
std::optional<ExperimentKind> kindFromName(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::PhaseTable;
  ModelParams model;
  /// Defaults to 64 x 128, or 24 x 48 for the field experiments.
  int quad_polar = 64;
  int quad_azimuthal = 128;
  int grid_n = 64;
  double dt = 0.0;  ///< 0 selects the automatic step
  int steps = 200;
  std::uint64_t seed = 42;
  std::string output = "qlc_out";
  int threads = 1;

  std::vector<double> alphas{7.0, 8.0, 10.0};  // phase-table
  int closure_samples = 1000;                  // closure-validate
  double closure_delta = 0.05;
  Mat3 kappa = simpleShear(1.0);               // homogeneous-run
  Vec3 director{0.8, 0.5, 0.3};
  std::vector<double> de_list{0.2, 0.1, 0.05, 0.025};  // small-de
  double shear_rate = 1.0;
  double t_final = 5.0;
  double dt_factor = 0.02;
  Vec3 sd_director{0.8, 0.5, 0.3};
  double velocity_amplitude = 0.5;  // field runs
  int init_modes = 2;
  int snapshot_every = 0;
};

/// Every problem found while reading a config, each prefixed by its key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses and validates a JSON config. When kind is given (from the CLI
/// subcommand) the "experiment" key becomes optional but must agree.
ExperimentConfig validateConfig(const std::string& text, std::optional<ExperimentKind> kind = std::nullopt);
/// Canonical JSON of a config with all defaults filled in.
std::string configToJson(const ExperimentConfig& c);

struct RunOptions {
  bool quiet = false;
};

/// Runs the experiment and writes its artifacts plus manifest.json into
/// config.output. Returns 0 on success, 2 on configuration problems and 3 on
/// numerical failure; diagnostics go to stderr.
int runExperiment(const ExperimentConfig& config, const RunOptions& opts = {});

/// Shortest round-trip decimal form of a double.
std::string formatDouble(double v);
/// Writes data to path through a temporary file and a rename.
void writeAtomic(const std::filesystem::path& path, const std::string& data);
std::string sha256Hex(const std::string& data);

}  // namespace qlc
