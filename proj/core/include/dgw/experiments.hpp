#pragma once

// Experiment configs and runners behind the dgw CLI. Each runner returns its
// assertions and the text of every artifact; writing files is a separate step
// so that runs can be compared in memory.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgw/simulator.hpp"
#include "dgw/theta_family.hpp"

namespace dgw {

enum class Experiment { FIG1, PROP1A, PROP1B, THM22, THM23, TAILS, PROP41, PROP42, PROP43, QPROCESS, SAMPLER_EQUIV };

[[nodiscard]] std::string to_string(Experiment e);
[[nodiscard]] Experiment experiment_from_string(const std::string& name);

struct ExperimentInfo {
  Experiment id;
  const char* regime;  ///< "gamma=0", "gamma>0", "gamma>0, 0<q<1", "schedule", "any"
  const char* summary;
};
[[nodiscard]] const std::vector<ExperimentInfo>& experiment_catalog();

struct Tolerances {
  double analytic = 1e-10;
  double mc_se = 3.0;
  double asymptotic = 1e-3;
};

struct ScheduleConfig {
  ScheduleKind kind = ScheduleKind::PROP41;
  double theta = 1.0;
  double q = 0.0;
  double gamma = 0.5;
  double x_or_y = 1.0;
  double a = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ns{10, 15, 20};
  double lambda = 1.0;  ///< Laplace argument (PROP41)
  double u = 0.5;       ///< CDF argument (PROP42, PROP43)
  std::size_t k = 0;
  bool use_uhat = false;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::FIG1;
  std::optional<std::vector<double>> pmf;
  std::optional<ThetaLaw> theta_law;
  std::optional<ScheduleConfig> schedule;
  std::size_t horizon = 7;
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 1;
  std::size_t N = 64;
  Tolerances tolerances;
  std::string output_path = ".";
  Sampler sampler = Sampler::DIRECT;
  std::size_t threads = 0;
};

struct FieldError {
  std::string field;
  std::string message;
};

/// Malformed config; carries one entry per offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<FieldError> errors);
  ConfigError(const std::string& field, const std::string& message) : ConfigError(std::vector<FieldError>{{field, message}}) {}
  [[nodiscard]] const std::vector<FieldError>& errors() const noexcept { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

/// Parses JSON text; ConfigError on syntax, type or unknown-key problems.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);
/// Normalized JSON echo of a config (stable key order).
[[nodiscard]] std::string config_to_json(const ExperimentConfig& config);

/// Static checks only: pmf validity, regime requirement, tolerance positivity. Empty when valid.
[[nodiscard]] std::vector<FieldError> validate(const ExperimentConfig& config);

struct Assertion {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ExperimentResult {
  Experiment experiment = Experiment::FIG1;
  std::vector<Assertion> assertions;
  /// File name -> contents, written verbatim.
  std::map<std::string, std::string> files;
  [[nodiscard]] bool passed() const noexcept;
};

/// Runs one experiment. Throws ConfigError / RegimeError for a config that does not fit the
/// experiment, ConvergenceError (and ConditioningError) for numerical failures.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes result.files under dir (created if missing).
void write_outputs(const ExperimentResult& result, const std::string& dir);

enum ExitCode : int { kExitPass = 0, kExitAssertion = 1, kExitConfig = 2, kExitConvergence = 3 };

[[nodiscard]] const char* version_string() noexcept;

}  // namespace dgw
