// dgw: run, validate and list experiments.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dgw/errors.hpp"
#include "dgw/experiments.hpp"

namespace {

void print_errors(const std::vector<dgw::FieldError>& errors) {
  for (const auto& e : errors) std::cerr << "  " << e.field << ": " << e.message << "\n";
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::uint64_t> paths,
            std::optional<std::string> out_dir) {
  dgw::ExperimentConfig cfg;
  try {
    cfg = dgw::load_config(path);
    if (seed) cfg.seed = *seed;
    if (paths) cfg.n_paths = *paths;
    if (out_dir) cfg.output_path = *out_dir;
    const dgw::ExperimentResult result = dgw::run_experiment(cfg);
    dgw::write_outputs(result, cfg.output_path);
    std::size_t failed = 0;
    for (const auto& a : result.assertions) {
      if (!a.passed) {
        ++failed;
        std::cerr << "FAIL " << a.name << ": value " << a.value << ", reference " << a.reference << ", tol "
                  << a.tolerance << (a.detail.empty() ? "" : " (" + a.detail + ")") << "\n";
      }
    }
    std::cout << dgw::to_string(cfg.experiment) << ": " << result.assertions.size() - failed << "/"
              << result.assertions.size() << " assertions passed; outputs in " << cfg.output_path << "\n";
    return failed == 0 ? dgw::kExitPass : dgw::kExitAssertion;
  } catch (const dgw::ConfigError& e) {
    std::cerr << "config error:\n";
    print_errors(e.errors());
    return dgw::kExitConfig;
  } catch (const dgw::RegimeError& e) {
    std::cerr << "regime error: " << e.what() << "\n";
    return dgw::kExitConfig;
  } catch (const dgw::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return dgw::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return dgw::kExitConfig;
  } catch (const dgw::ConditioningError& e) {
    std::cerr << "conditioning error: " << e.what() << " (n_survived=" << e.n_survived() << ")\n";
    return dgw::kExitConvergence;
  } catch (const dgw::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return dgw::kExitConvergence;
  } catch (const dgw::PopulationOverflow& e) {
    std::cerr << "population overflow: " << e.what() << "\n";
    return dgw::kExitConvergence;
  }
}

int cmd_validate(const std::string& path) {
  try {
    const auto cfg = dgw::load_config(path);
    const auto errors = dgw::validate(cfg);
    if (errors.empty()) {
      std::cout << "ok\n";
      return dgw::kExitPass;
    }
    print_errors(errors);
  } catch (const dgw::ConfigError& e) {
    print_errors(e.errors());
  }
  return dgw::kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defective Galton-Watson experiments"};
  app.set_version_flag("--version", std::string(dgw::version_string()));
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<std::string> out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment and write its CSV/JSON outputs");
  run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--paths", paths, "Override the number of Monte Carlo paths");
  run->add_option("--out", out_dir, "Output directory (default: config output_path)");

  std::string vconfig;
  auto* val = app.add_subcommand("validate", "Static checks of a config");
  val->add_option("--config", vconfig, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  auto* list = app.add_subcommand("list-experiments", "List experiment names and regimes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dgw::kExitConfig;
  }

  if (*run) return cmd_run(config, seed, paths, out_dir);
  if (*val) return cmd_validate(vconfig);
  if (*list) {
    for (const auto& info : dgw::experiment_catalog()) {
      std::printf("%-14s %-16s %s\n", dgw::to_string(info.id).c_str(), info.regime, info.summary);
    }
    return 0;
  }
  return dgw::kExitConfig;
}
