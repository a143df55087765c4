#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spectralflow/asymptotics.hpp"
#include "spectralflow/bloch_dos.hpp"
#include "spectralflow/model.hpp"

namespace spectralflow {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AlphaGridSpec {
  double min = 1.0;
  double max = 100.0;
  int points = 3;
  bool log_spaced = true;

  std::vector<double> values() const;
};

struct ExperimentConfig {
  ModelSpec model = ModelSpec::free_1d();
  std::optional<double> lambda;  // nullopt = "auto-midgap"
  AlphaGridSpec alpha_grid;
  std::optional<double> eps1;  // default: eps2 / 4
  std::optional<double> eps2;  // nullopt = "auto": 1.25 * admissibility bound
  std::string dos_route = "bloch";  // bloch | finite_volume | both
  int dos_grid_points = 801;
  int k_per_axis = 0;  // 0 = per-dimension default
  std::vector<double> beta_sequence = {25.0, 50.0, 100.0};
  double trunc_factor = 1.5;
  std::string output_directory = ".";
  std::vector<std::string> formats = {"csv", "json", "svg"};
  std::uint64_t seed = 0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

/// Config with lambda/eps resolved against the model's band structure.
struct ResolvedExperiment {
  ExperimentConfig config;
  GapInterval gap;
  double lambda = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

/// Resolves auto-midgap lambda and auto eps2 (1.25x the admissibility
/// bound). Throws ConfigError when the model has no gap but lambda is auto.
ResolvedExperiment resolve_experiment(const ExperimentConfig& config);

// Subcommand bodies. Each writes its artifacts under
// config.output_directory and returns the written paths.
std::vector<std::string> run_bands(const ExperimentConfig& config);
std::vector<std::string> run_dos(const ExperimentConfig& config);
std::vector<std::string> run_flow(const ExperimentConfig& config);
std::vector<std::string> run_bs_verify(const ExperimentConfig& config);
std::vector<std::string> run_asymptotics(const ExperimentConfig& config);
/// Aggregates the artifacts already present in the output directory into
/// report_summary.json.
std::vector<std::string> run_report(const ExperimentConfig& config);

}  // namespace spectralflow
