#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ppctl/config.hpp"

namespace ppctl {

/// Names of the files a run wrote, for the manifest and for tests.
struct RunArtifacts {
  std::filesystem::path out_dir;
  std::vector<std::string> files;
};

/// Scenario presets. Both start from (2, 8) with the reference model
/// coefficients; they differ in the nominal control levels, the target the
/// controller steers to, and the tolerance radius:
///  - conservation: target is the coexistence equilibrium with the largest
///    prey level at the nominal controls (prey and predator both persist);
///  - pest: target is prey elimination with the predator at the axial
///    equilibrium sustained by additional food alone.
RunConfig scenario_preset(const std::string& name);  // "conservation" or "pest"

/// Run one mode end to end and write its artifacts (resolved config, CSVs,
/// manifest) into cfg-specific files under `out_dir`.
RunArtifacts run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir);
RunArtifacts run_ensemble_mode(const RunConfig& cfg, const std::filesystem::path& out_dir);
RunArtifacts run_equilibria(const RunConfig& cfg, const std::filesystem::path& out_dir);
/// Returns converged=false information via exit_code 4 semantics at the CLI;
/// the library reports it in the returned flag.
struct OptimizeOutcome {
  RunArtifacts artifacts;
  bool converged = false;
  double objective = 0.0;
  double mean_control = 0.0;  ///< time-averaged final schedule
};
OptimizeOutcome run_optimize(const RunConfig& cfg, ControlMode mode,
                             const std::filesystem::path& out_dir,
                             const std::string& file_tag = "");

/// Full scenario pipeline: quality sweep, quantity sweep, then an ensemble
/// under the optimized quality schedule. Writes trajectory, phase, controls,
/// adjoint, history, stats, hitting-time CSVs and the manifest.
struct ScenarioOutcome {
  RunArtifacts artifacts;
  RunConfig config;
  bool converged = true;
  double mean_alpha = 0.0;      ///< time-average of the optimized quality schedule
  double mean_xi = 0.0;         ///< time-average of the optimized quantity schedule
  double terminal_mean_x = 0.0;
  double terminal_mean_y = 0.0;
  double final_quarter_mean_x = 0.0;
  double final_quarter_mean_y = 0.0;
  double objective_quality = 0.0;
};
ScenarioOutcome run_scenario(const RunConfig& cfg, const std::string& name,
                             const std::filesystem::path& out_dir);

}  // namespace ppctl
