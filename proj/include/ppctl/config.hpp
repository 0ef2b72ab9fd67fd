#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>

#include "ppctl/controls.hpp"
#include "ppctl/model.hpp"
#include "ppctl/montecarlo.hpp"
#include "ppctl/noise.hpp"
#include "ppctl/optctl.hpp"
#include "ppctl/sim.hpp"

namespace ppctl {

enum class RunMode { kSimulate, kOptimizeQuality, kOptimizeQuantity, kEnsemble, kEquilibria };

const char* to_string(RunMode m);

/// Fully resolved run setup. Parsed from a sectioned key=value file; every
/// key has a documented default, unknown keys are errors, and the resolved
/// set is echoed next to the run artifacts.
struct RunConfig {
  ModelParams model;
  NoiseParams noise;
  SimConfig sim;
  SweepConfig sweep;
  Bounds alpha_bounds{0.0, 10.0};
  Bounds xi_bounds{0.0, 10.0};
  /// Not-a-number target coordinates mean "resolve from the computed
  /// equilibria when a target is needed".
  double target_x = std::numeric_limits<double>::quiet_NaN();
  double target_y = std::numeric_limits<double>::quiet_NaN();
  double target_epsilon = 0.5;
  double x0 = 2.0;
  double y0 = 8.0;
  std::uint64_t seed = 42;
  std::int64_t paths = 10000;
  std::int64_t sweep_paths = 1000;
  int threads = 0;  ///< 0 = hardware default

  bool has_explicit_target() const;
  /// Explicit target if set; otherwise the largest-prey equilibrium with a
  /// positive predator level (falling back to the prey-only state).
  TargetSpec resolve_target() const;
  void validate() const;  // throws ConfigError naming the offending key
};

/// Parse `path` on top of `base` (defaults or a scenario preset). Unknown
/// keys and malformed lines raise ConfigError with the line number.
RunConfig parse_config(const std::filesystem::path& path, const RunConfig& base = RunConfig{});

/// Same, from an in-memory string (used by tests and the round-trip check).
RunConfig parse_config_text(const std::string& text, const RunConfig& base = RunConfig{});

/// Render the fully resolved config; parse_config_text of the result
/// reproduces the same RunConfig.
std::string render_config(const RunConfig& cfg);

/// FNV-1a 64-bit hash of the rendered config, hex encoded. Stable across
/// platforms; recorded in the run manifest.
std::string config_hash(const RunConfig& cfg);

}  // namespace ppctl
