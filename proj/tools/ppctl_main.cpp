#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ppctl/errors.hpp"
#include "ppctl/run.hpp"
#include "ppctl/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNoConvergence = 4;

struct CommonOpts {
  std::string config_file;
  std::string out_dir = "ppctl-out";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> paths;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file, "key=value configuration file");
  cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", opts.seed, "master seed (default 42)");
  cmd->add_option("--paths", opts.paths, "ensemble size");
  cmd->add_option("--dt", opts.dt, "time step");
  cmd->add_option("--horizon", opts.horizon, "terminal time");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = auto)");
}

ppctl::RunConfig resolve(const CommonOpts& opts, const ppctl::RunConfig& base) {
  ppctl::RunConfig cfg = base;
  if (!opts.config_file.empty()) cfg = ppctl::parse_config(opts.config_file, cfg);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.paths) cfg.paths = *opts.paths;
  if (opts.dt) cfg.sim.dt = *opts.dt;
  if (opts.horizon) cfg.sim.horizon = *opts.horizon;
  if (opts.threads) cfg.threads = *opts.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ppctl: prey-predator jump-diffusion simulation and additional-food control"};
  app.set_version_flag("--version", ppctl::kVersion);
  app.require_subcommand(1);

  CommonOpts opts;
  std::string scenario_name;

  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
  add_common(simulate, opts);
  auto* opt_quality = app.add_subcommand("optimize-quality", "sweep the food-quality control");
  add_common(opt_quality, opts);
  auto* opt_quantity = app.add_subcommand("optimize-quantity", "sweep the food-quantity control");
  add_common(opt_quantity, opts);
  auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensemble statistics");
  add_common(ensemble, opts);
  auto* eqs = app.add_subcommand("equilibria", "list equilibria of the drift");
  add_common(eqs, opts);
  auto* scenario = app.add_subcommand("scenario", "run a named scenario pipeline");
  scenario->add_option("name", scenario_name, "conservation or pest")->required();
  add_common(scenario, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path out = opts.out_dir;
    if (simulate->parsed()) {
      ppctl::run_simulate(resolve(opts, {}), out);
    } else if (ensemble->parsed()) {
      ppctl::run_ensemble_mode(resolve(opts, {}), out);
    } else if (eqs->parsed()) {
      ppctl::run_equilibria(resolve(opts, {}), out);
    } else if (opt_quality->parsed() || opt_quantity->parsed()) {
      const auto mode = opt_quality->parsed() ? ppctl::ControlMode::kQuality
                                              : ppctl::ControlMode::kQuantity;
      const auto outcome = ppctl::run_optimize(resolve(opts, {}), mode, out);
      if (!outcome.converged) {
        std::cerr << "sweep did not converge within the iteration budget\n";
        return kExitNoConvergence;
      }
    } else if (scenario->parsed()) {
      const auto base = ppctl::scenario_preset(scenario_name);
      const auto outcome = ppctl::run_scenario(resolve(opts, base), scenario_name, out);
      if (!outcome.converged) {
        std::cerr << "scenario sweep did not converge within the iteration budget\n";
        return kExitNoConvergence;
      }
    }
  } catch (const ppctl::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const ppctl::InvalidInput& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const ppctl::NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
