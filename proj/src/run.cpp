#include "ppctl/run.hpp"

#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ppctl/csv.hpp"
#include "ppctl/errors.hpp"
#include "ppctl/version.hpp"

namespace ppctl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << content;
}

std::ofstream open_artifact(RunArtifacts& artifacts, const std::string& name) {
  artifacts.files.push_back(name);
  std::ofstream os(artifacts.out_dir / name, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (artifacts.out_dir / name).string());
  return os;
}

RunArtifacts begin_run(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  RunArtifacts artifacts;
  artifacts.out_dir = out_dir;
  write_file(out_dir / "config_resolved.cfg", render_config(cfg));
  artifacts.files.push_back("config_resolved.cfg");
  return artifacts;
}

void write_manifest(RunArtifacts& artifacts, const RunConfig& cfg, const std::string& mode,
                    const json& extra = json::object()) {
  json manifest;
  manifest["tool"] = "ppctl";
  manifest["version"] = kVersion;
  manifest["mode"] = mode;
  manifest["seed"] = cfg.seed;
  manifest["config_file"] = "config_resolved.cfg";
  manifest["config_hash_fnv1a64"] = config_hash(cfg);
  manifest["bounds"] = {
      {"alpha", {cfg.alpha_bounds.lo, cfg.alpha_bounds.hi}},
      {"xi", {cfg.xi_bounds.lo, cfg.xi_bounds.hi}},
      {"source",
       (cfg.alpha_bounds.lo == 0 && cfg.alpha_bounds.hi == 10 && cfg.xi_bounds.lo == 0 &&
        cfg.xi_bounds.hi == 10)
           ? "default"
           : "configured"},
  };
  for (auto& [key, value] : extra.items()) manifest[key] = value;
  manifest["artifacts"] = artifacts.files;
  std::ostringstream os;
  os << manifest.dump(2) << "\n";
  artifacts.files.push_back("manifest.json");
  write_file(artifacts.out_dir / "manifest.json", os.str());
}

ControlSchedule nominal_schedule(const RunConfig& cfg) {
  const auto n_points = static_cast<std::size_t>(cfg.sim.n_steps() + 1);
  // Constant controls at the configured nominal values; quality mode with
  // alpha pinned reproduces (alpha, xi) = (model.alpha, model.xi) exactly.
  Bounds wide{0.0, std::max({cfg.model.alpha, cfg.alpha_bounds.hi, 1.0})};
  return ControlSchedule::constant(ControlMode::kQuality, cfg.model.alpha, n_points, wide);
}

json target_json(const TargetSpec& t) {
  return {{"x", t.target.x}, {"y", t.target.y}, {"epsilon", t.epsilon}};
}

double time_average(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RunConfig scenario_preset(const std::string& name) {
  RunConfig cfg;
  cfg.sim.dt = 0.01;
  cfg.sim.horizon = 40.0;
  cfg.sim.record_noise = true;
  // Jump intensity well below the default: one shock every ~10 time units
  // keeps both populations pathwise viable over the scenario horizon while
  // still exercising the jump machinery.
  cfg.noise.lambda = 0.1;
  cfg.sweep_paths = 100;
  if (name == "conservation") {
    // Nominal controls whose coexistence equilibrium sits above the initial
    // predator level; reaching the ball then requires a control that keeps
    // the predator viable rather than one that merely sweeps through.
    cfg.model.alpha = 0.5;
    cfg.model.xi = 1.0;
    cfg.target_epsilon = 1.0;  // target resolved from the coexistence equilibrium
  } else if (name == "pest") {
    cfg.model.alpha = 0.0;
    cfg.model.xi = 10.0;
    // Prey elimination with the predator held at its axial equilibrium.
    const auto eqs = equilibria(cfg.model);
    double y_ax = 0.0;
    for (const auto& eq : eqs) {
      if (eq.kind == EquilibriumKind::kAxialPredator) y_ax = eq.state.y;
    }
    if (y_ax <= 0.0) throw ConfigError("pest preset: no axial predator equilibrium");
    cfg.target_x = 0.5;
    cfg.target_y = y_ax;
    cfg.target_epsilon = 2.5;
  } else {
    throw ConfigError("unknown scenario '" + name + "' (expected conservation or pest)");
  }
  return cfg;
}

RunArtifacts run_simulate(const RunConfig& cfg, const fs::path& out_dir) {
  RunArtifacts artifacts = begin_run(cfg, out_dir);
  const auto schedule = nominal_schedule(cfg);
  const Path path = simulate_path(cfg.x0, cfg.y0, schedule, cfg.model, cfg.noise, cfg.sim,
                                  derive_stream(cfg.seed, 0));
  {
    auto os = open_artifact(artifacts, "trajectory.csv");
    write_path_csv(os, path);
  }
  {
    auto os = open_artifact(artifacts, "phase.csv");
    os << "x,y\n";
    for (const auto& s : path.states) os << csv::num(s.x) << ',' << csv::num(s.y) << '\n';
  }
  write_manifest(artifacts, cfg, "simulate",
                 {{"clamp_events", path.clamp_events}});
  return artifacts;
}

RunArtifacts run_ensemble_mode(const RunConfig& cfg, const fs::path& out_dir) {
  RunArtifacts artifacts = begin_run(cfg, out_dir);
  const auto schedule = nominal_schedule(cfg);
  const TargetSpec target = cfg.resolve_target();
  SimConfig simcfg = cfg.sim;
  simcfg.record_noise = false;
  const auto stats = run_ensemble(cfg.paths, cfg.x0, cfg.y0, schedule, cfg.model, cfg.noise,
                                  simcfg, cfg.seed, target, cfg.threads);
  const auto objective = estimate_objective(stats, simcfg.horizon);
  {
    auto os = open_artifact(artifacts, "stats.csv");
    write_stats_csv(os, stats);
  }
  {
    auto os = open_artifact(artifacts, "hitting.csv");
    write_hitting_csv(os, stats);
  }
  write_manifest(artifacts, cfg, "ensemble",
                 {{"target", target_json(target)},
                  {"objective", objective.value},
                  {"objective_se", objective.std_error},
                  {"censored_fraction", objective.censored_fraction},
                  {"clamp_events", stats.total_clamp_events}});
  return artifacts;
}

RunArtifacts run_equilibria(const RunConfig& cfg, const fs::path& out_dir) {
  RunArtifacts artifacts = begin_run(cfg, out_dir);
  const auto eqs = equilibria(cfg.model);
  {
    auto os = open_artifact(artifacts, "equilibria.csv");
    os << "x,y,kind,drift_residual\n";
    for (const auto& eq : eqs) {
      os << csv::num(eq.state.x) << ',' << csv::num(eq.state.y) << ',' << to_string(eq.kind)
         << ',' << csv::num(eq.drift_residual) << '\n';
    }
  }
  write_manifest(artifacts, cfg, "equilibria", {{"count", eqs.size()}});
  return artifacts;
}

namespace {

struct SweepRun {
  OptimizeOutcome outcome;
  ControlSchedule schedule;
};

SweepRun optimize_into(RunArtifacts& artifacts, const RunConfig& cfg, ControlMode mode,
                       const std::string& tag) {
  const TargetSpec target = cfg.resolve_target();
  const Bounds bounds = mode == ControlMode::kQuality ? cfg.alpha_bounds : cfg.xi_bounds;
  const SweepResult result =
      forward_backward_sweep(cfg.x0, cfg.y0, mode, target, cfg.model, cfg.noise, cfg.sim,
                             cfg.sweep, bounds, cfg.seed, cfg.sweep_paths, cfg.threads);
  {
    auto os = open_artifact(artifacts, "controls" + tag + ".csv");
    write_controls_csv(os, result.state_path.times, result.schedule);
  }
  {
    auto os = open_artifact(artifacts, "adjoint" + tag + ".csv");
    write_adjoint_csv(os, result.state_path.times, result.adjoints);
  }
  {
    auto os = open_artifact(artifacts, "history" + tag + ".csv");
    write_history_csv(os, result.history);
  }
  {
    auto os = open_artifact(artifacts, "trajectory" + tag + ".csv");
    write_path_csv(os, result.state_path);
  }
  SweepRun run;
  run.outcome.converged = result.converged;
  run.outcome.objective = result.objective;
  run.outcome.mean_control = time_average(result.schedule.values);
  run.schedule = result.schedule;
  return run;
}

}  // namespace

OptimizeOutcome run_optimize(const RunConfig& cfg, ControlMode mode, const fs::path& out_dir,
                             const std::string& file_tag) {
  RunArtifacts artifacts = begin_run(cfg, out_dir);
  OptimizeOutcome outcome = optimize_into(artifacts, cfg, mode, file_tag).outcome;
  const TargetSpec target = cfg.resolve_target();
  write_manifest(artifacts, cfg,
                 mode == ControlMode::kQuality ? "optimize-quality" : "optimize-quantity",
                 {{"target", target_json(target)},
                  {"converged", outcome.converged},
                  {"objective", outcome.objective},
                  {"mean_control", outcome.mean_control}});
  outcome.artifacts = std::move(artifacts);
  return outcome;
}

ScenarioOutcome run_scenario(const RunConfig& cfg, const std::string& name,
                             const fs::path& out_dir) {
  ScenarioOutcome outcome;
  outcome.config = cfg;
  RunArtifacts artifacts = begin_run(cfg, out_dir);

  const auto quality = optimize_into(artifacts, cfg, ControlMode::kQuality, "_quality");
  const auto quantity = optimize_into(artifacts, cfg, ControlMode::kQuantity, "_quantity");
  outcome.converged = quality.outcome.converged && quantity.outcome.converged;
  outcome.mean_alpha = quality.outcome.mean_control;
  outcome.mean_xi = quantity.outcome.mean_control;
  outcome.objective_quality = quality.outcome.objective;

  // Ensemble statistics under the optimized quality schedule.
  const TargetSpec target = cfg.resolve_target();
  SimConfig simcfg = cfg.sim;
  simcfg.record_noise = false;
  const auto stats = run_ensemble(cfg.paths, cfg.x0, cfg.y0, quality.schedule, cfg.model,
                                  cfg.noise, simcfg, cfg.seed, target, cfg.threads);
  const auto objective = estimate_objective(stats, simcfg.horizon);
  {
    auto os = open_artifact(artifacts, "stats.csv");
    write_stats_csv(os, stats);
  }
  {
    auto os = open_artifact(artifacts, "hitting.csv");
    write_hitting_csv(os, stats);
  }
  {
    auto os = open_artifact(artifacts, "phase.csv");
    os << "x,y\n";
    for (std::size_t k = 0; k < stats.mean_x.size(); ++k) {
      os << csv::num(stats.mean_x[k]) << ',' << csv::num(stats.mean_y[k]) << '\n';
    }
  }

  outcome.terminal_mean_x = stats.mean_x.back();
  outcome.terminal_mean_y = stats.mean_y.back();
  const std::size_t quarter = stats.mean_x.size() - stats.mean_x.size() / 4;
  double qx = 0.0, qy = 0.0;
  for (std::size_t k = quarter; k < stats.mean_x.size(); ++k) {
    qx += stats.mean_x[k];
    qy += stats.mean_y[k];
  }
  const auto qn = static_cast<double>(stats.mean_x.size() - quarter);
  outcome.final_quarter_mean_x = qx / qn;
  outcome.final_quarter_mean_y = qy / qn;

  write_manifest(artifacts, cfg, "scenario-" + name,
                 {{"target", target_json(target)},
                  {"converged", outcome.converged},
                  {"mean_alpha", outcome.mean_alpha},
                  {"mean_xi", outcome.mean_xi},
                  {"objective_quality", outcome.objective_quality},
                  {"objective_ensemble", objective.value},
                  {"censored_fraction", objective.censored_fraction},
                  {"terminal_mean", {{"x", outcome.terminal_mean_x},
                                     {"y", outcome.terminal_mean_y}}}});
  outcome.artifacts = std::move(artifacts);
  return outcome;
}

}  // namespace ppctl
