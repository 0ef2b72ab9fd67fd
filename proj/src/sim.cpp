#include "ppctl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppctl/csv.hpp"
#include "ppctl/errors.hpp"

namespace ppctl {

const char* to_string(ControlMode m) {
  return m == ControlMode::kQuality ? "quality" : "quantity";
}

void Bounds::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidInput("Bounds: non-finite");
  if (lo < 0.0) throw InvalidInput("Bounds: lo must be >= 0");
  if (lo > hi) throw InvalidInput("Bounds: lo must not exceed hi");
}

double Bounds::clamp(double v) const {
  if (std::isnan(v)) throw NumericalError("Bounds::clamp: NaN control value");
  return std::clamp(v, lo, hi);
}

ControlSchedule ControlSchedule::constant(ControlMode mode, double value, std::size_t n_points,
                                          Bounds bounds) {
  bounds.validate();
  ControlSchedule s;
  s.mode = mode;
  s.bounds = bounds;
  s.values.assign(n_points, bounds.clamp(value));
  return s;
}

void ControlSchedule::validate() const {
  bounds.validate();
  for (double v : values) {
    if (!std::isfinite(v) || v < bounds.lo || v > bounds.hi) {
      throw InvalidInput("ControlSchedule: value outside bounds");
    }
  }
}

void SimConfig::validate() const {
  if (!std::isfinite(dt) || !std::isfinite(horizon)) throw InvalidInput("SimConfig: non-finite");
  if (!(dt > 0.0)) throw InvalidInput("SimConfig: dt must be positive");
  if (horizon < 0.0) throw InvalidInput("SimConfig: horizon must be >= 0");
  if (horizon > 0.0 && dt > horizon) throw InvalidInput("SimConfig: dt must not exceed horizon");
  if (!(positivity_floor > 0.0) || positivity_floor > 1e-8) {
    throw InvalidInput("SimConfig: positivity_floor must be in (0, 1e-8]");
  }
}

std::int64_t SimConfig::n_steps() const {
  return static_cast<std::int64_t>(std::llround(horizon / dt));
}

State step(const State& s, double alpha, double xi, const ModelParams& mp,
           const NoiseParams& np, const NoiseIncrement& inc, double dt,
           double positivity_floor, std::int64_t* clamp_events) {
  ModelParams local = mp;
  local.alpha = alpha;
  local.xi = xi;
  const auto f = drift(s, local);

  const double comp = np.lambda * dt;  // jump compensator per unit jump size
  double x = s.x + f[0] * dt + np.sigma1 * s.x * inc.dW1 +
             s.x * np.jump1 * (static_cast<double>(inc.dN1) - comp);
  double y = s.y + f[1] * dt + np.sigma2 * s.y * inc.dW2 +
             s.y * np.jump2 * (static_cast<double>(inc.dN2) - comp);

  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw NumericalError("step: non-finite state update");
  }
  // The exact solution stays strictly positive; an update at or below zero is
  // a discretization artifact and is raised to the floor. Positive values
  // below the floor are legitimate small states and pass through.
  if (x <= 0.0) {
    x = positivity_floor;
    if (clamp_events) ++*clamp_events;
  }
  if (y <= 0.0) {
    y = positivity_floor;
    if (clamp_events) ++*clamp_events;
  }
  return {x, y};
}

namespace {

Path run_path(double x0, double y0, const ControlSchedule& schedule, const ModelParams& mp,
              const NoiseParams& np, const SimConfig& cfg, RandomStream* stream,
              std::span<const NoiseIncrement> given) {
  cfg.validate();
  mp.validate();
  np.validate();
  schedule.validate();
  if (!(x0 > 0.0) || !(y0 > 0.0) || !std::isfinite(x0) || !std::isfinite(y0)) {
    throw InvalidInput("simulate_path: initial state must be positive and finite");
  }

  const std::int64_t n = cfg.n_steps();
  const auto n_points = static_cast<std::size_t>(n + 1);
  if (schedule.values.size() != n_points) {
    throw ConfigError("simulate_path: schedule length " + std::to_string(schedule.values.size()) +
                      " does not match grid of " + std::to_string(n_points) + " points");
  }
  if (!stream && given.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("simulate_path: increment count does not match step count");
  }

  Path path;
  path.times.reserve(n_points);
  path.states.reserve(n_points);
  path.alphas.reserve(n_points);
  path.xis.reserve(n_points);
  if (cfg.record_noise) path.noise.reserve(static_cast<std::size_t>(n));

  auto control_at = [&](std::size_t k) {
    const double u = schedule.values[k];
    return schedule.mode == ControlMode::kQuality ? std::pair{u, mp.xi} : std::pair{mp.alpha, u};
  };

  State s{x0, y0};
  for (std::size_t k = 0; k < n_points; ++k) {
    path.times.push_back(static_cast<double>(k) * cfg.dt);
    path.states.push_back(s);
    const auto [alpha, xi] = control_at(k);
    path.alphas.push_back(alpha);
    path.xis.push_back(xi);
    if (k == static_cast<std::size_t>(n)) break;

    const NoiseIncrement inc = stream ? draw_increment(*stream, np, cfg.dt) : given[k];
    if (cfg.record_noise) path.noise.push_back(inc);
    try {
      s = step(s, alpha, xi, mp, np, inc, cfg.dt, cfg.positivity_floor, &path.clamp_events);
    } catch (const NumericalError& err) {
      throw NumericalError(std::string(err.what()) + " at step " + std::to_string(k) +
                           " (t=" + std::to_string(path.times.back()) + ")");
    }
  }
  return path;
}

}  // namespace

Path simulate_path(double x0, double y0, const ControlSchedule& schedule, const ModelParams& mp,
                   const NoiseParams& np, const SimConfig& cfg, RandomStream stream) {
  return run_path(x0, y0, schedule, mp, np, cfg, &stream, {});
}

Path simulate_path_with_increments(double x0, double y0, const ControlSchedule& schedule,
                                   const ModelParams& mp, const NoiseParams& np,
                                   const SimConfig& cfg,
                                   std::span<const NoiseIncrement> increments) {
  return run_path(x0, y0, schedule, mp, np, cfg, nullptr, increments);
}

void write_path_csv(std::ostream& os, const Path& path) {
  os << "t,x,y,alpha,xi,dW1,dW2,dN1,dN2\n";
  for (std::size_t k = 0; k < path.n_points(); ++k) {
    os << csv::num(path.times[k]) << ',' << csv::num(path.states[k].x) << ','
       << csv::num(path.states[k].y) << ',' << csv::num(path.alphas[k]) << ','
       << csv::num(path.xis[k]);
    if (k < path.noise.size()) {
      const auto& inc = path.noise[k];
      os << ',' << csv::num(inc.dW1) << ',' << csv::num(inc.dW2) << ',' << csv::num(inc.dN1)
         << ',' << csv::num(inc.dN2);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
}

}  // namespace ppctl
