#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "ppctl/controls.hpp"
#include "ppctl/model.hpp"
#include "ppctl/noise.hpp"

namespace ppctl {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 50.0;
  double positivity_floor = 1e-12;
  bool record_noise = true;

  void validate() const;  // throws InvalidInput
  /// Number of Euler steps: horizon/dt rounded to the nearest integer.
  std::int64_t n_steps() const;
};

/// A simulated trajectory: states and controls on the grid t_k = k dt, and,
/// when recorded, the noise increments that produced it (one per step).
struct Path {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> alphas;
  std::vector<double> xis;
  std::vector<NoiseIncrement> noise;  ///< empty unless record_noise
  std::int64_t clamp_events = 0;     ///< positivity-floor activations

  std::size_t n_points() const { return states.size(); }
};

/// One Euler step of the jump-diffusion system:
///   x' = x + fx dt + sigma1 x dW1 + x jump1 (dN1 - lambda dt)
///   y' = y + fy dt + sigma2 y dW2 + y jump2 (dN2 - lambda dt)
/// with (fx, fy) the model drift evaluated at the given control. Updates at
/// or below zero are raised to the positivity floor and counted; the exact
/// solution is strictly positive, so clamp events measure discretization
/// artifacts.
State step(const State& s, double alpha, double xi, const ModelParams& mp,
           const NoiseParams& np, const NoiseIncrement& inc, double dt,
           double positivity_floor, std::int64_t* clamp_events);

/// Integrate from (x0, y0) over the configured grid, drawing increments
/// from `stream`. Deterministic given the stream.
Path simulate_path(double x0, double y0, const ControlSchedule& schedule,
                   const ModelParams& mp, const NoiseParams& np, const SimConfig& cfg,
                   RandomStream stream);

/// Same integration but with externally supplied increments (one per step).
/// Used to drive several discretizations with a shared noise refinement.
Path simulate_path_with_increments(double x0, double y0, const ControlSchedule& schedule,
                                   const ModelParams& mp, const NoiseParams& np,
                                   const SimConfig& cfg,
                                   std::span<const NoiseIncrement> increments);

/// CSV with header t,x,y,alpha,xi,dW1,dW2,dN1,dN2. Noise cells are written
/// on the row of the step's starting grid point; the final row (and every
/// row of an unrecorded path) leaves them empty.
void write_path_csv(std::ostream& os, const Path& path);

}  // namespace ppctl
