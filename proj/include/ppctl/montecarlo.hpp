#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "ppctl/sim.hpp"

namespace ppctl {

/// Target state with a max-norm tolerance radius for hitting-time queries.
struct TargetSpec {
  State target;
  double epsilon = 0.5;

  void validate() const;  // throws InvalidInput
};

/// Hitting time of one path: the time of first entry, or censored at the
/// horizon if the path never enters the ball.
struct HittingTime {
  double tau = 0.0;
  bool censored = false;
};

struct EnsembleStats {
  std::int64_t n_paths = 0;
  std::vector<double> times;
  std::vector<double> mean_x, mean_y;
  std::vector<double> std_x, std_y;
  std::vector<HittingTime> hitting_times;  ///< empty when no target was given
  std::optional<double> mean_hitting_time;  ///< over uncensored paths
  std::optional<double> hitting_time_se;    ///< std/sqrt(count), uncensored, count >= 2
  double censored_fraction = 0.0;
  std::int64_t total_clamp_events = 0;
  double min_x = 0.0, min_y = 0.0;  ///< over all paths and grid points
  State mean_terminal;
};

/// First grid time at which the path is inside the max-norm epsilon ball.
HittingTime hitting_time(const Path& path, const TargetSpec& target);

/// Simulate n paths with streams derive_stream(master_seed, i) and aggregate
/// pointwise statistics. Paths run on `threads` workers (0 = hardware
/// default) but are always reduced in path-index order, so the result is
/// bit-identical for any worker count.
EnsembleStats run_ensemble(std::int64_t n, double x0, double y0, const ControlSchedule& schedule,
                           const ModelParams& mp, const NoiseParams& np, const SimConfig& cfg,
                           std::uint64_t master_seed,
                           const std::optional<TargetSpec>& target = std::nullopt,
                           int threads = 0);

/// Expected hitting time with censored paths contributing the horizon, plus
/// its standard error over all paths.
struct ObjectiveEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double censored_fraction = 0.0;
};

ObjectiveEstimate estimate_objective(const EnsembleStats& stats, double horizon);

/// CSV with header t,mean_x,mean_y,std_x,std_y.
void write_stats_csv(std::ostream& os, const EnsembleStats& stats);

/// CSV with header path_index,tau,censored; censored rows carry tau = horizon.
void write_hitting_csv(std::ostream& os, const EnsembleStats& stats);

}  // namespace ppctl
