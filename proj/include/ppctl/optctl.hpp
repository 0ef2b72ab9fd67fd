#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ppctl/controls.hpp"
#include "ppctl/model.hpp"
#include "ppctl/montecarlo.hpp"
#include "ppctl/noise.hpp"
#include "ppctl/sim.hpp"

namespace ppctl {

/// Costate triple of the stochastic maximum principle at one grid point:
/// p pairs with the drift, the 2x2 q matrix (row-major q1..q4) with the
/// Brownian terms, r with the jump terms.
struct AdjointState {
  double p1 = 0.0, p2 = 0.0;
  double q1 = 0.0, q2 = 0.0, q3 = 0.0, q4 = 0.0;
  double r1 = 0.0, r2 = 0.0;
};

enum class QMode { kPathwiseZero, kRegression };

const char* to_string(QMode m);

struct SweepConfig {
  int max_iters = 200;
  double relaxation = 0.5;  ///< theta in (0, 1]
  double tol = 1e-4;        ///< sup-norm convergence tolerance on the schedule
  QMode q_mode = QMode::kPathwiseZero;

  void validate() const;  // throws InvalidInput
};

struct SweepHistoryEntry {
  int iter = 0;
  double sup_change = 0.0;
  double objective = 0.0;
};

struct SweepResult {
  ControlSchedule schedule;
  Path state_path;                     ///< path 0 under the final schedule
  std::vector<AdjointState> adjoints;  ///< backward pass along state_path
  double objective = 0.0;
  double objective_se = 0.0;
  double censored_fraction = 0.0;
  std::vector<SweepHistoryEntry> history;
  bool converged = false;
};

/// H = 1 + f_x p1 + f_y p2 + sigma1 x q1 + sigma2 y q4
///       + lambda (x jump1 r1 + y jump2 r2),
/// with (f_x, f_y) the model drift at the given control values. The jump
/// integrals collapse to intensity-times-point-mass because the mark space
/// is a single atom.
double hamiltonian(const State& s, double alpha, double xi, const AdjointState& adj,
                   const ModelParams& mp, const NoiseParams& np);

/// (dp1/dt, dp2/dt) = -grad_{x,y} H, computed analytically.
std::array<double, 2> adjoint_drift(const State& s, double alpha, double xi,
                                    const AdjointState& adj, const ModelParams& mp,
                                    const NoiseParams& np);

/// Terminal costate as a function of the terminal state. Defaults to zero,
/// which is the contract of the control problem; tests use nonzero values to
/// drive the integrator and the regression estimator through nontrivial data.
using TerminalCostate = std::function<std::array<double, 2>(const State&)>;

/// Explicit Euler integration of the costate backward along a stored path,
/// from p(T) = terminal (default (0,0)). Pathwise-zero q_mode keeps q and r
/// at zero; the regression q_mode needs an ensemble, so it is rejected here.
/// The path must carry recorded noise.
std::vector<AdjointState> backward_pass(const Path& path, const ModelParams& mp,
                                        const NoiseParams& np, const SweepConfig& cfg,
                                        const TerminalCostate& terminal = {});

/// Ensemble backward pass. With regression q_mode, q_k and r_k are estimated
/// per step by least squares of the costate at k+1 on the recorded Brownian
/// and compensated jump increments across paths, then shared by every path
/// for the step down to k.
std::vector<std::vector<AdjointState>> backward_pass_ensemble(
    std::span<const Path> paths, const ModelParams& mp, const NoiseParams& np,
    const SweepConfig& cfg, const TerminalCostate& terminal = {});

/// Closed-form quality update alpha = e p2 (1 + x + omega x^2) / (x (e p2 - p1)),
/// clamped to bounds. A degenerate denominator (|x (e p2 - p1)| < 1e-12)
/// falls back to comparing the Hamiltonian at the two endpoints; an exact
/// tie keeps the incumbent value mp.alpha.
double control_update_quality(const State& s, const AdjointState& adj, const ModelParams& mp,
                              const Bounds& bounds);

/// Closed-form quantity update xi = x (p1 - e p2) / (e p2 (1 + omega x^2)),
/// clamped to bounds; |e p2| < 1e-12 triggers the same endpoint fallback
/// with incumbent mp.xi on ties.
double control_update_quantity(const State& s, const AdjointState& adj, const ModelParams& mp,
                               const Bounds& bounds);

/// One pointwise update + relaxation step of the sweep, exposed for testing:
/// new_k = clamp((1-theta) old_k + theta formula_k) with formula_k averaged
/// over the ensemble. Returns the sup-norm change.
double sweep_update_schedule(ControlSchedule& schedule, std::span<const Path> paths,
                             std::span<const std::vector<AdjointState>> adjoints,
                             const ModelParams& mp, double relaxation);

/// Forward-backward sweep for one control (the other stays at its
/// ModelParams value). Iterates forward simulation, backward costate
/// integration, pointwise control update with relaxation, and stops when the
/// sup-norm schedule change drops to tol. The running cost of the problem is
/// state-independent and the terminal costate is zero, so the backward pass
/// is identically zero and the pointwise formulas are uninformative (0/0);
/// the sweep detects that case and optimizes the schedule by a direct search
/// over 21 constant controls (evaluated on the same frozen noise streams,
/// adopting a candidate only when it strictly improves the objective). The
/// objective is the expected hitting time of `target`, censored at the
/// horizon. Non-convergence returns converged = false rather than throwing.
SweepResult forward_backward_sweep(double x0, double y0, ControlMode mode,
                                   const TargetSpec& target, const ModelParams& mp,
                                   const NoiseParams& np, const SimConfig& simcfg,
                                   const SweepConfig& sweepcfg, const Bounds& bounds,
                                   std::uint64_t master_seed, std::int64_t n_paths,
                                   int threads = 0);

/// CSV with header t,u.
void write_controls_csv(std::ostream& os, std::span<const double> times,
                        const ControlSchedule& schedule);
/// CSV with header t,p1,p2,q1,q2,q3,q4,r1,r2.
void write_adjoint_csv(std::ostream& os, std::span<const double> times,
                       std::span<const AdjointState> adjoints);
/// CSV with header iter,sup_change,objective.
void write_history_csv(std::ostream& os, std::span<const SweepHistoryEntry> history);

}  // namespace ppctl
