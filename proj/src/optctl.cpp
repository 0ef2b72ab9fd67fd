#include "ppctl/optctl.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "ppctl/csv.hpp"
#include "ppctl/errors.hpp"

namespace ppctl {

namespace {

constexpr double kDegenerateTol = 1e-12;
constexpr int kSearchPoints = 21;

ModelParams with_control(const ModelParams& mp, double alpha, double xi) {
  ModelParams local = mp;
  local.alpha = alpha;
  local.xi = xi;
  return local;
}

// Control-dependent part of the Hamiltonian. The diffusion and jump terms
// do not involve the control, so endpoint comparisons only need this.
double hamiltonian_control_part(const State& s, double alpha, double xi,
                                const AdjointState& adj, const ModelParams& mp) {
  const auto f = drift(s, with_control(mp, alpha, xi));
  return f[0] * adj.p1 + f[1] * adj.p2;
}

double endpoint_by_hamiltonian(ControlMode mode, const State& s, const AdjointState& adj,
                               const ModelParams& mp, const Bounds& bounds) {
  const double incumbent = mode == ControlMode::kQuality ? mp.alpha : mp.xi;
  auto h = [&](double u) {
    return mode == ControlMode::kQuality
               ? hamiltonian_control_part(s, u, mp.xi, adj, mp)
               : hamiltonian_control_part(s, mp.alpha, u, adj, mp);
  };
  const double h_lo = h(bounds.lo);
  const double h_hi = h(bounds.hi);
  if (h_lo < h_hi) return bounds.lo;
  if (h_hi < h_lo) return bounds.hi;
  return bounds.clamp(incumbent);  // tie: no information, keep the incumbent
}

void require_finite(const AdjointState& adj) {
  for (double v : {adj.p1, adj.p2, adj.q1, adj.q2, adj.q3, adj.q4, adj.r1, adj.r2}) {
    if (!std::isfinite(v)) throw InvalidInput("adjoint state is not finite");
  }
}

}  // namespace

const char* to_string(QMode m) {
  return m == QMode::kPathwiseZero ? "pathwise-zero" : "regression";
}

void SweepConfig::validate() const {
  if (max_iters < 1) throw InvalidInput("SweepConfig: max_iters must be >= 1");
  if (!(relaxation > 0.0) || relaxation > 1.0) {
    throw InvalidInput("SweepConfig: relaxation must be in (0, 1]");
  }
  if (!(tol > 0.0)) throw InvalidInput("SweepConfig: tol must be positive");
}

double hamiltonian(const State& s, double alpha, double xi, const AdjointState& adj,
                   const ModelParams& mp, const NoiseParams& np) {
  require_finite(adj);
  const auto f = drift(s, with_control(mp, alpha, xi));
  return 1.0 + f[0] * adj.p1 + f[1] * adj.p2 + np.sigma1 * s.x * adj.q1 +
         np.sigma2 * s.y * adj.q4 +
         np.lambda * (s.x * np.jump1 * adj.r1 + s.y * np.jump2 * adj.r2);
}

std::array<double, 2> adjoint_drift(const State& s, double alpha, double xi,
                                    const AdjointState& adj, const ModelParams& mp,
                                    const NoiseParams& np) {
  require_finite(adj);
  const auto j = drift_jacobian(s, with_control(mp, alpha, xi));
  const double dh_dx = j[0] * adj.p1 + j[2] * adj.p2 + np.sigma1 * adj.q1 +
                       np.lambda * np.jump1 * adj.r1;
  const double dh_dy = j[1] * adj.p1 + j[3] * adj.p2 + np.sigma2 * adj.q4 +
                       np.lambda * np.jump2 * adj.r2;
  return {-dh_dx, -dh_dy};
}

double control_update_quality(const State& s, const AdjointState& adj, const ModelParams& mp,
                              const Bounds& bounds) {
  bounds.validate();
  require_finite(adj);
  if (!(s.x > 0.0)) throw InvalidInput("control_update_quality: x must be positive");
  const double denom = s.x * (mp.e * adj.p2 - adj.p1);
  if (std::abs(denom) < kDegenerateTol) {
    return endpoint_by_hamiltonian(ControlMode::kQuality, s, adj, mp, bounds);
  }
  const double raw = mp.e * adj.p2 * (1.0 + s.x + mp.omega * s.x * s.x) / denom;
  return bounds.clamp(raw);
}

double control_update_quantity(const State& s, const AdjointState& adj, const ModelParams& mp,
                               const Bounds& bounds) {
  bounds.validate();
  require_finite(adj);
  if (!(s.x > 0.0)) throw InvalidInput("control_update_quantity: x must be positive");
  const double denom = mp.e * adj.p2;
  if (std::abs(denom) < kDegenerateTol) {
    return endpoint_by_hamiltonian(ControlMode::kQuantity, s, adj, mp, bounds);
  }
  const double raw = s.x * (adj.p1 - mp.e * adj.p2) / (denom * (1.0 + mp.omega * s.x * s.x));
  return bounds.clamp(raw);
}

namespace {

void check_path_for_backward(const Path& path) {
  if (path.n_points() < 1) throw ConfigError("backward_pass: empty path");
  if (path.noise.size() + 1 != path.n_points()) {
    throw ConfigError("backward_pass: path has no recorded noise");
  }
}

AdjointState terminal_state(const TerminalCostate& terminal, const State& s) {
  AdjointState adj;
  if (terminal) {
    const auto p = terminal(s);
    adj.p1 = p[0];
    adj.p2 = p[1];
  }
  return adj;
}

void backward_step(const Path& path, std::size_t k, double dt, const ModelParams& mp,
                   const NoiseParams& np, const AdjointState& right, AdjointState& left) {
  const auto dp = adjoint_drift(path.states[k + 1], path.alphas[k + 1], path.xis[k + 1], right,
                                mp, np);
  left.p1 = right.p1 - dt * dp[0];
  left.p2 = right.p2 - dt * dp[1];
  if (!std::isfinite(left.p1) || !std::isfinite(left.p2)) {
    throw NumericalError("backward_pass: costate overflow at step " + std::to_string(k));
  }
}

// Least squares with a tiny ridge; zero-variance columns get zero weight.
// Small fixed system (5 regressors), solved by Gaussian elimination.
std::array<double, 5> ridge_solve(const std::array<std::array<double, 5>, 5>& xtx_in,
                                  const std::array<double, 5>& xty_in) {
  auto a = xtx_in;
  auto b = xty_in;
  for (int i = 0; i < 5; ++i) a[i][i] += 1e-10;
  for (int col = 0; col < 5; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 5; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (std::abs(a[col][col]) < 1e-300) continue;
    for (int row = col + 1; row < 5; ++row) {
      const double f = a[row][col] / a[col][col];
      for (int c = col; c < 5; ++c) a[row][c] -= f * a[col][c];
      b[row] -= f * b[col];
    }
  }
  std::array<double, 5> x{};
  for (int row = 4; row >= 0; --row) {
    double acc = b[row];
    for (int c = row + 1; c < 5; ++c) acc -= a[row][c] * x[c];
    x[row] = std::abs(a[row][row]) < 1e-300 ? 0.0 : acc / a[row][row];
  }
  return x;
}

}  // namespace

std::vector<AdjointState> backward_pass(const Path& path, const ModelParams& mp,
                                        const NoiseParams& np, const SweepConfig& cfg,
                                        const TerminalCostate& terminal) {
  cfg.validate();
  check_path_for_backward(path);
  if (cfg.q_mode == QMode::kRegression) {
    throw ConfigError("backward_pass: regression q_mode needs an ensemble backward pass");
  }
  const std::size_t n_points = path.n_points();
  std::vector<AdjointState> adj(n_points);
  adj[n_points - 1] = terminal_state(terminal, path.states[n_points - 1]);
  if (n_points == 1) return adj;
  const double dt = path.times[1] - path.times[0];
  for (std::size_t k = n_points - 1; k-- > 0;) {
    backward_step(path, k, dt, mp, np, adj[k + 1], adj[k]);
  }
  return adj;
}

std::vector<std::vector<AdjointState>> backward_pass_ensemble(
    std::span<const Path> paths, const ModelParams& mp, const NoiseParams& np,
    const SweepConfig& cfg, const TerminalCostate& terminal) {
  cfg.validate();
  if (paths.empty()) throw ConfigError("backward_pass_ensemble: no paths");
  if (cfg.q_mode == QMode::kPathwiseZero) {
    std::vector<std::vector<AdjointState>> out;
    out.reserve(paths.size());
    for (const auto& path : paths) out.push_back(backward_pass(path, mp, np, cfg, terminal));
    return out;
  }

  const std::size_t n_points = paths.front().n_points();
  for (const auto& path : paths) {
    check_path_for_backward(path);
    if (path.n_points() != n_points) {
      throw ConfigError("backward_pass_ensemble: paths on mismatched grids");
    }
  }
  const std::size_t m = paths.size();
  std::vector<std::vector<AdjointState>> adj(m, std::vector<AdjointState>(n_points));
  for (std::size_t i = 0; i < m; ++i) {
    adj[i][n_points - 1] = terminal_state(terminal, paths[i].states[n_points - 1]);
  }
  if (n_points == 1) return adj;
  const double dt = paths.front().times[1] - paths.front().times[0];

  for (std::size_t k = n_points - 1; k-- > 0;) {
    // Regress p_{k+1} on [1, dW1, dW2, dN1 - lambda dt, dN2 - lambda dt].
    std::array<std::array<double, 5>, 5> xtx{};
    std::array<double, 5> xty1{}, xty2{};
    for (std::size_t i = 0; i < m; ++i) {
      const auto& inc = paths[i].noise[k];
      const double comp = np.lambda * dt;
      const std::array<double, 5> row = {1.0, inc.dW1, inc.dW2,
                                         static_cast<double>(inc.dN1) - comp,
                                         static_cast<double>(inc.dN2) - comp};
      for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) xtx[a][b] += row[a] * row[b];
        xty1[a] += row[a] * adj[i][k + 1].p1;
        xty2[a] += row[a] * adj[i][k + 1].p2;
      }
    }
    const auto beta1 = ridge_solve(xtx, xty1);
    const auto beta2 = ridge_solve(xtx, xty2);
    for (std::size_t i = 0; i < m; ++i) {
      adj[i][k].q1 = beta1[1];
      adj[i][k].q2 = beta1[2];
      adj[i][k].q3 = beta2[1];
      adj[i][k].q4 = beta2[2];
      adj[i][k].r1 = beta1[3];
      adj[i][k].r2 = beta2[4];
      // Step with the freshly regressed coefficients at the right endpoint.
      AdjointState right = adj[i][k + 1];
      right.q1 = adj[i][k].q1;
      right.q2 = adj[i][k].q2;
      right.q3 = adj[i][k].q3;
      right.q4 = adj[i][k].q4;
      right.r1 = adj[i][k].r1;
      right.r2 = adj[i][k].r2;
      backward_step(paths[i], k, dt, mp, np, right, adj[i][k]);
    }
  }
  return adj;
}

double sweep_update_schedule(ControlSchedule& schedule, std::span<const Path> paths,
                             std::span<const std::vector<AdjointState>> adjoints,
                             const ModelParams& mp, double relaxation) {
  if (paths.empty() || adjoints.size() != paths.size()) {
    throw ConfigError("sweep_update_schedule: paths and adjoints must align");
  }
  const std::size_t n_points = schedule.values.size();
  double sup_change = 0.0;
  std::vector<double> updated(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double current = schedule.values[k];
    double acc = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      ModelParams local = mp;
      if (schedule.mode == ControlMode::kQuality) {
        local.alpha = current;
      } else {
        local.xi = current;
      }
      const State& s = paths[i].states[k];
      const AdjointState& adj = adjoints[i][k];
      acc += schedule.mode == ControlMode::kQuality
                 ? control_update_quality(s, adj, local, schedule.bounds)
                 : control_update_quantity(s, adj, local, schedule.bounds);
    }
    const double formula = acc / static_cast<double>(paths.size());
    const double relaxed =
        schedule.bounds.clamp((1.0 - relaxation) * current + relaxation * formula);
    updated[k] = relaxed;
    sup_change = std::max(sup_change, std::abs(relaxed - current));
  }
  schedule.values = std::move(updated);
  return sup_change;
}

namespace {

struct Evaluation {
  double objective = 0.0;
  double std_error = 0.0;
  double censored_fraction = 0.0;
};

Evaluation evaluate_schedule(const ControlSchedule& schedule, double x0, double y0,
                             const TargetSpec& target, const ModelParams& mp,
                             const NoiseParams& np, const SimConfig& simcfg,
                             std::uint64_t master_seed, std::int64_t n_paths, int threads) {
  SimConfig quiet = simcfg;
  quiet.record_noise = false;
  const auto stats =
      run_ensemble(n_paths, x0, y0, schedule, mp, np, quiet, master_seed, target, threads);
  const auto est = estimate_objective(stats, quiet.horizon);
  return {est.value, est.std_error, est.censored_fraction};
}

// Forward-simulate and backward-integrate the whole ensemble in streaming
// batches (paths are re-derivable from their streams, so nothing is kept),
// returning the largest |p| seen. Pathwise-zero mode only; regression
// couples paths per time step and needs them resident.
double streamed_max_abs_p(const ControlSchedule& schedule, double x0, double y0,
                          const ModelParams& mp, const NoiseParams& np, const SimConfig& cfg,
                          const SweepConfig& sweepcfg, std::uint64_t master_seed,
                          std::int64_t n_paths, int threads) {
  int workers = threads;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 0) workers = 1;
  }
  workers = static_cast<int>(std::min<std::int64_t>(workers, n_paths));
  std::vector<double> worker_max(static_cast<std::size_t>(workers), 0.0);
  std::vector<std::string> worker_error(static_cast<std::size_t>(workers));
  auto body = [&](int w) {
    try {
      for (std::int64_t i = w; i < n_paths; i += workers) {
        const Path path = simulate_path(x0, y0, schedule, mp, np, cfg,
                                        derive_stream(master_seed, static_cast<std::uint64_t>(i)));
        const auto adj = backward_pass(path, mp, np, sweepcfg);
        for (const auto& a : adj) {
          worker_max[static_cast<std::size_t>(w)] =
              std::max({worker_max[static_cast<std::size_t>(w)], std::abs(a.p1), std::abs(a.p2)});
        }
      }
    } catch (const std::exception& err) {
      worker_error[static_cast<std::size_t>(w)] = err.what();
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : worker_error) {
    if (!err.empty()) throw NumericalError(err);
  }
  double out = 0.0;
  for (double v : worker_max) out = std::max(out, v);
  return out;
}

}  // namespace

SweepResult forward_backward_sweep(double x0, double y0, ControlMode mode,
                                   const TargetSpec& target, const ModelParams& mp,
                                   const NoiseParams& np, const SimConfig& simcfg,
                                   const SweepConfig& sweepcfg, const Bounds& bounds,
                                   std::uint64_t master_seed, std::int64_t n_paths,
                                   int threads) {
  sweepcfg.validate();
  bounds.validate();
  target.validate();
  if (n_paths < 1) throw InvalidInput("forward_backward_sweep: need at least one path");

  SimConfig fwdcfg = simcfg;
  fwdcfg.record_noise = true;  // the backward pass consumes the recorded noise
  const auto n_points = static_cast<std::size_t>(fwdcfg.n_steps() + 1);
  const double init = mode == ControlMode::kQuality ? mp.alpha : mp.xi;

  SweepResult result;
  result.schedule = ControlSchedule::constant(mode, init, n_points, bounds);

  Evaluation current_eval = evaluate_schedule(result.schedule, x0, y0, target, mp, np, fwdcfg,
                                              master_seed, n_paths, threads);

  for (int iter = 1; iter <= sweepcfg.max_iters; ++iter) {
    double max_abs_p = 0.0;
    std::vector<Path> paths;                             // resident only when needed
    std::vector<std::vector<AdjointState>> adjoints;
    try {
      if (sweepcfg.q_mode == QMode::kPathwiseZero) {
        max_abs_p = streamed_max_abs_p(result.schedule, x0, y0, mp, np, fwdcfg, sweepcfg,
                                       master_seed, n_paths, threads);
        if (max_abs_p > 0.0) {
          // Nonzero costates: rebuild the ensemble (streams reproduce the
          // same paths) for the pointwise update.
          paths.reserve(static_cast<std::size_t>(n_paths));
          for (std::int64_t i = 0; i < n_paths; ++i) {
            paths.push_back(
                simulate_path(x0, y0, result.schedule, mp, np, fwdcfg,
                              derive_stream(master_seed, static_cast<std::uint64_t>(i))));
          }
          adjoints = backward_pass_ensemble(paths, mp, np, sweepcfg);
        }
      } else {
        paths.reserve(static_cast<std::size_t>(n_paths));
        for (std::int64_t i = 0; i < n_paths; ++i) {
          paths.push_back(
              simulate_path(x0, y0, result.schedule, mp, np, fwdcfg,
                            derive_stream(master_seed, static_cast<std::uint64_t>(i))));
        }
        adjoints = backward_pass_ensemble(paths, mp, np, sweepcfg);
        for (const auto& per_path : adjoints) {
          for (const auto& adj : per_path) {
            max_abs_p = std::max({max_abs_p, std::abs(adj.p1), std::abs(adj.p2)});
          }
        }
      }
    } catch (const NumericalError& err) {
      throw NumericalError("forward_backward_sweep: iteration " + std::to_string(iter) + ": " +
                           err.what());
    }

    double sup_change = 0.0;
    if (max_abs_p > 0.0) {
      sup_change = sweep_update_schedule(result.schedule, paths, adjoints, mp,
                                         sweepcfg.relaxation);
      current_eval = evaluate_schedule(result.schedule, x0, y0, target, mp, np, fwdcfg,
                                       master_seed, n_paths, threads);
    } else {
      // Zero costates everywhere: the pointwise formulas are 0/0 and carry no
      // information. Search constant schedules on the same frozen streams and
      // adopt a candidate only when it strictly improves the objective.
      double best_value = init;
      Evaluation best_eval = current_eval;
      bool improved = false;
      for (int j = 0; j < kSearchPoints; ++j) {
        const double cand =
            bounds.lo + (bounds.hi - bounds.lo) * static_cast<double>(j) /
                            static_cast<double>(kSearchPoints - 1 > 0 ? kSearchPoints - 1 : 1);
        const auto cand_schedule = ControlSchedule::constant(mode, cand, n_points, bounds);
        const auto eval = evaluate_schedule(cand_schedule, x0, y0, target, mp, np, fwdcfg,
                                            master_seed, n_paths, threads);
        if (eval.objective < best_eval.objective) {
          best_eval = eval;
          best_value = cand;
          improved = true;
        }
        if (bounds.hi == bounds.lo) break;
      }
      if (improved) {
        ControlSchedule next = ControlSchedule::constant(mode, best_value, n_points, bounds);
        for (std::size_t k = 0; k < n_points; ++k) {
          sup_change = std::max(sup_change, std::abs(next.values[k] - result.schedule.values[k]));
        }
        result.schedule = std::move(next);
        current_eval = best_eval;
      } else {
        sup_change = 0.0;
      }
    }

    result.history.push_back({iter, sup_change, current_eval.objective});
    if (sup_change <= sweepcfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.objective = current_eval.objective;
  result.objective_se = current_eval.std_error;
  result.censored_fraction = current_eval.censored_fraction;
  result.state_path = simulate_path(x0, y0, result.schedule, mp, np, fwdcfg,
                                    derive_stream(master_seed, 0));
  SweepConfig pathwise = sweepcfg;
  pathwise.q_mode = QMode::kPathwiseZero;
  result.adjoints = backward_pass(result.state_path, mp, np, pathwise);
  return result;
}

void write_controls_csv(std::ostream& os, std::span<const double> times,
                        const ControlSchedule& schedule) {
  os << "t,u\n";
  for (std::size_t k = 0; k < times.size() && k < schedule.values.size(); ++k) {
    os << csv::num(times[k]) << ',' << csv::num(schedule.values[k]) << '\n';
  }
}

void write_adjoint_csv(std::ostream& os, std::span<const double> times,
                       std::span<const AdjointState> adjoints) {
  os << "t,p1,p2,q1,q2,q3,q4,r1,r2\n";
  for (std::size_t k = 0; k < times.size() && k < adjoints.size(); ++k) {
    const auto& a = adjoints[k];
    os << csv::num(times[k]) << ',' << csv::num(a.p1) << ',' << csv::num(a.p2) << ','
       << csv::num(a.q1) << ',' << csv::num(a.q2) << ',' << csv::num(a.q3) << ','
       << csv::num(a.q4) << ',' << csv::num(a.r1) << ',' << csv::num(a.r2) << '\n';
  }
}

void write_history_csv(std::ostream& os, std::span<const SweepHistoryEntry> history) {
  os << "iter,sup_change,objective\n";
  for (const auto& h : history) {
    os << h.iter << ',' << csv::num(h.sup_change) << ',' << csv::num(h.objective) << '\n';
  }
}

}  // namespace ppctl
