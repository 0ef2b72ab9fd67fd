#include "ppctl/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "ppctl/csv.hpp"
#include "ppctl/errors.hpp"

namespace ppctl {

void TargetSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidInput("TargetSpec: epsilon must be positive");
  }
  if (!std::isfinite(target.x) || !std::isfinite(target.y) || target.x < 0 || target.y < 0) {
    throw InvalidInput("TargetSpec: target must be finite and nonnegative");
  }
}

HittingTime hitting_time(const Path& path, const TargetSpec& target) {
  target.validate();
  for (std::size_t k = 0; k < path.n_points(); ++k) {
    const double dist = std::max(std::abs(path.states[k].x - target.target.x),
                                 std::abs(path.states[k].y - target.target.y));
    if (dist <= target.epsilon) return {path.times[k], false};
  }
  return {path.times.empty() ? 0.0 : path.times.back(), true};
}

namespace {

int resolve_workers(int threads, std::int64_t n) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  return static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(n, 1)));
}

}  // namespace

EnsembleStats run_ensemble(std::int64_t n, double x0, double y0, const ControlSchedule& schedule,
                           const ModelParams& mp, const NoiseParams& np, const SimConfig& cfg,
                           std::uint64_t master_seed, const std::optional<TargetSpec>& target,
                           int threads) {
  if (n < 1) throw InvalidInput("run_ensemble: need at least one path");
  if (target) target->validate();

  const auto n_points = static_cast<std::size_t>(cfg.n_steps() + 1);
  EnsembleStats stats;
  stats.n_paths = n;
  stats.times.resize(n_points);
  for (std::size_t k = 0; k < n_points; ++k) stats.times[k] = static_cast<double>(k) * cfg.dt;

  // Welford accumulators, updated strictly in path-index order. Identical
  // paths leave m2 at exactly zero, so deterministic ensembles report an
  // exactly-zero std path.
  std::vector<double> mean_x(n_points, 0.0), mean_y(n_points, 0.0);
  std::vector<double> m2_x(n_points, 0.0), m2_y(n_points, 0.0);
  std::int64_t n_seen = 0;
  stats.min_x = std::numeric_limits<double>::infinity();
  stats.min_y = std::numeric_limits<double>::infinity();
  if (target) stats.hitting_times.reserve(static_cast<std::size_t>(n));

  const int workers = resolve_workers(threads, n);

  // Paths are simulated in batches of `workers`; each batch is reduced
  // sequentially in path-index order so sums never depend on scheduling.
  std::vector<Path> batch(static_cast<std::size_t>(workers));
  std::vector<std::string> batch_error(static_cast<std::size_t>(workers));
  for (std::int64_t base = 0; base < n; base += workers) {
    const int count = static_cast<int>(std::min<std::int64_t>(workers, n - base));
    auto worker = [&](int slot) {
      const std::int64_t index = base + slot;
      try {
        batch[static_cast<std::size_t>(slot)] =
            simulate_path(x0, y0, schedule, mp, np, cfg,
                          derive_stream(master_seed, static_cast<std::uint64_t>(index)));
      } catch (const std::exception& err) {
        batch_error[static_cast<std::size_t>(slot)] =
            "path " + std::to_string(index) + ": " + err.what();
      }
    };
    if (count == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(count));
      for (int w = 0; w < count; ++w) pool.emplace_back(worker, w);
      for (auto& t : pool) t.join();
    }
    for (int w = 0; w < count; ++w) {
      if (!batch_error[static_cast<std::size_t>(w)].empty()) {
        throw NumericalError("run_ensemble: " + batch_error[static_cast<std::size_t>(w)]);
      }
      const Path& path = batch[static_cast<std::size_t>(w)];
      ++n_seen;
      const double inv_n = 1.0 / static_cast<double>(n_seen);
      for (std::size_t k = 0; k < n_points; ++k) {
        const double x = path.states[k].x, y = path.states[k].y;
        const double dx = x - mean_x[k];
        mean_x[k] += dx * inv_n;
        m2_x[k] += dx * (x - mean_x[k]);
        const double dy = y - mean_y[k];
        mean_y[k] += dy * inv_n;
        m2_y[k] += dy * (y - mean_y[k]);
        stats.min_x = std::min(stats.min_x, x);
        stats.min_y = std::min(stats.min_y, y);
      }
      stats.total_clamp_events += path.clamp_events;
      if (target) stats.hitting_times.push_back(hitting_time(path, *target));
      batch[static_cast<std::size_t>(w)] = Path{};
    }
  }

  const auto dn = static_cast<double>(n);
  stats.mean_x = std::move(mean_x);
  stats.mean_y = std::move(mean_y);
  stats.std_x.resize(n_points);
  stats.std_y.resize(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    stats.std_x[k] = std::sqrt(std::max(0.0, m2_x[k] / dn));
    stats.std_y[k] = std::sqrt(std::max(0.0, m2_y[k] / dn));
  }
  stats.mean_terminal = {stats.mean_x.back(), stats.mean_y.back()};

  if (target) {
    std::int64_t censored = 0;
    double sum_tau = 0.0, sumsq_tau = 0.0;
    std::int64_t hits = 0;
    for (const auto& h : stats.hitting_times) {
      if (h.censored) {
        ++censored;
      } else {
        sum_tau += h.tau;
        sumsq_tau += h.tau * h.tau;
        ++hits;
      }
    }
    stats.censored_fraction = static_cast<double>(censored) / dn;
    if (hits >= 1) {
      const double mean = sum_tau / static_cast<double>(hits);
      stats.mean_hitting_time = mean;
      if (hits >= 2) {
        const double var =
            std::max(0.0, (sumsq_tau - static_cast<double>(hits) * mean * mean) /
                              static_cast<double>(hits - 1));
        stats.hitting_time_se = std::sqrt(var / static_cast<double>(hits));
      }
    }
  }
  return stats;
}

ObjectiveEstimate estimate_objective(const EnsembleStats& stats, double horizon) {
  ObjectiveEstimate est;
  est.censored_fraction = stats.censored_fraction;
  const auto n = static_cast<double>(stats.hitting_times.size());
  if (stats.hitting_times.empty()) {
    throw InvalidInput("estimate_objective: stats carry no hitting times (no target set)");
  }
  double sum = 0.0, sumsq = 0.0;
  for (const auto& h : stats.hitting_times) {
    const double v = h.censored ? horizon : h.tau;
    sum += v;
    sumsq += v * v;
  }
  est.value = sum / n;
  if (stats.hitting_times.size() >= 2) {
    const double var = std::max(0.0, (sumsq - n * est.value * est.value) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

void write_stats_csv(std::ostream& os, const EnsembleStats& stats) {
  os << "t,mean_x,mean_y,std_x,std_y\n";
  for (std::size_t k = 0; k < stats.times.size(); ++k) {
    os << csv::num(stats.times[k]) << ',' << csv::num(stats.mean_x[k]) << ','
       << csv::num(stats.mean_y[k]) << ',' << csv::num(stats.std_x[k]) << ','
       << csv::num(stats.std_y[k]) << '\n';
  }
}

void write_hitting_csv(std::ostream& os, const EnsembleStats& stats) {
  os << "path_index,tau,censored\n";
  for (std::size_t i = 0; i < stats.hitting_times.size(); ++i) {
    const auto& h = stats.hitting_times[i];
    os << i << ',' << csv::num(h.tau) << ',' << (h.censored ? 1 : 0) << '\n';
  }
}

}  // namespace ppctl
