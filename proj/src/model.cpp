#include "ppctl/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ppctl/errors.hpp"

namespace ppctl {

namespace {

bool finite(double v) { return std::isfinite(v); }

void require_finite_state(const State& s) {
  if (!finite(s.x) || !finite(s.y)) {
    throw InvalidInput("state is not finite");
  }
  if (s.x < 0.0 || s.y < 0.0) {
    throw InvalidInput("state must be nonnegative");
  }
}

}  // namespace

void DimensionalParams::validate() const {
  for (double v : {r, K, c, e, m1, delta, A, b, a, eta, alpha}) {
    if (!finite(v)) throw InvalidInput("DimensionalParams: non-finite field");
  }
  if (r <= 0 || K <= 0 || c <= 0 || e <= 0 || a <= 0) {
    throw InvalidInput("DimensionalParams: r, K, c, e, a must be positive");
  }
  if (m1 < 0 || delta < 0 || A < 0 || b < 0 || eta < 0 || alpha < 0) {
    throw InvalidInput("DimensionalParams: m1, delta, A, b, eta, alpha must be nonnegative");
  }
}

void ModelParams::validate() const {
  // gamma = +inf is allowed: it zeroes the logistic term exactly.
  for (double v : {r, omega, e, m1, m2, alpha, xi}) {
    if (!finite(v)) throw InvalidInput("ModelParams: non-finite field");
  }
  if (std::isnan(gamma)) throw InvalidInput("ModelParams: gamma is NaN");
  if (r <= 0 || gamma <= 0 || e <= 0) {
    throw InvalidInput("ModelParams: r, gamma, e must be positive");
  }
  if (omega < 0 || m1 < 0 || m2 < 0 || alpha < 0 || xi < 0) {
    throw InvalidInput("ModelParams: omega, m1, m2, alpha, xi must be nonnegative");
  }
}

const char* to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::kTrivial: return "trivial";
    case EquilibriumKind::kAxialPrey: return "axial-prey";
    case EquilibriumKind::kAxialPredator: return "axial-predator";
    case EquilibriumKind::kInterior: return "interior";
  }
  return "?";
}

double response_denominator(double x, const ModelParams& p) {
  return (1.0 + p.alpha * p.xi) * (p.omega * x * x + 1.0) + x;
}

double functional_response(double x, const ModelParams& p) {
  if (!finite(x) || x < 0.0) throw InvalidInput("functional_response: x must be finite and >= 0");
  return x / response_denominator(x, p);
}

std::array<double, 2> drift(const State& s, const ModelParams& p) {
  require_finite_state(s);
  const double x = s.x, y = s.y;
  const double d = response_denominator(x, p);
  // x/gamma is exactly 0 for gamma = +inf and finite x.
  const double fx = p.r * x * (1.0 - x / p.gamma) - x * y / d;
  const double gain = p.e * (x + p.xi * (p.omega * x * x + 1.0)) / d;
  const double fy = y * (gain - p.m1 - p.m2 * y);
  return {fx, fy};
}

std::array<double, 4> drift_jacobian(const State& s, const ModelParams& p) {
  require_finite_state(s);
  const double x = s.x, y = s.y;
  const double phi = p.omega * x * x + 1.0;
  const double d = (1.0 + p.alpha * p.xi) * phi + x;
  const double dprime = 2.0 * p.omega * (1.0 + p.alpha * p.xi) * x + 1.0;
  const double g = x + p.xi * phi;
  const double gprime = 1.0 + 2.0 * p.omega * p.xi * x;

  const double fxx = p.r * (1.0 - 2.0 * x / p.gamma) - y * (d - x * dprime) / (d * d);
  const double fxy = -x / d;
  const double fyx = p.e * y * (gprime * d - g * dprime) / (d * d);
  const double fyy = p.e * g / d - p.m1 - 2.0 * p.m2 * y;
  return {fxx, fxy, fyx, fyy};
}

ModelParams nondimensionalize(const DimensionalParams& d) {
  d.validate();
  if (d.a == 0.0 || d.delta == 0.0) {
    throw InvalidInput("nondimensionalize: a and delta must be nonzero");
  }
  ModelParams p;
  p.r = d.r;
  p.gamma = d.K / d.a;
  p.omega = d.b * d.a * d.a;
  p.xi = d.eta * d.A / d.a;
  // With N = a x, P = a y / c the competition term -delta P^2 rescales to
  // -(a delta / c) y^2.
  p.m2 = d.a * d.delta / d.c;
  p.e = d.e;
  p.m1 = d.m1;
  p.alpha = d.alpha;
  return p;
}

namespace {

double residual(const State& s, const ModelParams& p) {
  auto f = drift(s, p);
  return std::max(std::abs(f[0]), std::abs(f[1]));
}

// Damped Newton polish on the full 2x2 system; returns true when the
// residual target is met and the iterate stayed in the admissible box.
bool polish(State& s, const ModelParams& p, double tol) {
  for (int it = 0; it < 60; ++it) {
    if (residual(s, p) <= tol) return true;
    auto f = drift(s, p);
    auto j = drift_jacobian(s, p);
    const double det = j[0] * j[3] - j[1] * j[2];
    if (!std::isfinite(det) || std::abs(det) < 1e-300) return false;
    double dx = (-f[0] * j[3] + f[1] * j[1]) / det;
    double dy = (-f[1] * j[0] + f[0] * j[2]) / det;
    double step = 1.0;
    const double base = residual(s, p);
    while (step > 1e-6) {
      State trial{s.x + step * dx, s.y + step * dy};
      if (trial.x >= 0.0 && trial.y >= 0.0 && residual(trial, p) < base) {
        s = trial;
        break;
      }
      step *= 0.5;
    }
    if (step <= 1e-6) return residual(s, p) <= tol;
  }
  return residual(s, p) <= tol;
}

// Predator per-capita net growth along the prey nullcline y(x) = r(1-x/gamma) D(x).
double nullcline_mismatch(double x, const ModelParams& p) {
  const double d = (1.0 + p.alpha * p.xi) * (p.omega * x * x + 1.0) + x;
  const double y = p.r * (1.0 - x / p.gamma) * d;
  const double gain = p.e * (x + p.xi * (p.omega * x * x + 1.0)) / d;
  return gain - p.m1 - p.m2 * y;
}

}  // namespace

std::vector<Equilibrium> equilibria(const ModelParams& p) {
  p.validate();
  constexpr double kResidualTol = 1e-9;
  constexpr double kMergeTol = 1e-6;
  std::vector<Equilibrium> out;

  auto push = [&](State s, EquilibriumKind kind) {
    for (const auto& eq : out) {
      if (std::max(std::abs(eq.state.x - s.x), std::abs(eq.state.y - s.y)) < kMergeTol) return;
    }
    double res = residual(s, p);
    if (res > kResidualTol) {
      if (!polish(s, p, kResidualTol)) return;
      res = residual(s, p);
    }
    if (s.x < 0 || s.y < 0) return;
    out.push_back({s, kind, res});
  };

  push({0.0, 0.0}, EquilibriumKind::kTrivial);
  if (std::isfinite(p.gamma)) {
    push({p.gamma, 0.0}, EquilibriumKind::kAxialPrey);
  }
  if (p.m2 > 0.0) {
    const double y_ax = (p.e * p.xi / (1.0 + p.alpha * p.xi) - p.m1) / p.m2;
    if (y_ax > 0.0) push({0.0, y_ax}, EquilibriumKind::kAxialPredator);
  }

  // Interior roots: on the prey nullcline y(x) = r(1-x/gamma)D(x) (so the
  // prey equation is satisfied), scan the predator mismatch for sign changes
  // over x in (0, min(2*gamma, gamma)); y(x) > 0 needs x < gamma.
  if (std::isfinite(p.gamma) && p.m2 >= 0.0) {
    const double y_cap = p.m2 > 0.0 ? 2.0 * p.e / p.m2 : std::numeric_limits<double>::infinity();
    const int n_cells = 400;
    const double x_hi = 2.0 * p.gamma;
    double prev_x = x_hi / n_cells * 1e-6;  // skip the axial root at x = 0
    double prev_v = nullcline_mismatch(prev_x, p);
    for (int i = 1; i <= n_cells; ++i) {
      const double cur_x = x_hi * i / n_cells;
      const double cur_v = nullcline_mismatch(cur_x, p);
      if (std::isfinite(prev_v) && std::isfinite(cur_v) && prev_v * cur_v < 0.0) {
        double lo = prev_x, hi = cur_x, flo = prev_v;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = nullcline_mismatch(mid, p);
          if (flo * fm <= 0.0) hi = mid; else { lo = mid; flo = fm; }
        }
        const double xr = 0.5 * (lo + hi);
        const double yr = p.r * (1.0 - xr / p.gamma) * response_denominator(xr, p);
        if (yr > 0.0 && yr <= y_cap) {
          push({xr, yr}, EquilibriumKind::kInterior);
        }
      }
      prev_x = cur_x;
      prev_v = cur_v;
    }
  }
  return out;
}

}  // namespace ppctl
