#pragma once

#include <array>
#include <string>
#include <vector>

namespace ppctl {

/// Raw (dimensional) coefficients of the prey-predator system with
/// predator intra-specific competition and additional food.
struct DimensionalParams {
  double r = 1.5;      ///< prey intrinsic growth rate (1/time)
  double K = 24.0;     ///< prey carrying capacity (biomass)
  double c = 1.0;      ///< maximum predation rate (1/time)
  double e = 0.4;      ///< maximum predator growth rate (1/time)
  double m1 = 0.15;    ///< predator mortality (1/time)
  double delta = 0.005;  ///< predator competition death rate (1/(biomass*time))
  double A = 2.0;      ///< additional food quantity (biomass)
  double b = 3.75;     ///< group defence coefficient (1/biomass^2)
  double a = 2.0;      ///< half-saturation scaling (biomass)
  double eta = 1.0;    ///< additional food nutrition scaling
  double alpha = 1.0;  ///< additional food quality parameter

  void validate() const;  // throws InvalidInput
};

/// Non-dimensional model coefficients. `gamma` may be +infinity, which turns
/// the logistic term off exactly (the prey equation becomes linear in x);
/// this is the configuration used by the analytic mean-law checks.
struct ModelParams {
  double r = 1.5;
  double gamma = 12.0;
  double omega = 15.0;
  double e = 0.4;
  double m1 = 0.15;
  double m2 = 0.01;
  double alpha = 1.0;  ///< additional food quality; overridden per step when used as a control
  double xi = 1.0;     ///< additional food quantity; likewise

  void validate() const;  // throws InvalidInput
};

struct State {
  double x = 0.0;  ///< prey density
  double y = 0.0;  ///< predator density
};

enum class EquilibriumKind { kTrivial, kAxialPrey, kAxialPredator, kInterior };

struct Equilibrium {
  State state;
  EquilibriumKind kind = EquilibriumKind::kTrivial;
  double drift_residual = 0.0;  ///< max-norm of the drift at `state`
};

const char* to_string(EquilibriumKind k);

/// Per-predator predation rate x / ((1+alpha*xi)(omega x^2 + 1) + x).
/// Bounded in [0, 1); decays to 0 for large x when omega > 0.
double functional_response(double x, const ModelParams& p);

/// Common denominator (1+alpha*xi)(omega x^2 + 1) + x of the response terms.
double response_denominator(double x, const ModelParams& p);

/// Deterministic vector field: (dx/dt, dy/dt).
///   dx/dt = r x (1 - x/gamma) - x y / D
///   dy/dt = y [ e (x + xi (omega x^2 + 1)) / D - m1 - m2 y ]
std::array<double, 2> drift(const State& s, const ModelParams& p);

/// Jacobian of `drift`, row-major: [dfx/dx, dfx/dy, dfy/dx, dfy/dy].
std::array<double, 4> drift_jacobian(const State& s, const ModelParams& p);

/// Map dimensional coefficients to the non-dimensional set:
/// gamma = K/a, xi = eta*A/a, omega = b*a^2, m2 = a*delta/c;
/// r, e, m1, alpha pass through.
ModelParams nondimensionalize(const DimensionalParams& d);

/// All nonnegative roots of drift = 0 inside x in [0, 2*gamma],
/// y in [0, 2*e/m2]. Always contains (0,0) and (gamma,0); the axial
/// predator root (0, (e xi/(1+alpha xi) - m1)/m2) is included when positive.
/// Roots are located by sign scanning plus bisection on the prey nullcline
/// and polished by Newton steps until the drift residual is <= 1e-9.
/// Roots closer than 1e-6 in max norm are merged.
std::vector<Equilibrium> equilibria(const ModelParams& p);

}  // namespace ppctl
