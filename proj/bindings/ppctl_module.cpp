#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ppctl/config.hpp"
#include "ppctl/errors.hpp"
#include "ppctl/model.hpp"
#include "ppctl/montecarlo.hpp"
#include "ppctl/noise.hpp"
#include "ppctl/optctl.hpp"
#include "ppctl/run.hpp"
#include "ppctl/sim.hpp"
#include "ppctl/version.hpp"

namespace py = pybind11;
using namespace ppctl;

namespace {

std::vector<double> states_x(const Path& p) {
  std::vector<double> out;
  out.reserve(p.states.size());
  for (const auto& s : p.states) out.push_back(s.x);
  return out;
}

std::vector<double> states_y(const Path& p) {
  std::vector<double> out;
  out.reserve(p.states.size());
  for (const auto& s : p.states) out.push_back(s.y);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prey-predator jump-diffusion simulation and additional-food control";
  m.attr("__version__") = kVersion;

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<State>(m, "State")
      .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def_readwrite("x", &State::x)
      .def_readwrite("y", &State::y)
      .def("__repr__", [](const State& s) {
        return "State(x=" + std::to_string(s.x) + ", y=" + std::to_string(s.y) + ")";
      });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("r", &ModelParams::r)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("omega", &ModelParams::omega)
      .def_readwrite("e", &ModelParams::e)
      .def_readwrite("m1", &ModelParams::m1)
      .def_readwrite("m2", &ModelParams::m2)
      .def_readwrite("alpha", &ModelParams::alpha)
      .def_readwrite("xi", &ModelParams::xi)
      .def("validate", &ModelParams::validate);

  py::class_<DimensionalParams>(m, "DimensionalParams")
      .def(py::init<>())
      .def_readwrite("r", &DimensionalParams::r)
      .def_readwrite("K", &DimensionalParams::K)
      .def_readwrite("c", &DimensionalParams::c)
      .def_readwrite("e", &DimensionalParams::e)
      .def_readwrite("m1", &DimensionalParams::m1)
      .def_readwrite("delta", &DimensionalParams::delta)
      .def_readwrite("A", &DimensionalParams::A)
      .def_readwrite("b", &DimensionalParams::b)
      .def_readwrite("a", &DimensionalParams::a)
      .def_readwrite("eta", &DimensionalParams::eta)
      .def_readwrite("alpha", &DimensionalParams::alpha);

  py::class_<NoiseParams>(m, "NoiseParams")
      .def(py::init<>())
      .def_readwrite("sigma1", &NoiseParams::sigma1)
      .def_readwrite("sigma2", &NoiseParams::sigma2)
      .def_readwrite("lambda_", &NoiseParams::lambda)
      .def_readwrite("jump1", &NoiseParams::jump1)
      .def_readwrite("jump2", &NoiseParams::jump2);

  py::enum_<EquilibriumKind>(m, "EquilibriumKind")
      .value("trivial", EquilibriumKind::kTrivial)
      .value("axial_prey", EquilibriumKind::kAxialPrey)
      .value("axial_predator", EquilibriumKind::kAxialPredator)
      .value("interior", EquilibriumKind::kInterior);

  py::class_<Equilibrium>(m, "Equilibrium")
      .def_readonly("state", &Equilibrium::state)
      .def_readonly("kind", &Equilibrium::kind)
      .def_readonly("drift_residual", &Equilibrium::drift_residual);

  py::enum_<ControlMode>(m, "ControlMode")
      .value("quality", ControlMode::kQuality)
      .value("quantity", ControlMode::kQuantity);

  py::class_<Bounds>(m, "Bounds")
      .def(py::init<double, double>(), py::arg("lo") = 0.0, py::arg("hi") = 10.0)
      .def_readwrite("lo", &Bounds::lo)
      .def_readwrite("hi", &Bounds::hi);

  py::class_<ControlSchedule>(m, "ControlSchedule")
      .def_static("constant", &ControlSchedule::constant, py::arg("mode"), py::arg("value"),
                  py::arg("n_points"), py::arg("bounds"))
      .def_readwrite("mode", &ControlSchedule::mode)
      .def_readwrite("bounds", &ControlSchedule::bounds)
      .def_readwrite("values", &ControlSchedule::values);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("horizon", &SimConfig::horizon)
      .def_readwrite("positivity_floor", &SimConfig::positivity_floor)
      .def_readwrite("record_noise", &SimConfig::record_noise)
      .def("n_steps", &SimConfig::n_steps);

  py::class_<NoiseIncrement>(m, "NoiseIncrement")
      .def(py::init<>())
      .def_readwrite("dW1", &NoiseIncrement::dW1)
      .def_readwrite("dW2", &NoiseIncrement::dW2)
      .def_readwrite("dN1", &NoiseIncrement::dN1)
      .def_readwrite("dN2", &NoiseIncrement::dN2);

  py::class_<Path>(m, "Path")
      .def_readonly("times", &Path::times)
      .def_readonly("alphas", &Path::alphas)
      .def_readonly("xis", &Path::xis)
      .def_readonly("clamp_events", &Path::clamp_events)
      .def_property_readonly("x", &states_x)
      .def_property_readonly("y", &states_y)
      .def("n_points", &Path::n_points);

  py::class_<TargetSpec>(m, "TargetSpec")
      .def(py::init([](double x, double y, double epsilon) {
             return TargetSpec{{x, y}, epsilon};
           }),
           py::arg("x"), py::arg("y"), py::arg("epsilon") = 0.5)
      .def_readwrite("target", &TargetSpec::target)
      .def_readwrite("epsilon", &TargetSpec::epsilon);

  py::class_<HittingTime>(m, "HittingTime")
      .def_readonly("tau", &HittingTime::tau)
      .def_readonly("censored", &HittingTime::censored);

  py::class_<EnsembleStats>(m, "EnsembleStats")
      .def_readonly("n_paths", &EnsembleStats::n_paths)
      .def_readonly("times", &EnsembleStats::times)
      .def_readonly("mean_x", &EnsembleStats::mean_x)
      .def_readonly("mean_y", &EnsembleStats::mean_y)
      .def_readonly("std_x", &EnsembleStats::std_x)
      .def_readonly("std_y", &EnsembleStats::std_y)
      .def_readonly("hitting_times", &EnsembleStats::hitting_times)
      .def_readonly("censored_fraction", &EnsembleStats::censored_fraction)
      .def_readonly("total_clamp_events", &EnsembleStats::total_clamp_events)
      .def_readonly("min_x", &EnsembleStats::min_x)
      .def_readonly("min_y", &EnsembleStats::min_y);

  py::class_<ObjectiveEstimate>(m, "ObjectiveEstimate")
      .def_readonly("value", &ObjectiveEstimate::value)
      .def_readonly("std_error", &ObjectiveEstimate::std_error)
      .def_readonly("censored_fraction", &ObjectiveEstimate::censored_fraction);

  py::class_<AdjointState>(m, "AdjointState")
      .def(py::init<>())
      .def_readwrite("p1", &AdjointState::p1)
      .def_readwrite("p2", &AdjointState::p2)
      .def_readwrite("q1", &AdjointState::q1)
      .def_readwrite("q2", &AdjointState::q2)
      .def_readwrite("q3", &AdjointState::q3)
      .def_readwrite("q4", &AdjointState::q4)
      .def_readwrite("r1", &AdjointState::r1)
      .def_readwrite("r2", &AdjointState::r2);

  py::enum_<QMode>(m, "QMode")
      .value("pathwise_zero", QMode::kPathwiseZero)
      .value("regression", QMode::kRegression);

  py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &SweepConfig::max_iters)
      .def_readwrite("relaxation", &SweepConfig::relaxation)
      .def_readwrite("tol", &SweepConfig::tol)
      .def_readwrite("q_mode", &SweepConfig::q_mode);

  py::class_<SweepHistoryEntry>(m, "SweepHistoryEntry")
      .def_readonly("iter", &SweepHistoryEntry::iter)
      .def_readonly("sup_change", &SweepHistoryEntry::sup_change)
      .def_readonly("objective", &SweepHistoryEntry::objective);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("schedule", &SweepResult::schedule)
      .def_readonly("state_path", &SweepResult::state_path)
      .def_readonly("adjoints", &SweepResult::adjoints)
      .def_readonly("objective", &SweepResult::objective)
      .def_readonly("objective_se", &SweepResult::objective_se)
      .def_readonly("censored_fraction", &SweepResult::censored_fraction)
      .def_readonly("history", &SweepResult::history)
      .def_readonly("converged", &SweepResult::converged);

  m.def("functional_response", &functional_response, py::arg("x"), py::arg("params"),
        "Per-predator predation rate x / ((1+alpha*xi)(omega x^2+1) + x)");
  m.def("drift", &drift, py::arg("state"), py::arg("params"),
        "Deterministic vector field (dx/dt, dy/dt)");
  m.def("nondimensionalize", &nondimensionalize, py::arg("params"));
  m.def("equilibria", &equilibria, py::arg("params"),
        "Nonnegative roots of the drift with polished residuals");
  m.def("box_muller", &box_muller, py::arg("u1"), py::arg("u2"));

  m.def(
      "simulate_path",
      [](double x0, double y0, const ControlSchedule& schedule, const ModelParams& mp,
         const NoiseParams& np, const SimConfig& cfg, std::uint64_t seed,
         std::uint64_t path_index) {
        return simulate_path(x0, y0, schedule, mp, np, cfg, derive_stream(seed, path_index));
      },
      py::arg("x0"), py::arg("y0"), py::arg("schedule"), py::arg("model"), py::arg("noise"),
      py::arg("sim"), py::arg("seed") = 42, py::arg("path_index") = 0,
      "Euler path of the jump-diffusion system, reproducible in (seed, path_index)");

  m.def("hitting_time", &hitting_time, py::arg("path"), py::arg("target"));

  m.def(
      "run_ensemble",
      [](std::int64_t n, double x0, double y0, const ControlSchedule& schedule,
         const ModelParams& mp, const NoiseParams& np, const SimConfig& cfg,
         std::uint64_t seed, std::optional<TargetSpec> target, int threads) {
        return run_ensemble(n, x0, y0, schedule, mp, np, cfg, seed, target, threads);
      },
      py::arg("n"), py::arg("x0"), py::arg("y0"), py::arg("schedule"), py::arg("model"),
      py::arg("noise"), py::arg("sim"), py::arg("seed") = 42,
      py::arg("target") = std::nullopt, py::arg("threads") = 0,
      py::call_guard<py::gil_scoped_release>());

  m.def("estimate_objective", &estimate_objective, py::arg("stats"), py::arg("horizon"));

  m.def("hamiltonian", &hamiltonian, py::arg("state"), py::arg("alpha"), py::arg("xi"),
        py::arg("adjoint"), py::arg("model"), py::arg("noise"));
  m.def("adjoint_drift", &adjoint_drift, py::arg("state"), py::arg("alpha"), py::arg("xi"),
        py::arg("adjoint"), py::arg("model"), py::arg("noise"));
  m.def("control_update_quality", &control_update_quality, py::arg("state"), py::arg("adjoint"),
        py::arg("model"), py::arg("bounds"));
  m.def("control_update_quantity", &control_update_quantity, py::arg("state"),
        py::arg("adjoint"), py::arg("model"), py::arg("bounds"));
  m.def(
      "backward_pass",
      [](const Path& path, const ModelParams& mp, const NoiseParams& np, const SweepConfig& cfg) {
        return backward_pass(path, mp, np, cfg);
      },
      py::arg("path"), py::arg("model"), py::arg("noise"), py::arg("config") = SweepConfig{});

  m.def(
      "forward_backward_sweep",
      [](double x0, double y0, ControlMode mode, const TargetSpec& target,
         const ModelParams& mp, const NoiseParams& np, const SimConfig& simcfg,
         const SweepConfig& sweepcfg, const Bounds& bounds, std::uint64_t seed,
         std::int64_t n_paths, int threads) {
        return forward_backward_sweep(x0, y0, mode, target, mp, np, simcfg, sweepcfg, bounds,
                                      seed, n_paths, threads);
      },
      py::arg("x0"), py::arg("y0"), py::arg("mode"), py::arg("target"), py::arg("model"),
      py::arg("noise"), py::arg("sim"), py::arg("sweep") = SweepConfig{},
      py::arg("bounds") = Bounds{0.0, 10.0}, py::arg("seed") = 42, py::arg("n_paths") = 100,
      py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("model", &RunConfig::model)
      .def_readwrite("noise", &RunConfig::noise)
      .def_readwrite("sim", &RunConfig::sim)
      .def_readwrite("sweep", &RunConfig::sweep)
      .def_readwrite("alpha_bounds", &RunConfig::alpha_bounds)
      .def_readwrite("xi_bounds", &RunConfig::xi_bounds)
      .def_readwrite("target_epsilon", &RunConfig::target_epsilon)
      .def_readwrite("x0", &RunConfig::x0)
      .def_readwrite("y0", &RunConfig::y0)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("paths", &RunConfig::paths)
      .def_readwrite("sweep_paths", &RunConfig::sweep_paths)
      .def_readwrite("threads", &RunConfig::threads)
      .def("resolve_target", &RunConfig::resolve_target)
      .def("validate", &RunConfig::validate);

  m.def("scenario_preset", &scenario_preset, py::arg("name"));
  m.def(
      "run_scenario",
      [](const RunConfig& cfg, const std::string& name, const std::filesystem::path& out) {
        const auto outcome = run_scenario(cfg, name, out);
        py::dict d;
        d["converged"] = outcome.converged;
        d["mean_alpha"] = outcome.mean_alpha;
        d["mean_xi"] = outcome.mean_xi;
        d["terminal_mean_x"] = outcome.terminal_mean_x;
        d["terminal_mean_y"] = outcome.terminal_mean_y;
        d["objective_quality"] = outcome.objective_quality;
        d["out_dir"] = outcome.artifacts.out_dir.string();
        return d;
      },
      py::arg("config"), py::arg("name"), py::arg("out_dir"),
      "Run a full scenario pipeline and return its summary metrics");
}
