"""Smoke tests for the python bindings against the C++ core."""

import math

import pytest

import ppctl


def paper_params():
    p = ppctl.ModelParams()
    p.r, p.gamma, p.omega = 1.5, 12.0, 15.0
    p.e, p.m1, p.m2 = 0.4, 0.15, 0.01
    p.alpha, p.xi = 1.0, 1.0
    return p


def test_version():
    assert ppctl.__version__


def test_functional_response_value():
    p = paper_params()
    p.alpha, p.xi = 2.0, 0.5
    assert ppctl.functional_response(1.0, p) == pytest.approx(1.0 / 33.0, rel=1e-14)
    with pytest.raises(ValueError):
        ppctl.functional_response(-1.0, p)


def test_drift_reference_value():
    f = ppctl.drift(ppctl.State(2.0, 8.0), paper_params())
    assert f[0] == pytest.approx(147.0 / 62.0, rel=1e-14)
    assert f[1] == pytest.approx(-166.0 / 775.0, rel=1e-14)


def test_equilibria_contains_axial_predator():
    eqs = ppctl.equilibria(paper_params())
    axial = [e for e in eqs if e.kind == ppctl.EquilibriumKind.axial_predator]
    assert len(axial) == 1
    assert axial[0].state.y == pytest.approx(5.0, abs=1e-8)
    assert all(e.drift_residual <= 1e-9 for e in eqs)


def test_simulation_is_deterministic_and_positive():
    cfg = ppctl.SimConfig()
    cfg.dt, cfg.horizon = 1e-3, 1.0
    schedule = ppctl.ControlSchedule.constant(
        ppctl.ControlMode.quality, 1.0, cfg.n_steps() + 1, ppctl.Bounds(0.0, 10.0)
    )
    noise = ppctl.NoiseParams()
    a = ppctl.simulate_path(2.0, 8.0, schedule, paper_params(), noise, cfg, seed=7)
    b = ppctl.simulate_path(2.0, 8.0, schedule, paper_params(), noise, cfg, seed=7)
    assert a.x == b.x and a.y == b.y
    assert min(a.x) > 0.0 and min(a.y) > 0.0
    assert a.clamp_events == 0


def test_box_muller():
    z1, z2 = ppctl.box_muller(0.5, 0.25)
    assert abs(z1) < 1e-15
    assert z2 == pytest.approx(math.sqrt(2.0 * math.log(2.0)), rel=1e-12)


def test_ensemble_worker_independence():
    cfg = ppctl.SimConfig()
    cfg.dt, cfg.horizon, cfg.record_noise = 0.01, 1.0, False
    schedule = ppctl.ControlSchedule.constant(
        ppctl.ControlMode.quality, 1.0, cfg.n_steps() + 1, ppctl.Bounds(0.0, 10.0)
    )
    one = ppctl.run_ensemble(
        16, 2.0, 8.0, schedule, paper_params(), ppctl.NoiseParams(), cfg, seed=5, threads=1
    )
    many = ppctl.run_ensemble(
        16, 2.0, 8.0, schedule, paper_params(), ppctl.NoiseParams(), cfg, seed=5, threads=4
    )
    assert one.mean_x == many.mean_x
    assert one.std_y == many.std_y


def test_hamiltonian_costate_free_value():
    h = ppctl.hamiltonian(
        ppctl.State(2.0, 8.0), 1.0, 1.0, ppctl.AdjointState(), paper_params(), ppctl.NoiseParams()
    )
    assert h == 1.0


def test_sweep_runs_and_converges():
    cfg = ppctl.SimConfig()
    cfg.dt, cfg.horizon = 0.05, 10.0
    noise = ppctl.NoiseParams()
    noise.sigma1 = noise.sigma2 = 0.0
    noise.lambda_ = 0.0
    target = ppctl.TargetSpec(11.99, 5.06, epsilon=1.0)
    result = ppctl.forward_backward_sweep(
        2.0,
        8.0,
        ppctl.ControlMode.quality,
        target,
        paper_params(),
        noise,
        cfg,
        n_paths=1,
        seed=3,
    )
    assert result.converged
    assert 0.0 <= result.objective <= cfg.horizon
    assert result.history[-1].sup_change <= ppctl.SweepConfig().tol
