import math

import numpy as np
import pytest

from aniso4nls.dispersion import ModelParams, free_solution, propagate
from aniso4nls.grid import Field, Grid, lp_norm
from aniso4nls.profiles import Gaussian, sample
from aniso4nls.solver import (
    Scheme,
    SolveConfig,
    TailGuardError,
    nonlinear_phase_step,
    solve,
    step_lie,
    step_strang,
)

G1 = Grid.uniform(1, 32.0, 256)
PSI = Gaussian(1, 1.0, 2.0)


def test_nonlinear_phase_examples():
    f = Field(G1, np.ones(256))
    out = nonlinear_phase_step(f, math.pi, ModelParams.canonical(1.0, 3.0))
    assert np.allclose(out.values, -1.0, atol=1e-15)
    rng = np.random.default_rng(0)
    v = Field(G1, rng.normal(size=256) + 1j * rng.normal(size=256))
    for p in (3.0, 2.5, 1.8):
        w = nonlinear_phase_step(v, 0.3, ModelParams.canonical(2.0, p))
        assert np.max(np.abs(np.abs(w.values) - np.abs(v.values))) < 1e-15
    assert np.array_equal(nonlinear_phase_step(v, 0.3, ModelParams.canonical(0.0)).values, v.values)
    z = nonlinear_phase_step(Field(G1, np.zeros(256)), 1.0, ModelParams.canonical(1.0, 2.5))
    assert np.all(z.values == 0)


def test_linear_limit():
    f = sample(PSI, G1)
    m = ModelParams.canonical(0.0)
    assert np.max(np.abs(step_strang(f, 0.1, m).values - propagate(f, 0.1, m).values)) < 1e-15
    tr = solve(f, 7.0, SolveConfig(0.07, 100), m)
    assert np.max(np.abs(tr.final.values - free_solution(PSI, 7.0, G1, m).values)) < 1e-9


def test_strang_reversibility():
    f = sample(PSI, G1)
    m = ModelParams.canonical(1.0, 3.0)
    back = step_strang(step_strang(f, 0.05, m), -0.05, m)
    assert np.max(np.abs(back.values - f.values)) < 1e-10
    assert back.time == pytest.approx(0.0)


def _error(dt, ref, m, scheme=Scheme.STRANG):
    f = sample(PSI, G1)
    out = solve(f, 2.0, SolveConfig.spanning(0.0, 2.0, dt, scheme=scheme), m).final
    return np.linalg.norm(out.values - ref)


def test_convergence_orders():
    m = ModelParams.canonical(1.0, 3.0)
    f = sample(PSI, G1)
    ref = solve(f, 2.0, SolveConfig.spanning(0.0, 2.0, 0.01 / 8), m).final.values
    ratio = _error(0.01, ref, m) / _error(0.005, ref, m)
    assert 3.5 <= ratio <= 4.5
    lie = _error(0.02, ref, m, Scheme.LIE) / _error(0.01, ref, m, Scheme.LIE)
    assert 1.6 <= lie <= 2.4
    assert step_lie(f, 0.01, m).time == pytest.approx(0.01)


def test_mass_and_roundtrip():
    m = ModelParams.canonical(1.0, 3.0)
    f = sample(PSI, G1)
    tr = solve(f, 100.0, SolveConfig(0.01, 10_000), m)
    assert np.max(np.abs(tr.mass / tr.mass[0] - 1.0)) < 1e-10
    back = solve(tr.final, 0.0, SolveConfig(-0.01, 10_000), m).final
    assert lp_norm(back - f, 2) < 1e-8


def test_snapshots_and_validation():
    m = ModelParams.canonical(1.0, 2.5)
    f = sample(PSI, G1)
    tr = solve(f, 1.0, SolveConfig(0.1, 10, snapshot_times=(0.0, 0.5)), m)
    assert [s.time for s in tr.snapshots] == pytest.approx([0.0, 0.5, 1.0])
    assert tr.at(0.5).time == pytest.approx(0.5)
    with pytest.raises(KeyError):
        tr.at(0.25)
    with pytest.raises(ValueError):
        solve(f, 1.0, SolveConfig(0.1, 10, snapshot_times=(0.55,)), m)
    with pytest.raises(ValueError):
        solve(f, 2.0, SolveConfig(0.1, 10), m)
    with pytest.raises(ValueError):
        SolveConfig(0.0, 10)
    with pytest.raises(ValueError):
        SolveConfig(0.1, 0)


def test_tail_guard_aborts():
    g = Grid.uniform(1, 10.0, 64)
    f = sample(Gaussian(1, 3.0, 0.6), g)
    with pytest.raises(TailGuardError) as exc:
        solve(f, 1.0, SolveConfig(0.01, 100, tail_guard=True), ModelParams.canonical(1.0, 3.0))
    assert exc.value.fraction > 1e-10


def test_small_data_proximity_is_monotone_in_coupling():
    g = Grid.uniform(1, 64.0, 512)
    f = sample(Gaussian(1, 0.3, 2.0), g)
    T = 2.0
    u_T = solve(f, T, SolveConfig.spanning(0.0, T, 0.01), ModelParams.canonical(0.0)).final
    devs = []
    for lam in (0.0, 0.1, 0.2):
        m = ModelParams.canonical(lam, 3.0)
        u = solve(u_T, 2 * T, SolveConfig.spanning(T, 2 * T, 0.01), m).final
        devs.append(lp_norm(u - propagate(u_T, T, m), 2))
    assert devs[0] < 1e-12 and devs[0] < devs[1] < devs[2]
