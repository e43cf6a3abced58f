import math

import numpy as np
import pytest

from aniso4nls.asymptotics import leading_term
from aniso4nls.dispersion import ModelParams, free_solution
from aniso4nls.final_state import (
    FinalStateConfig,
    NonContractionError,
    backward_construct,
    decay_prediction,
    default_alpha,
    geometric_times,
    in_theorem_range,
    picard_iterate,
    profile_field,
    scattering_defect,
    solution_distance,
    terminal_datum,
    truncation_estimate,
)
from aniso4nls.grid import Grid, lp_norm
from aniso4nls.metrics import fit_power_law
from aniso4nls.profiles import Gaussian

G = Grid((400.0,), (2048,))
M = ModelParams.canonical(1.0, 4.0)  # d = 1, p = 4: decay power 3/2
CFG = FinalStateConfig.standard(3.0, 48.0, 1, 4.0, per_unit_log=60)


def _l2(a, b):
    return math.sqrt(float(np.sum(np.abs(a - b) ** 2)) * G.dual_cell_volume)


def test_decay_prediction_values():
    p3 = decay_prediction(3, 2.0)
    assert p3.gamma == pytest.approx(0.25) and p3.branch == "1/(p-1)-d/4"
    p2 = decay_prediction(2, 2.5)
    assert p2.gamma == pytest.approx(1.0 / 6.0)
    assert decay_prediction(2, 2.05).branch == "d(p-1)/2-1"
    assert decay_prediction(3, 1.85).branch == "d(p-1)/2-1"
    for d, ps in ((2, np.linspace(2.01, 2.99, 25)), (3, np.linspace(1.81, 2.32, 25))):
        assert all(decay_prediction(d, p).gamma > 0 for p in ps)
    assert in_theorem_range(2, 2.5) and not in_theorem_range(2, 3.0) and not in_theorem_range(1, 4.0)


def test_default_alpha_is_midpoint():
    assert default_alpha(3, 2.0) == pytest.approx(0.5 * (0.25 + 0.5))
    with pytest.raises(ValueError):
        default_alpha(2, 1.5)


def test_config_invariants():
    ts = tuple(geometric_times(3.0, 10.0, 10))
    FinalStateConfig(10.0, ts, 0.3)
    with pytest.raises(ValueError):
        FinalStateConfig(10.0, tuple(geometric_times(2.0, 10.0, 10)), 0.3)
    with pytest.raises(ValueError):
        FinalStateConfig(10.0, ts[::-1], 0.3)
    with pytest.raises(ValueError):
        FinalStateConfig(10.0, ts, 0.5)
    with pytest.raises(ValueError):
        FinalStateConfig(12.0, ts, 0.3)


def test_linear_limit():
    m0 = M.with_coupling(0.0)
    psi = Gaussian(1, 0.3, 2.0)
    pic = picard_iterate(CFG, G, psi, m0)
    assert pic.distances == [0.0]
    assert np.array_equal(pic.interaction[-1], pic.interaction[0])
    bk = backward_construct(CFG, G, psi, m0)
    exact = free_solution(psi, CFG.T_start, G, m0)
    assert lp_norm(bk.start - exact, 2) < 1e-12
    u_plus = profile_field(10.0, G, psi, m0)
    assert np.array_equal(u_plus.values, leading_term(10.0, G, psi).values)
    d = scattering_defect(pic, psi, m0)
    assert d.series.values.max() < 1e-13 and d.fit is None


def test_profile_preserves_mass():
    # the stationary-point synthesis is a change of variables, hence isometric
    psi = Gaussian(1, 0.3, 2.0)
    target = 0.3 * math.sqrt(2.0 * math.sqrt(math.pi))
    for t in (8.0, 16.0, 32.0, 64.0):
        assert lp_norm(profile_field(t, Grid((2000.0,), (8192,)), psi, M), 2) == pytest.approx(target, rel=1e-10)


def test_two_syntheses_converge():
    g = Grid((2000.0,), (8192,))
    psi = Gaussian(1, 0.3, 2.0)
    times = [8.0, 16.0, 32.0, 64.0]
    diff = [lp_norm(profile_field(t, g, psi, M) - profile_field(t, g, psi, M, "spectral"), 2) for t in times]
    assert fit_power_law(zip(times, diff)).exponent <= -0.375 + 0.1
    with pytest.raises(ValueError):
        profile_field(2.0, g, psi, M)
    with pytest.raises(ValueError):
        profile_field(4.0, g, psi, M, "other")


def test_contraction_and_agreement():
    psi = Gaussian(1, 0.3, 2.0)
    pic = picard_iterate(CFG, G, psi, M)
    assert pic.converged
    assert all(r < 1 for r in pic.ratios[:3])
    assert all(a > b for a, b in zip(pic.distances, pic.distances[1:]))
    bk = backward_construct(CFG, G, psi, M)
    assert solution_distance(pic, bk) < max(2 * CFG.contraction_tol, truncation_estimate(CFG, psi, M, 1))
    z = terminal_datum(CFG, G, psi, M)
    assert abs(lp_norm(bk.start, 2) - lp_norm(z, 2)) < 1e-10 * lp_norm(z, 2)


def test_smaller_data_contracts_faster():
    big = picard_iterate(CFG, G, Gaussian(1, 0.3, 2.0), M)
    small = picard_iterate(CFG, G, Gaussian(1, 0.15, 2.0), M)
    n = min(len(big.distances), len(small.distances))
    assert all(s <= b for s, b in zip(small.distances[:n], big.distances[:n]))


def test_truncation_sweep():
    psi = Gaussian(1, 0.3, 2.0)
    a = picard_iterate(CFG, G, psi, M)
    b = picard_iterate(CFG.with_horizon(96.0), G, psi, M)
    assert b.times[-1] == pytest.approx(a.times[-1])
    assert _l2(a.interaction[-1], b.interaction[-1]) < truncation_estimate(CFG, psi, M, 1)


def test_large_data_reports_non_contraction():
    with pytest.raises(NonContractionError) as exc:
        picard_iterate(CFG, G, Gaussian(1, 10.0, 2.0), M)
    assert exc.value.data_size > 1.0
    sol = picard_iterate(CFG, G, Gaussian(1, 10.0, 2.0), M, raise_on_growth=False)
    assert not sol.converged
