import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aniso4nls.dispersion import ModelParams
from aniso4nls.grid import Grid
from aniso4nls.metrics import (
    AdmissiblePair,
    UnreliableFitWarning,
    fit_power_law,
    points_per_decade,
    strichartz_quotient,
)
from aniso4nls.profiles import Gaussian

TIMES = [4.0, 8.0, 16.0, 32.0]


def test_fit_exact_power_laws():
    f = fit_power_law((t, t**-0.5) for t in TIMES)
    assert abs(f.exponent + 0.5) < 1e-12 and f.r_squared == pytest.approx(1.0, abs=1e-12)
    f = fit_power_law((t, 3 * t**-0.375) for t in TIMES)
    assert abs(f.exponent + 0.375) < 1e-12
    assert f.predict(8.0) == pytest.approx(3 * 8.0**-0.375, rel=1e-12)
    assert f.window == (4.0, 32.0) and f.n_points == 4


def test_fit_tolerates_small_perturbations():
    rng = np.random.default_rng(7)
    t = np.geomspace(4, 64, 12)
    v = t**-0.25 * (1 + 0.02 * rng.standard_normal(t.size))
    assert abs(fit_power_law(zip(t, v)).exponent + 0.25) < 0.05


@pytest.mark.parametrize(
    "series",
    [
        [(1, 1), (2, 0.5), (4, 0.25)],
        [(1, 1), (3, 0.5), (2, 0.4), (4, 0.2)],
        [(1, 1), (2, 0.0), (3, 0.3), (4, 0.2)],
        [(0, 1), (2, 0.5), (3, 0.3), (4, 0.2)],
    ],
)
def test_fit_rejects_bad_series(series):
    with pytest.raises(ValueError):
        fit_power_law(series)


def test_fit_flags_poor_fits():
    with pytest.warns(UnreliableFitWarning):
        f = fit_power_law([(1, 1), (2, 5), (3, 0.2), (4, 4)])
    assert not f.reliable


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_fit_recovers_any_exponent(a, c):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        f = fit_power_law((t, c * t**a) for t in TIMES)
    assert abs(f.exponent - a) < 1e-10


def test_points_per_decade():
    assert points_per_decade(np.geomspace(1, 100, 21)) == pytest.approx(10.5)


def test_admissible_pairs():
    assert AdmissiblePair(math.inf, 2, 3).smoothing == 0
    assert AdmissiblePair(2, 6, 3).smoothing == pytest.approx(1 / 3)
    AdmissiblePair(4, 3, 3)
    AdmissiblePair(4, 4, 2)
    for q, r, d in [(2, 8, 3), (4, 4, 3), (1, 6, 3), (2, math.inf, 2)]:
        with pytest.raises(ValueError):
            AdmissiblePair(q, r, d)


def test_quotient_unitarity_and_homogeneity():
    g = Grid((12.0, 12.0), (64, 64))
    m = ModelParams.canonical(0.0, 3.0)
    psi = Gaussian(2, 1.0, 1.5)
    q = strichartz_quotient(AdmissiblePair(math.inf, 2, 2), (0.5, 1.0), psi, g, m)
    assert abs(q - 1) < 1e-12
    pair = AdmissiblePair(4, 4, 2)
    a = strichartz_quotient(pair, (0.5, 1.0), psi, g, m)
    b = strichartz_quotient(pair, (0.5, 1.0), psi.scaled(3.0), g, m)
    assert a == pytest.approx(b, rel=1e-12)
    with pytest.raises(ValueError):
        strichartz_quotient(pair, (0.5, 1.0), psi, g, m, samples=10)
    with pytest.raises(ValueError):
        strichartz_quotient(pair, (1.0, 0.5), psi, g, m)
    with pytest.raises(ValueError):
        strichartz_quotient(AdmissiblePair(4, 3, 3), (0.5, 1.0), psi, g, m)
