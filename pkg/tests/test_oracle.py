import math

import numpy as np
import pytest

from aniso4nls.dispersion import ModelParams, free_solution
from aniso4nls.grid import Grid
from aniso4nls.oracle import (
    OscillatoryIntegral,
    fresnel_closed_form,
    fresnel_integral,
    ibp_transform,
    integrate,
    kernel_integral,
    quartic_phase,
)
from aniso4nls.profiles import Gaussian


def test_kernel_matches_spectral_flow():
    psi = Gaussian(1, 1.0, 1.5)
    g = Grid((200.0,), (4096,))
    u = free_solution(psi, 2.0, g, ModelParams.canonical())
    for j in (2048, 2100, 2300):
        x = float(g.axes[0][j])
        assert abs(kernel_integral(2.0, x, psi.fourier) - u.values[j]) < 1e-9


def test_gaussian_integral_without_oscillation():
    oi = OscillatoryIntegral(quartic_phase(0.0, 0.0), lambda x: np.exp(-x * x), (-10.0, 10.0))
    assert integrate(oi) == pytest.approx(math.sqrt(math.pi), abs=1e-13)


@pytest.mark.parametrize("t", [1.0, 10.0, 100.0])
@pytest.mark.parametrize("x", [0.0, 5.0])
def test_integration_by_parts_identity(t, x):
    psi = Gaussian(1, 1.0, 1.0, 0.3)
    c = float(np.cbrt(x / t)) if x else 0.0
    oi = OscillatoryIntegral(quartic_phase(t, x), psi.fourier, (-9.0, 9.0), c,
                             lambda xi: psi.fourier_derivative(0, xi))
    assert abs(integrate(oi) - ibp_transform(oi).evaluate()) < 1e-8


def test_ibp_requires_derivative():
    oi = OscillatoryIntegral(quartic_phase(1.0, 0.0), np.cos, (-1.0, 1.0))
    with pytest.raises(ValueError):
        ibp_transform(oi)


@pytest.mark.parametrize("t, z", [(1.0, 0.0), (3.0, 2.0), (20.0, -7.0)])
def test_fresnel(t, z):
    assert abs(fresnel_integral(t, z) - fresnel_closed_form(t, z)) < 1e-6


def test_invalid_inputs():
    with pytest.raises(ValueError):
        kernel_integral(0.0, 1.0, np.cos)
    with pytest.raises(ValueError):
        fresnel_integral(-1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(OscillatoryIntegral(quartic_phase(1.0, 0.0), np.cos, (1.0, -1.0)))
