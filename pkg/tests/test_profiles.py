import math

import numpy as np
import pytest

from aniso4nls.grid import Grid, dft, lp_norm
from aniso4nls.profiles import (
    FiniteSum,
    Gaussian,
    HermiteGaussian,
    default_profile,
    eval_fourier,
    eval_position,
    sample,
    sobolev_h0s_norm,
)


def test_hermite_transform_matches_dft():
    g = Grid.uniform(1, 25.0, 512)
    for n in range(4):
        psi = HermiteGaussian(1, 1.0, 1.3, n, 0.7, 0.5)
        a = psi.fourier(g.freqs[0])
        b = dft(sample(psi, g).values, g)
        assert np.max(np.abs(a - b)) < 1e-12, n


def test_fourier_derivative_by_finite_difference():
    psi = HermiteGaussian(2, 1.0 + 0.5j, (1.1, 0.8), (2, 1), (0.3, -0.2), (0.1, 0.4))
    xi = (np.array([0.3]), np.array([-0.7]))
    h = 1e-6
    for axis in range(2):
        plus = list(xi)
        minus = list(xi)
        plus[axis] = plus[axis] + h
        minus[axis] = minus[axis] - h
        fd = (psi.fourier(*plus) - psi.fourier(*minus)) / (2 * h)
        assert np.abs(fd - psi.fourier_derivative(axis, *xi)).max() < 1e-8


def test_finite_sum_is_linear():
    a, b = Gaussian(1, 1.0, 1.0), Gaussian(1, 0.5j, 2.0, 1.0)
    s = FiniteSum((a, b))
    x = np.linspace(-3, 3, 7)
    assert np.allclose(s.position(x), a.position(x) + b.position(x))
    assert np.allclose(s.fourier(x), a.fourier(x) + b.fourier(x))
    with pytest.raises(ValueError):
        FiniteSum((a, Gaussian(2)))


def test_point_evaluators():
    psi = Gaussian(2)
    assert eval_position(psi, [0.0, 0.0]) == pytest.approx(1.0)
    assert eval_fourier(psi, np.zeros((3, 2))) == pytest.approx(np.ones(3))


def test_sobolev_norm_and_scaling():
    psi = Gaussian(1)
    assert sobolev_h0s_norm(psi, 0.0) == pytest.approx(math.pi**0.25, rel=1e-12)
    # int (1 + x^2) e^{-x^2} dx = 3 sqrt(pi) / 2
    assert sobolev_h0s_norm(psi, 1.0) == pytest.approx(math.sqrt(1.5 * math.sqrt(math.pi)), rel=1e-12)
    small = default_profile(2, 2.2, 0.1)
    assert sobolev_h0s_norm(small, 2.2) == pytest.approx(0.1, rel=1e-10)


def test_dilation():
    psi = Gaussian(1, 1.0, 1.0, 0.5, 0.2)
    x = np.linspace(-4, 4, 9)
    assert np.allclose(psi.dilated(2.0).position(x), psi.position(x / 2.0))
    g = Grid.uniform(1, 40.0, 1024)
    assert lp_norm(sample(psi.dilated(4.0), g), 2) == pytest.approx(2 * lp_norm(sample(psi, g), 2), rel=1e-12)


def test_invalid_profiles():
    with pytest.raises(ValueError):
        Gaussian(1, 1.0, -1.0)
    with pytest.raises(ValueError):
        HermiteGaussian(4)
    with pytest.raises(ValueError):
        HermiteGaussian(1, order=-1)
