"""Final data with closed-form position and Fourier evaluators.

Every profile is a finite sum of separable Hermite-Gaussian terms

    A * prod_j H_{n_j}((x_j - c_j)/w_j) exp(-(x_j - c_j)^2 / (2 w_j^2)) * exp(i k.x)

whose unitary transform is again Hermite-Gaussian, so psi_hat can be
evaluated at arbitrary (off-lattice) frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite as H

from .grid import Field, Grid, SpectralField


def _hermite(n: int, u):
    if n == 0:
        return np.ones_like(u)
    c = np.zeros(n + 1)
    c[n] = 1.0
    return H.hermval(u, c)


def _as_vec(v, d: int, name: str) -> tuple:
    arr = np.broadcast_to(np.asarray(v, dtype=float), (d,))
    if name == "width" and np.any(arr <= 0):
        raise ValueError("widths must be positive")
    return tuple(float(a) for a in arr)


@dataclass(frozen=True)
class HermiteGaussian:
    """Separable Hermite-Gaussian term; order 0 on every axis is a Gaussian."""

    d: int
    amplitude: complex = 1.0
    width: tuple = (1.0,)
    order: tuple = (0,)
    center: tuple = (0.0,)
    carrier: tuple = (0.0,)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("profile dimension must be 1, 2 or 3")
        object.__setattr__(self, "width", _as_vec(self.width, self.d, "width"))
        object.__setattr__(self, "center", _as_vec(self.center, self.d, "center"))
        object.__setattr__(self, "carrier", _as_vec(self.carrier, self.d, "carrier"))
        order = tuple(int(o) for o in np.broadcast_to(np.asarray(self.order), (self.d,)))
        if any(o < 0 for o in order):
            raise ValueError("Hermite orders must be non-negative")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def position(self, *x):
        out = self.amplitude
        for xj, w, n, c, k in zip(x, self.width, self.order, self.center, self.carrier):
            u = (np.asarray(xj) - c) / w
            out = out * _hermite(n, u) * np.exp(-0.5 * u * u) * np.exp(1j * k * np.asarray(xj))
        return out

    def _fourier_axis(self, xi, j: int):
        w, n, c, k = self.width[j], self.order[j], self.center[j], self.carrier[j]
        q = np.asarray(xi) - k
        v = w * q
        return w * (-1j) ** n * _hermite(n, v) * np.exp(-0.5 * v * v) * np.exp(-1j * q * c)

    def _fourier_axis_deriv(self, xi, j: int):
        w, n, c, k = self.width[j], self.order[j], self.center[j], self.carrier[j]
        q = np.asarray(xi) - k
        v = w * q
        hn = _hermite(n, v)
        dhn = 2.0 * n * _hermite(n - 1, v) if n > 0 else 0.0
        core = w * (-1j) ** n * np.exp(-0.5 * v * v) * np.exp(-1j * q * c)
        return core * (w * (dhn - v * hn) - 1j * c * hn)

    def fourier(self, *xi):
        out = self.amplitude
        for j, xj in enumerate(xi):
            out = out * self._fourier_axis(xj, j)
        return out

    def fourier_derivative(self, axis: int, *xi):
        out = self.amplitude
        for j, xj in enumerate(xi):
            out = out * (self._fourier_axis_deriv(xj, j) if j == axis else self._fourier_axis(xj, j))
        return out

    def scaled(self, factor: complex) -> "HermiteGaussian":
        return HermiteGaussian(self.d, self.amplitude * factor, self.width, self.order, self.center, self.carrier)

    def dilated(self, a: float) -> "HermiteGaussian":
        """psi(x / a)."""
        return HermiteGaussian(
            self.d,
            self.amplitude,
            tuple(a * w for w in self.width),
            self.order,
            tuple(a * c for c in self.center),
            tuple(k / a for k in self.carrier),
        )

    @property
    def extent(self) -> float:
        """Radius beyond which |psi| is below ~1e-16 of its peak scale."""
        return max(abs(c) + w * (9.0 + math.sqrt(2.0 * n + 1.0)) for c, w, n in zip(self.center, self.width, self.order))

    @property
    def spectral_extent(self) -> float:
        return max(abs(k) + (9.0 + math.sqrt(2.0 * n + 1.0)) / w for k, w, n in zip(self.carrier, self.width, self.order))


def Gaussian(d: int, amplitude: complex = 1.0, width=1.0, center=0.0, carrier=0.0) -> HermiteGaussian:
    return HermiteGaussian(d, amplitude, width, 0, center, carrier)


@dataclass(frozen=True)
class FiniteSum:
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("FiniteSum needs at least one term")
        if len({t.d for t in terms}) != 1:
            raise ValueError("all terms must share the dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def d(self) -> int:
        return self.terms[0].d

    def position(self, *x):
        return sum(t.position(*x) for t in self.terms)

    def fourier(self, *xi):
        return sum(t.fourier(*xi) for t in self.terms)

    def fourier_derivative(self, axis: int, *xi):
        return sum(t.fourier_derivative(axis, *xi) for t in self.terms)

    def scaled(self, factor: complex) -> "FiniteSum":
        return FiniteSum(tuple(t.scaled(factor) for t in self.terms))

    def dilated(self, a: float) -> "FiniteSum":
        return FiniteSum(tuple(t.dilated(a) for t in self.terms))

    @property
    def extent(self) -> float:
        return max(t.extent for t in self.terms)

    @property
    def spectral_extent(self) -> float:
        return max(t.spectral_extent for t in self.terms)


AnalyticProfile = HermiteGaussian | FiniteSum


def _split_point(x, d: int):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != d:
        raise ValueError(f"point must have {d} components")
    return [x[..., j] for j in range(d)]


def eval_position(psi: AnalyticProfile, x) -> complex | np.ndarray:
    """psi at a point (or an array of points, last axis = coordinates)."""
    return psi.position(*_split_point(x, psi.d))


def eval_fourier(psi: AnalyticProfile, xi) -> complex | np.ndarray:
    return psi.fourier(*_split_point(xi, psi.d))


def sample(psi: AnalyticProfile, grid: Grid, time: float = 0.0) -> Field:
    _check_dim(psi, grid)
    return Field(grid, np.broadcast_to(psi.position(*grid.coords()), grid.shape), time)


def sample_fourier(psi: AnalyticProfile, grid: Grid, time: float = 0.0) -> SpectralField:
    _check_dim(psi, grid)
    return SpectralField(grid, np.broadcast_to(psi.fourier(*grid.wavenumbers()), grid.shape), time)


def _check_dim(psi, grid: Grid) -> None:
    if psi.d != grid.d:
        raise ValueError(f"profile is {psi.d}-dimensional, grid is {grid.d}-dimensional")


def sobolev_h0s_norm(psi: AnalyticProfile, s: float, points: int | None = None) -> float:
    """|| <x>^s psi ||_2 by tensor trapezoid quadrature of the closed form.

    The integrand is analytic and Gaussian-decaying, so the trapezoid rule
    on a box covering ``psi.extent`` converges geometrically.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    d = psi.d
    R = psi.extent
    terms = psi.terms if isinstance(psi, FiniteSum) else (psi,)
    wmin = min(min(t.width) for t in terms)
    kmax = max(max(abs(k) for k in t.carrier) for t in terms)
    if points is None:
        h = min(wmin / 6.0, math.pi / (4.0 * (kmax + 1.0)))
        points = int(math.ceil(2 * R / h))
        points = min(points, {1: 40000, 2: 1200, 3: 200}[d])
    ax = np.linspace(-R, R, points + 1)
    h = ax[1] - ax[0]
    mesh = [ax.reshape([-1 if j == i else 1 for j in range(d)]) for i in range(d)]
    r2 = sum(m * m for m in mesh)
    dens = np.abs(psi.position(*mesh)) ** 2 * (1.0 + r2) ** s
    return math.sqrt(float(np.sum(dens)) * h**d)


def scaled_to_h0s(psi: AnalyticProfile, target: float, s: float) -> AnalyticProfile:
    """Rescale the amplitude so that ||psi||_{H^{0,s}} equals ``target``."""
    return psi.scaled(target / sobolev_h0s_norm(psi, s))


def default_profile(d: int, s: float, target: float = 0.1, width: float | tuple = 1.0) -> HermiteGaussian:
    """Centered Gaussian with ||psi||_{H^{0,s}} = target (small-data regime)."""
    return scaled_to_h0s(Gaussian(d, 1.0, width), target, s)
