"""Periodic grids, continuum-calibrated DFTs and the norms built on them.

Fields are stored as complex arrays of shape ``grid.shape`` with axis 0
holding x1 (row-major, x1 slowest).  Spectral coefficients use the numpy
FFT ordering along every axis; ``Grid.freqs`` returns the matching
frequency vectors.  Coefficients are scaled so that they approximate the
unitary continuum transform

    psi_hat(xi) = (2 pi)^(-d/2) * integral exp(-i x.xi) psi(x) dx,

which makes Parseval hold with the cell volumes ``h^d`` (space) and
``(pi/L)^d`` (frequency).
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

TAIL_TOL = 1e-10


class UnresolvedWarning(RuntimeWarning):
    """Spectral mass in the top octave exceeds the resolution tolerance."""


def fft_workers() -> int:
    """Thread cap for the FFT backend, read from ``ANISO4NLS_THREADS``."""
    raw = os.environ.get("ANISO4NLS_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on prod_j [-L_j, L_j) with N_j points per axis."""

    half_length: tuple[float, ...]
    n_points: tuple[int, ...]

    def __post_init__(self):
        hl = tuple(float(v) for v in np.atleast_1d(self.half_length))
        n = tuple(int(v) for v in np.atleast_1d(self.n_points))
        if len(hl) != len(n):
            raise ValueError("half_length and n_points must have the same length")
        if not 1 <= len(n) <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {len(n)}")
        for L, N in zip(hl, n):
            if not L > 0 or not math.isfinite(L):
                raise ValueError(f"half_length must be positive and finite, got {L}")
            if N < 8 or N % 2:
                raise ValueError(f"n_points must be even and >= 8, got {N}")
        object.__setattr__(self, "half_length", hl)
        object.__setattr__(self, "n_points", n)

    @classmethod
    def uniform(cls, d: int, half_length: float, n_points: int) -> "Grid":
        return cls((half_length,) * d, (n_points,) * d)

    @property
    def d(self) -> int:
        return len(self.n_points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n_points

    @property
    def size(self) -> int:
        return int(np.prod(self.n_points))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * L / N for L, N in zip(self.half_length, self.n_points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def dual_cell_volume(self) -> float:
        return float(np.prod([math.pi / L for L in self.half_length]))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(-L + h * np.arange(N) for L, h, N in zip(self.half_length, self.spacing, self.n_points))

    @cached_property
    def freqs(self) -> tuple[np.ndarray, ...]:
        # 2 pi * fftfreq(N, h) == pi k / L
        return tuple(2.0 * math.pi * np.fft.fftfreq(N, h) for h, N in zip(self.spacing, self.n_points))

    @property
    def nyquist(self) -> tuple[float, ...]:
        return tuple(math.pi * N / (2.0 * L) for L, N in zip(self.half_length, self.n_points))

    def coords(self) -> tuple[np.ndarray, ...]:
        """Open (broadcastable) coordinate arrays, one per axis."""
        return _open_mesh(self.axes)

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Open (broadcastable) frequency arrays in FFT order."""
        return _open_mesh(self.freqs)

    def radius_sq(self) -> np.ndarray:
        return sum(c * c for c in self.coords())

    def xi_sq(self) -> np.ndarray:
        return sum(k * k for k in self.wavenumbers())

    @cached_property
    def _shift_sign(self) -> np.ndarray:
        # exp(-i xi_k x_0) with x_0 = -L equals (-1)^k for xi_k = pi k / L
        signs = [np.where(np.fft.fftfreq(N, 1.0 / N).astype(int) % 2 == 0, 1.0, -1.0) for N in self.n_points]
        out = np.ones(self.shape)
        for axis, s in enumerate(signs):
            shape = [1] * self.d
            shape[axis] = -1
            out = out * s.reshape(shape)
        return out

    @cached_property
    def _dft_scale(self) -> float:
        return float(np.prod([h / math.sqrt(2.0 * math.pi) for h in self.spacing]))


def _open_mesh(vectors) -> tuple[np.ndarray, ...]:
    d = len(vectors)
    out = []
    for axis, v in enumerate(vectors):
        shape = [1] * d
        shape[axis] = -1
        out.append(np.asarray(v).reshape(shape))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of u(t, x) on a grid."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {vals.size}")
        if not math.isfinite(self.time):
            raise ValueError("field time must be finite")
        object.__setattr__(self, "values", vals.reshape(self.grid.shape))
        object.__setattr__(self, "time", float(self.time))

    def with_values(self, values: np.ndarray, time: float | None = None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time)

    def __sub__(self, other: "Field") -> "Field":
        return self.with_values(self.values - other.values)

    def __add__(self, other: "Field") -> "Field":
        return self.with_values(self.values + other.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Continuum-calibrated Fourier coefficients (FFT ordering)."""

    grid: Grid
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} coefficients, got {c.size}")
        object.__setattr__(self, "coeffs", c.reshape(self.grid.shape))
        object.__setattr__(self, "time", float(self.time))


def dft(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Array-level forward transform used by the hot loops."""
    return scipy.fft.fftn(values, workers=fft_workers()) * (grid._dft_scale * grid._shift_sign)


def idft(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return scipy.fft.ifftn(coeffs * (grid._shift_sign / grid._dft_scale), workers=fft_workers())


def forward_dft(f: Field) -> SpectralField:
    return SpectralField(f.grid, dft(f.values, f.grid), f.time)


def inverse_dft(g: SpectralField) -> Field:
    return Field(g.grid, idft(g.coeffs, g.grid), g.time)


def spectral_l2(g: SpectralField) -> float:
    return math.sqrt(float(np.sum(np.abs(g.coeffs) ** 2)) * g.grid.dual_cell_volume)


def tail_fraction(coeffs: np.ndarray, grid: Grid) -> float:
    """Relative spectral mass with some |xi_j| above half its Nyquist value."""
    total = float(np.sum(np.abs(coeffs) ** 2))
    if total == 0.0:
        return 0.0
    mask = np.zeros(grid.shape, dtype=bool)
    for k, nyq in zip(grid.wavenumbers(), grid.nyquist):
        mask = mask | (np.abs(k) > 0.5 * nyq)
    return float(np.sum(np.abs(coeffs[mask]) ** 2)) / total


def check_resolved(coeffs: np.ndarray, grid: Grid, tail_tol: float = TAIL_TOL) -> bool:
    frac = tail_fraction(coeffs, grid)
    if frac > tail_tol:
        warnings.warn(
            f"spectral tail mass {frac:.3e} exceeds {tail_tol:.1e}; weighted norm unreliable",
            UnresolvedWarning,
            stacklevel=3,
        )
        return False
    return True


def _lp(values: np.ndarray, cell: float, p: float) -> float:
    a = np.abs(values)
    if p == math.inf:
        return float(a.max()) if a.size else 0.0
    if p == 2:
        return math.sqrt(float(np.sum(a * a)) * cell)
    return float(np.sum(a**p) * cell) ** (1.0 / p)


def lp_norm(f: Field, p: float) -> float:
    """Riemann-sum L^p norm; ``p = math.inf`` gives the max modulus."""
    if not (p >= 1):
        raise ValueError(f"L^p exponent must be >= 1, got {p}")
    return _lp(f.values, f.grid.cell_volume, p)


def x1_multiplier(grid: Grid, order: float) -> np.ndarray:
    xi1 = grid.wavenumbers()[0]
    return (1.0 + xi1 * xi1) ** (0.5 * order)


def weighted_x1_norm(f: Field, order: float, p: float, tail_tol: float = TAIL_TOL) -> float:
    """L^p norm of <d/dx1>^order f."""
    if order == 0:
        return lp_norm(f, p)
    coeffs = dft(f.values, f.grid)
    check_resolved(coeffs, f.grid, tail_tol)
    vals = idft(coeffs * x1_multiplier(f.grid, order), f.grid)
    return lp_norm(f.with_values(vals), p)


def weighted_position_norm(f: Field, m: float, s: float, tail_tol: float = TAIL_TOL) -> float:
    """|| <x>^s <grad>^m f ||_2, multiplier first, then the position weight."""
    vals = f.values
    if m != 0:
        coeffs = dft(vals, f.grid)
        check_resolved(coeffs, f.grid, tail_tol)
        vals = idft(coeffs * (1.0 + f.grid.xi_sq()) ** (0.5 * m), f.grid)
    if s != 0:
        vals = vals * (1.0 + f.grid.radius_sq()) ** (0.5 * s)
    return _lp(vals, f.grid.cell_volume, 2)
