"""Power-law fits of norm time series and Strichartz-type quotients."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .dispersion import ModelParams, propagator
from .grid import Grid, _lp, check_resolved, idft, x1_multiplier
from .profiles import AnalyticProfile, sample_fourier


class UnreliableFitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int

    @property
    def reliable(self) -> bool:
        return self.r_squared >= 0.95

    def predict(self, t):
        return np.exp(self.intercept) * np.asarray(t, dtype=float) ** self.exponent


def fit_power_law(series) -> DecayFit:
    """Least-squares line through (log t, log v); the slope is the exponent."""
    data = np.asarray(list(series), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or len(data) < 4:
        raise ValueError("need at least 4 (t, value) pairs")
    t, v = data[:, 0], data[:, 1]
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    if np.any(t <= 0) or np.any(v <= 0):
        raise ValueError("power-law fits need strictly positive times and values")
    x, y = np.log(t), np.log(v)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - float(np.sum(resid**2)) / ss_tot))
    fit = DecayFit(float(slope), float(icpt), r2, (float(t[0]), float(t[-1])), len(t))
    if not fit.reliable:
        warnings.warn(f"power-law fit has r^2 = {r2:.3f} < 0.95", UnreliableFitWarning, stacklevel=2)
    return fit


def points_per_decade(times) -> float:
    t = np.asarray(times, dtype=float)
    span = math.log10(t[-1] / t[0])
    return math.inf if span == 0 else len(t) / span


@dataclass(frozen=True)
class AdmissiblePair:
    """Exponents (q, r) with 2/q + d/r = d/2 in the Strichartz range."""

    q: float
    r: float
    d: int

    def __post_init__(self):
        q, r, d = self.q, self.r, self.d
        if q < 2 or r < 2:
            raise ValueError("admissible pairs need q, r >= 2")
        lhs = 2.0 / q + d / r
        if not math.isclose(lhs, d / 2.0, rel_tol=0, abs_tol=1e-12):
            raise ValueError(f"2/q + d/r = {lhs} != d/2 = {d / 2}")
        if d >= 3 and r > 2.0 * d / (d - 2) + 1e-12:
            raise ValueError(f"r must not exceed 2d/(d-2) = {2 * d / (d - 2)}")
        if d == 2 and (q, r) == (2, math.inf):
            raise ValueError("(q, r, d) = (2, inf, 2) is excluded")

    @property
    def smoothing(self) -> float:
        """Order 2/(q d) of the x1 smoothing multiplier."""
        return 0.0 if math.isinf(self.q) else 2.0 / (self.q * self.d)


def strichartz_series(pair: AdmissiblePair, times, psi: AnalyticProfile, g: Grid, m: ModelParams):
    """(||psi||_2, array of || <d/dx1>^(2/(qd)) W(t) psi ||_{L^r} at ``times``)."""
    if pair.d != g.d:
        raise ValueError("pair dimension does not match the grid")
    base = sample_fourier(psi, g).coeffs
    norm0 = math.sqrt(float(np.sum(np.abs(base) ** 2)) * g.dual_cell_volume)
    if norm0 == 0:
        raise ValueError("quotient undefined for psi = 0")
    weighted = base * x1_multiplier(g, pair.smoothing) if pair.smoothing else base
    times = np.asarray(times, dtype=float)
    vals = np.empty(len(times))
    for i, t in enumerate(times):
        coeffs = weighted * propagator(g, m, t)
        if i in (0, len(times) - 1):
            check_resolved(coeffs, g)
        vals[i] = _lp(idft(coeffs, g), g.cell_volume, pair.r)
    return norm0, vals


def strichartz_quotient(
    pair: AdmissiblePair,
    window: tuple[float, float],
    psi: AnalyticProfile,
    g: Grid,
    m: ModelParams,
    samples: int = 64,
) -> float:
    """|| <d/dx1>^(2/(qd)) W(t) psi ||_{L^q(window; L^r)} / || psi ||_2.

    The time integral uses the trapezoid rule on ``samples`` (>= 64) points;
    q = inf takes the max over the same samples.
    """
    if samples < 64:
        raise ValueError("use at least 64 time samples")
    t0, t1 = window
    if not t1 > t0:
        raise ValueError("window must be increasing")
    times = np.linspace(t0, t1, samples)
    norm0, vals = strichartz_series(pair, times, psi, g, m)
    if math.isinf(pair.q):
        total = float(vals.max())
    else:
        total = float(trapezoid(vals**pair.q, times)) ** (1.0 / pair.q)
    return total / norm0
