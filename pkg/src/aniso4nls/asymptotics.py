"""Stationary-phase asymptotics of the canonical linear flow.

For the canonical symbol omega = |xi|^2/2 + xi1^4/4 the phase
x.xi - t omega(xi) is stationary at mu = (mu1, x_perp/t) where mu1 is the
unique real root of mu^3 + mu = x1/t.  The leading term is

    t^(-d/2) (3 mu1^2 + 1)^(-1/2) psi_hat(mu)
        * exp(3/4 i t mu1^4 + 1/2 i t |mu|^2 - i d pi / 4)

and the modified profile multiplies it by exp(i S(t, mu)) with the real
long-range phase S defined in :func:`phase_correction`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dispersion import Form, ModelParams, free_solution
from .grid import Field, Grid, SpectralField, UnresolvedWarning, idft, weighted_position_norm, weighted_x1_norm
from .profiles import AnalyticProfile, sample_fourier


class CriticalExponentError(ValueError):
    """p = 1 + 2/d makes the phase-correction prefactor singular."""


@dataclass(frozen=True)
class StationaryPoint:
    mu1: np.ndarray | float
    mu_perp: tuple
    residual: np.ndarray | float


def cardano_terms(ratio):
    """The two cube-rooted Cardano terms for mu^3 + mu = ratio (signed real roots)."""
    ratio = np.asarray(ratio, dtype=float)
    disc = np.sqrt(0.25 * ratio * ratio + 1.0 / 27.0)
    return np.cbrt(0.5 * ratio + disc), np.cbrt(0.5 * ratio - disc)


def solve_depressed_cubic(ratio, newton_steps: int = 2):
    """Real root of mu^3 + mu = ratio: Cardano plus Newton polish.

    The larger Cardano term is evaluated from |ratio|, and the smaller one
    from the product identity (term_a * term_b = -1/3) to avoid cancellation.
    """
    ratio = np.asarray(ratio, dtype=float)
    a = np.abs(ratio)
    big = np.cbrt(0.5 * a + np.sqrt(0.25 * a * a + 1.0 / 27.0))
    mu = np.copysign(big - 1.0 / (3.0 * big), ratio)
    for _ in range(newton_steps):
        mu = mu - (mu * mu * mu + mu - ratio) / (3.0 * mu * mu + 1.0)
    return mu


def stationary_point(t: float, x) -> StationaryPoint:
    """mu(t, x); ``x`` is a point or a tuple of broadcastable coordinate arrays."""
    if not t > 0:
        raise ValueError(f"stationary point needs t > 0, got {t}")
    if isinstance(x, tuple):
        comps = x
    else:
        arr = np.asarray(x, dtype=float)
        comps = tuple(arr[..., j] for j in range(arr.shape[-1])) if arr.ndim else (arr,)
    ratio = np.asarray(comps[0], dtype=float) / t
    mu1 = solve_depressed_cubic(ratio)
    residual = np.abs(mu1**3 + mu1 - ratio)
    mu_perp = tuple(np.asarray(c, dtype=float) / t for c in comps[1:])
    if mu1.ndim == 0:
        mu1, residual = float(mu1), float(residual)
    return StationaryPoint(mu1, mu_perp, residual)


def _check_canonical(m: ModelParams | None) -> None:
    if m is not None and m.form is not Form.CANONICAL:
        raise ValueError("stationary-phase formulas are implemented for the canonical symbol only")


def decay_power(m: ModelParams, d: int) -> float:
    """(p - 1) d / 2, the time decay power of |u|^(p-1)."""
    return 0.5 * (m.p - 1.0) * d


def phase_correction(t, xi, m: ModelParams, psi: AnalyticProfile):
    """S(t, xi) = -lam / (1 - k) |psi_hat|^(p-1) / (3 xi1^2 + 1)^((p-1)/2) t^(1-k), k = (p-1)d/2.

    ``xi`` is a point or a tuple of broadcastable frequency arrays.
    """
    comps = xi if isinstance(xi, tuple) else tuple(np.asarray(xi, dtype=float).reshape(-1))
    d = len(comps)
    k = decay_power(m, d)
    if math.isclose(k, 1.0, rel_tol=0, abs_tol=1e-14):
        raise CriticalExponentError(f"p = 1 + 2/d = {m.p} is the critical exponent for d = {d}")
    if m.lam == 0:
        return np.zeros(np.broadcast(*comps).shape) if isinstance(xi, tuple) else 0.0
    amp = np.abs(psi.fourier(*comps)) ** (m.p - 1.0)
    xi1 = np.asarray(comps[0])
    val = -m.lam / (1.0 - k) * amp / (3.0 * xi1 * xi1 + 1.0) ** (0.5 * (m.p - 1.0)) * np.power(t, 1.0 - k)
    return val if isinstance(xi, tuple) else float(val)


def leading_term(
    t: float,
    g: Grid,
    psi: AnalyticProfile,
    with_correction: bool = False,
    m: ModelParams | None = None,
) -> Field:
    """Closed-form leading term of W(t) psi (or the modified profile) on the grid."""
    if t < 2:
        raise ValueError(f"leading term is evaluated for t >= 2, got {t}")
    _check_canonical(m)
    if with_correction and m is None:
        raise ValueError("the phase correction needs model parameters")
    vals = leading_term_values(t, g.coords(), psi, with_correction, m)
    return Field(g, np.broadcast_to(vals, g.shape), t)


def leading_term_values(t: float, x: tuple, psi: AnalyticProfile, with_correction: bool = False,
                        m: ModelParams | None = None) -> np.ndarray:
    """The leading term at arbitrary points ``x`` (tuple of broadcastable arrays)."""
    d = len(x)
    sp = stationary_point(t, x)
    mu1 = np.asarray(sp.mu1)
    mu = (mu1,) + sp.mu_perp
    mu_sq = sum(np.asarray(c) ** 2 for c in mu)
    phase = 0.75 * t * mu1**4 + 0.5 * t * mu_sq - 0.25 * d * math.pi
    if with_correction:
        phase = phase + phase_correction(t, mu, m, psi)
    return t ** (-0.5 * d) / np.sqrt(3.0 * mu1 * mu1 + 1.0) * psi.fourier(*mu) * np.exp(1j * phase)


@dataclass
class NormSeries:
    times: np.ndarray
    values: np.ndarray
    resolved: np.ndarray

    def pairs(self):
        return list(zip(self.times.tolist(), self.values.tolist()))


def remainder_field(t: float, g: Grid, psi: AnalyticProfile, m: ModelParams | None = None) -> Field:
    m = m or ModelParams.canonical()
    _check_canonical(m)
    return free_solution(psi, t, g, m) - leading_term(t, g, psi, False, m)


def remainder_norms(t_list, g: Grid, psi: AnalyticProfile, r: float, m: ModelParams | None = None) -> NormSeries:
    """|| <d/dx1>^(1 - 2/r) R(t) ||_{L^r} with R = W(t) psi - leading term."""
    if r < 2:
        raise ValueError("Lebesgue exponent r must be >= 2")
    order = 1.0 - 2.0 / r if math.isfinite(r) else 1.0
    times = np.asarray(sorted(float(t) for t in t_list))
    vals, ok = [], []
    for t in times:
        R = remainder_field(t, g, psi, m)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", UnresolvedWarning)
            vals.append(weighted_x1_norm(R, order, r))
        ok.append(not any(issubclass(w.category, UnresolvedWarning) for w in caught))
    return NormSeries(times, np.asarray(vals), np.asarray(ok))


def modified_spectral_data(t: float, g: Grid, psi: AnalyticProfile, m: ModelParams) -> SpectralField:
    """w(t, xi) = psi_hat(xi) exp(i S(t, xi)) on the frequency lattice."""
    if t < 1:
        raise ValueError("modified data is defined for t >= 1")
    base = sample_fourier(psi, g).coeffs
    if m.lam == 0:
        return SpectralField(g, base, t)
    S = np.broadcast_to(phase_correction(t, g.wavenumbers(), m, psi), g.shape)
    return SpectralField(g, base * np.exp(1j * S), t)


def profile_sobolev_track(t_list, s: float, psi: AnalyticProfile, m: ModelParams, g: Grid) -> NormSeries:
    """|| psi_hat exp(i S(t)) ||_{H^s} in the frequency variable, per time.

    Computed as || <x>^s F^{-1} w(t) ||_2 (Plancherel with roles swapped).
    """
    d = g.d
    if s != 0:
        if d not in (2, 3):
            raise ValueError("the uniform H^s bound is stated for d = 2, 3")
        if not (1 < s < m.p < 3):
            raise ValueError(f"need 1 < s < p < 3 (s={s}, p={m.p}); outside the bounded-profile ranges")
    times = np.asarray(sorted(float(t) for t in t_list))
    vals = []
    for t in times:
        w = modified_spectral_data(t, g, psi, m)
        vals.append(weighted_position_norm(Field(g, idft(w.coeffs, g)), 0.0, s))
    return NormSeries(times, np.asarray(vals), np.ones(len(times), dtype=bool))
