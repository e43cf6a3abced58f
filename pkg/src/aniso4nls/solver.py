"""Split-step pseudospectral integrator for i u_t + L u = lam |u|^(p-1) u.

Both sub-flows are solved exactly: the linear one by the Fourier
multiplier exp(-i dt omega), the nonlinear one by the pointwise rotation
u -> exp(-i lam |u|^(p-1) dt) u (|u| is invariant under it).  Strang
composition is second order and symmetric, hence reversible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import ModelParams, propagator
from .grid import TAIL_TOL, Field, Grid, dft, idft, tail_fraction


class Scheme(enum.Enum):
    STRANG = "strang"
    LIE = "lie"


class TailGuardError(RuntimeError):
    """Spectral tail mass exceeded the tolerance during a solve."""

    def __init__(self, message: str, time: float, fraction: float):
        super().__init__(message)
        self.time = time
        self.fraction = fraction


def nonlinear_power(a: np.ndarray, q: float) -> np.ndarray:
    """a^q for a >= 0 with 0 -> 0, via exp(q log a) for non-integer q."""
    if q == 0:
        return np.ones_like(a)
    if float(q).is_integer():
        return a ** int(q)
    out = np.zeros_like(a)
    nz = a > 0
    out[nz] = np.exp(q * np.log(a[nz]))
    return out


def nonlinear_term(u: np.ndarray, m: ModelParams) -> np.ndarray:
    """lam |u|^(p-1) u."""
    return m.lam * nonlinear_power(np.abs(u), m.p - 1.0) * u


def _rotate(u: np.ndarray, dt: float, m: ModelParams) -> np.ndarray:
    if m.lam == 0:
        return u
    return u * np.exp(-1j * (m.lam * dt) * nonlinear_power(np.abs(u), m.p - 1.0))


def nonlinear_phase_step(f: Field, dt: float, m: ModelParams) -> Field:
    return f.with_values(_rotate(f.values, dt, m))


class Stepper:
    """Caches the half- and full-step multipliers for a fixed (grid, dt, model)."""

    def __init__(self, grid: Grid, dt: float, m: ModelParams, scheme: Scheme = Scheme.STRANG):
        self.grid, self.dt, self.m, self.scheme = grid, dt, m, scheme
        self.full = propagator(grid, m, dt)
        self.half = propagator(grid, m, 0.5 * dt) if scheme is Scheme.STRANG else None

    def step_spectral(self, coeffs: np.ndarray) -> np.ndarray:
        """One step acting on spectral coefficients (saves a transform pair per step)."""
        g, m = self.grid, self.m
        if m.lam == 0:
            return coeffs * self.full
        if self.scheme is Scheme.STRANG:
            u = idft(coeffs * self.half, g)
            return dft(_rotate(u, self.dt, m), g) * self.half
        u = idft(coeffs * self.full, g)
        return dft(_rotate(u, self.dt, m), g)


def step_strang(f: Field, dt: float, m: ModelParams) -> Field:
    """W(dt/2) N(dt) W(dt/2) f."""
    st = Stepper(f.grid, dt, m, Scheme.STRANG)
    return Field(f.grid, idft(st.step_spectral(dft(f.values, f.grid)), f.grid), f.time + dt)


def step_lie(f: Field, dt: float, m: ModelParams) -> Field:
    """N(dt) W(dt) f."""
    st = Stepper(f.grid, dt, m, Scheme.LIE)
    return Field(f.grid, idft(st.step_spectral(dft(f.values, f.grid)), f.grid), f.time + dt)


@dataclass(frozen=True)
class SolveConfig:
    dt: float
    steps: int
    scheme: Scheme = Scheme.STRANG
    tail_guard: bool = False
    snapshot_times: tuple = ()
    tail_tol: float = TAIL_TOL
    guard_every: int = 1

    def __post_init__(self):
        if self.dt == 0 or not math.isfinite(self.dt):
            raise ValueError("dt must be a finite non-zero number")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    @classmethod
    def spanning(cls, t0: float, t1: float, max_dt: float, **kw) -> "SolveConfig":
        """Uniform steps of size <= max_dt from t0 to t1 (either direction)."""
        n = max(1, int(math.ceil(abs(t1 - t0) / max_dt - 1e-12)))
        return cls(dt=(t1 - t0) / n, steps=n, **kw)


@dataclass
class Trajectory:
    snapshots: list = field(default_factory=list)
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mass: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tail: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    def at(self, t: float) -> Field:
        for s in self.snapshots:
            if math.isclose(s.time, t, rel_tol=1e-12, abs_tol=1e-12):
                return s
        raise KeyError(f"no snapshot at t = {t}")


def solve(f0: Field, t1: float, cfg: SolveConfig, m: ModelParams) -> Trajectory:
    """Integrate from f0.time to t1; snapshots at ``cfg.snapshot_times`` and at t1.

    Snapshot times must fall on step boundaries (within 1e-9 of a multiple of dt).
    """
    if not math.isclose(f0.time + cfg.steps * cfg.dt, t1, rel_tol=1e-12, abs_tol=1e-9):
        raise ValueError(f"steps * dt = {cfg.steps * cfg.dt} does not reach t1 - t0 = {t1 - f0.time}")
    g = f0.grid
    st = Stepper(g, cfg.dt, m, cfg.scheme)
    want = {}
    for ts in cfg.snapshot_times:
        k = round((ts - f0.time) / cfg.dt)
        if not (0 <= k <= cfg.steps) or abs(f0.time + k * cfg.dt - ts) > 1e-9 * max(1.0, abs(ts)):
            raise ValueError(f"snapshot time {ts} is not on the step lattice")
        want[k] = ts
    traj = Trajectory()
    cell = g.dual_cell_volume
    coeffs = dft(f0.values, g)
    times, mass, tails = [f0.time], [math.sqrt(float(np.sum(np.abs(coeffs) ** 2)) * cell)], []
    if 0 in want:
        traj.snapshots.append(f0.with_values(f0.values.copy(), want[0]))
    for k in range(1, cfg.steps + 1):
        coeffs = st.step_spectral(coeffs)
        t = f0.time + k * cfg.dt
        times.append(t)
        mass.append(math.sqrt(float(np.sum(np.abs(coeffs) ** 2)) * cell))
        if cfg.tail_guard and (k % cfg.guard_every == 0 or k == cfg.steps):
            frac = tail_fraction(coeffs, g)
            tails.append(frac)
            if frac > cfg.tail_tol:
                raise TailGuardError(
                    f"tail mass {frac:.3e} > {cfg.tail_tol:.1e} at t = {t:.6g}; refine the grid", t, frac
                )
        if k in want or k == cfg.steps:
            ts = want.get(k, t1 if k == cfg.steps else t)
            traj.snapshots.append(Field(g, idft(coeffs, g), ts))
    traj.times = np.asarray(times)
    traj.mass = np.asarray(mass)
    traj.tail = np.asarray(tails)
    return traj
