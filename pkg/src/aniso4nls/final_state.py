"""Final-state problem: build the solution that scatters to a prescribed profile.

Two constructions of the same object are provided.  Both start from the
terminal datum z(T_max) = W(T_max) F^{-1} w(T_max), where w is the
modified spectral data, and solve

    u(t) = W(t - T_max) z(T_max) + i lam int_t^{T_max} W(t - tau) |u|^(p-1) u (tau) dtau

on [T_start, T_max]: once by Picard iteration with trapezoidal quadrature
in tau (in the interaction picture g = exp(i t omega) u_hat), and once by
integrating the equation backward with the split-step solver.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import NormSeries, decay_power, leading_term, modified_spectral_data
from .dispersion import ModelParams, free_spectral, symbol_on_grid
from .grid import TAIL_TOL, Field, Grid, check_resolved, dft, idft, tail_fraction
from .metrics import DecayFit, fit_power_law, points_per_decade
from .profiles import AnalyticProfile, sample_fourier, sobolev_h0s_norm
from .solver import Scheme, Stepper, TailGuardError, nonlinear_term


class NonContractionError(RuntimeError):
    """Successive Picard distances stopped shrinking."""

    def __init__(self, message: str, distances: list, data_size: float):
        super().__init__(message)
        self.distances = distances
        self.data_size = data_size


class ShortSeriesWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DecayPrediction:
    gamma: float
    branch: str
    d: int
    p: float


def decay_prediction(d: int, p: float) -> DecayPrediction:
    """gamma = min{1/(p-1) - d/4, d(p-1)/2 - 1, 3/8} with the active branch named."""
    terms = {
        "1/(p-1)-d/4": 1.0 / (p - 1.0) - d / 4.0,
        "d(p-1)/2-1": d * (p - 1.0) / 2.0 - 1.0,
        "3/8": 3.0 / 8.0,
    }
    branch = min(terms, key=terms.get)
    return DecayPrediction(terms[branch], branch, d, p)


def in_theorem_range(d: int, p: float) -> bool:
    if d == 2:
        return 2.0 < p < 3.0
    if d == 3:
        return 9.0 / 5.0 < p < 7.0 / 3.0
    return False


def default_alpha(d: int, p: float) -> float:
    """Midpoint of (1/(p-1) - d/4, 1/2)."""
    lo = 1.0 / (p - 1.0) - d / 4.0
    if not lo < 0.5:
        raise ValueError(f"empty weight interval for d={d}, p={p}")
    return 0.5 * (max(lo, 0.0) + 0.5)


def geometric_times(t_start: float, t_max: float, per_unit_log: float = 100.0) -> np.ndarray:
    """Decreasing nodes from t_max to t_start, evenly spaced in log t."""
    n = max(2, int(math.ceil(per_unit_log * math.log(t_max / t_start)))) + 1
    return np.geomspace(t_max, t_start, n)


@dataclass(frozen=True)
class FinalStateConfig:
    T_max: float
    t_grid: tuple
    alpha_weight: float
    max_iter: int = 12
    contraction_tol: float = 1e-10
    min_iter: int = 4

    def __post_init__(self):
        ts = np.asarray(self.t_grid, dtype=float)
        if ts.ndim != 1 or len(ts) < 2:
            raise ValueError("t_grid needs at least two times")
        if np.any(np.diff(ts) >= 0):
            raise ValueError("t_grid must be strictly decreasing")
        if not math.isclose(ts[0], self.T_max, rel_tol=1e-12):
            raise ValueError("t_grid must start at T_max")
        if ts[-1] < 3:
            raise ValueError(f"T_start = {ts[-1]} < 3")
        if not 0 < self.alpha_weight < 0.5:
            raise ValueError("alpha_weight must lie in (0, 1/2)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    @property
    def T_start(self) -> float:
        return float(self.t_grid[-1])

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.t_grid, dtype=float)

    @classmethod
    def standard(cls, t_start: float, t_max: float, d: int, p: float, per_unit_log: float = 100.0, **kw):
        return cls(t_max, tuple(geometric_times(t_start, t_max, per_unit_log)), default_alpha(d, p), **kw)

    def with_horizon(self, t_max: float, per_unit_log: float | None = None) -> "FinalStateConfig":
        """Same T_start and log-density, new truncation horizon."""
        ts = self.times
        if per_unit_log is None:
            per_unit_log = (len(ts) - 1) / math.log(ts[0] / ts[-1])
        return FinalStateConfig(t_max, tuple(geometric_times(self.T_start, t_max, per_unit_log)),
                                self.alpha_weight, self.max_iter, self.contraction_tol, self.min_iter)


def profile_field(t: float, g: Grid, psi: AnalyticProfile, m: ModelParams, synthesis: str = "stationary") -> Field:
    """Modified profile at time t.

    ``synthesis="stationary"`` gives the closed-form u_+ (leading term with
    the phase correction); ``"spectral"`` gives W(t) F^{-1} w(t).
    """
    if t < 3:
        raise ValueError(f"profile is evaluated for t >= 3, got {t}")
    if synthesis == "stationary":
        return leading_term(t, g, psi, with_correction=True, m=m)
    if synthesis == "spectral":
        w = modified_spectral_data(t, g, psi, m).coeffs
        check_resolved(w, g)
        return Field(g, idft(w * np.exp(-1j * t * symbol_on_grid(g, m)), g), t)
    raise ValueError(f"unknown synthesis {synthesis!r}")


def terminal_datum(cfg: FinalStateConfig, g: Grid, psi: AnalyticProfile, m: ModelParams) -> Field:
    return profile_field(cfg.T_max, g, psi, m, "spectral")


def truncation_estimate(cfg: FinalStateConfig, psi: AnalyticProfile, m: ModelParams, d: int) -> float:
    """A priori size of the dropped tail int_{T_max}^inf.

    Uses ||N(u)(t)||_2 <= |lam| ||psi_hat||_inf^(p-1) t^(-k) ||psi||_2 with
    k = (p-1) d / 2 > 1, integrated from T_max to infinity.
    """
    k = decay_power(m, d)
    if m.lam == 0:
        return 0.0
    if k <= 1:
        return math.inf
    ext = psi.spectral_extent
    xs = np.linspace(-ext, ext, 401)
    mesh = np.meshgrid(*([xs] * d), indexing="ij", sparse=True)
    sup_hat = float(np.max(np.abs(psi.fourier(*mesh))))
    l2 = sobolev_h0s_norm(psi, 0.0)
    return abs(m.lam) * sup_hat ** (m.p - 1.0) * l2 * cfg.T_max ** (1.0 - k) / (k - 1.0)


@dataclass
class FinalStateSolution:
    """Solution values on the (decreasing) time nodes, stored as interaction-picture spectra."""

    grid: Grid
    times: np.ndarray
    interaction: np.ndarray
    model: ModelParams
    distances: list = field(default_factory=list)
    converged: bool = True

    def field_at(self, index: int) -> Field:
        t = float(self.times[index])
        coeffs = self.interaction[index] * np.exp(-1j * t * symbol_on_grid(self.grid, self.model))
        return Field(self.grid, idft(coeffs, self.grid), t)

    def spectrum_at(self, index: int) -> np.ndarray:
        t = float(self.times[index])
        return self.interaction[index] * np.exp(-1j * t * symbol_on_grid(self.grid, self.model))

    @property
    def start(self) -> Field:
        return self.field_at(len(self.times) - 1)

    @property
    def ratios(self) -> list:
        dd = self.distances
        return [dd[i + 1] / dd[i] if dd[i] > 0 else 0.0 for i in range(len(dd) - 1)]


def _nonlinear_interaction(gvec: np.ndarray, t: float, omega: np.ndarray, g: Grid, m: ModelParams) -> np.ndarray:
    """exp(i t omega) F[N(u)] for u_hat = exp(-i t omega) gvec."""
    phase = np.exp(-1j * t * omega)
    u = idft(gvec * phase, g)
    return dft(nonlinear_term(u, m), g) * np.conj(phase)


def picard_iterate(
    cfg: FinalStateConfig,
    g: Grid,
    psi: AnalyticProfile,
    m: ModelParams,
    raise_on_growth: bool = True,
) -> FinalStateSolution:
    """Picard iteration of the truncated integral equation on cfg.t_grid.

    The zeroth iterate is W(t) F^{-1} w(t).  Each sweep walks the nodes from
    T_max down, accumulating the trapezoidal Duhamel integral, and records
    Delta_n = max_t t^alpha ||u^(n+1)(t) - u^(n)(t)||_2.
    """
    ts = cfg.times
    omega = symbol_on_grid(g, m)
    cell = g.dual_cell_volume
    it = np.empty((len(ts),) + g.shape, dtype=complex)
    for j, t in enumerate(ts):
        it[j] = modified_spectral_data(t, g, psi, m).coeffs
    check_resolved(it[0] * np.exp(-1j * ts[0] * omega), g)
    weight = ts ** cfg.alpha_weight
    distances: list[float] = []
    base = it[0].copy()
    converged = m.lam == 0
    if m.lam == 0:
        distances.append(0.0)
    for n in range(cfg.max_iter if m.lam != 0 else 0):
        acc = base.copy()
        prev_term = _nonlinear_interaction(it[0], ts[0], omega, g, m)
        dist = 0.0
        # node 0 is the terminal datum and never changes
        for j in range(1, len(ts)):
            h = ts[j - 1] - ts[j]
            term = _nonlinear_interaction(it[j], ts[j], omega, g, m)
            acc = acc + (0.5j * m.lam * h) * (term + prev_term)
            diff = math.sqrt(float(np.sum(np.abs(acc - it[j]) ** 2)) * cell)
            # overflow gives nan, which max() would silently skip
            dist = max(dist, weight[j] * diff) if math.isfinite(diff) else math.inf
            it[j] = acc
            prev_term = term
        distances.append(dist)
        if len(distances) >= 2 and distances[-1] >= distances[-2] and distances[-2] > 0:
            if raise_on_growth and distances[-2] > 1e3 * np.finfo(float).eps:
                size = math.sqrt(float(np.sum(np.abs(base) ** 2)) * cell)
                raise NonContractionError(
                    f"Picard distance grew from {distances[-2]:.3e} to {distances[-1]:.3e} "
                    f"(||w||_2 = {size:.3e}, T_start = {cfg.T_start}); shrink the data or raise T_start",
                    distances,
                    size,
                )
        if not math.isfinite(dist):
            break
        if dist < cfg.contraction_tol and n + 1 >= cfg.min_iter:
            converged = True
            break
    return FinalStateSolution(g, ts, it, m, distances, converged)


def backward_construct(
    cfg: FinalStateConfig,
    g: Grid,
    psi: AnalyticProfile,
    m: ModelParams,
    max_dt: float = 0.05,
    tail_guard: bool = True,
    tail_tol: float = TAIL_TOL,
) -> FinalStateSolution:
    """Integrate backward from the terminal datum with Strang splitting.

    Each interval between consecutive nodes is split into uniform steps of
    size <= max_dt, so every node is hit exactly.
    """
    ts = cfg.times
    omega = symbol_on_grid(g, m)
    coeffs = dft(terminal_datum(cfg, g, psi, m).values, g)
    out = np.empty((len(ts),) + g.shape, dtype=complex)
    out[0] = coeffs * np.exp(1j * ts[0] * omega)
    cache: dict = {}
    for j in range(1, len(ts)):
        span = ts[j] - ts[j - 1]
        n = max(1, int(math.ceil(abs(span) / max_dt - 1e-12)))
        dt = span / n
        key = round(dt, 14)
        st = cache.get(key)
        if st is None:
            st = Stepper(g, dt, m, Scheme.STRANG)
            if len(cache) < 8:
                cache[key] = st
        for _ in range(n):
            coeffs = st.step_spectral(coeffs)
        if tail_guard:
            frac = tail_fraction(coeffs, g)
            if frac > tail_tol:
                raise TailGuardError(f"tail mass {frac:.3e} > {tail_tol:.1e} at t = {ts[j]:.6g}", ts[j], frac)
        out[j] = coeffs * np.exp(1j * ts[j] * omega)
    return FinalStateSolution(g, ts, out, m)


def solution_distance(a: FinalStateSolution, b: FinalStateSolution, alpha: float = 0.0) -> float:
    """max over common nodes of t^alpha ||a(t) - b(t)||_2."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=1e-13):
        raise ValueError("solutions live on different time nodes")
    cell = a.grid.dual_cell_volume
    diffs = np.sqrt(np.sum(np.abs(a.interaction - b.interaction) ** 2, axis=tuple(range(1, a.interaction.ndim))) * cell)
    return float(np.max(a.times**alpha * diffs))


@dataclass
class DefectResult:
    series: NormSeries
    fit: DecayFit | None
    prediction: DecayPrediction
    per_decade: float


def scattering_defect(
    sol: FinalStateSolution,
    psi: AnalyticProfile,
    m: ModelParams,
    window: tuple[float, float] | None = None,
) -> DefectResult:
    """delta(t) = ||u(t) - W(t) psi||_2 on the nodes, with a power-law fit over ``window``.

    The default window is [T_start, T_max / 2].
    """
    g = sol.grid
    base = sample_fourier(psi, g).coeffs
    cell = g.dual_cell_volume
    order = np.argsort(sol.times)
    times = sol.times[order]
    # interaction picture of W(t) psi is psi_hat itself
    vals = np.array([math.sqrt(float(np.sum(np.abs(sol.interaction[i] - base) ** 2)) * cell) for i in order])
    series = NormSeries(times, vals, np.ones(len(times), dtype=bool))
    lo, hi = window if window is not None else (times[0], times[-1] / 2.0)
    sel = (times >= lo * (1 - 1e-12)) & (times <= hi * (1 + 1e-12))
    ppd = points_per_decade(times[sel]) if sel.sum() >= 2 else 0.0
    if ppd < 6:
        warnings.warn(f"defect series has {ppd:.1f} points per decade (< 6); fit may be unstable",
                      ShortSeriesWarning, stacklevel=2)
    fit = None
    if sel.sum() >= 4 and np.all(vals[sel] > 0):
        fit = fit_power_law(zip(times[sel], vals[sel]))
    return DefectResult(series, fit, decay_prediction(g.d, m.p), ppd)


def free_profile_at(t: float, g: Grid, psi: AnalyticProfile, m: ModelParams) -> np.ndarray:
    return free_spectral(psi, t, g, m).coeffs
