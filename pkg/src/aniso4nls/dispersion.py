"""Linear flow of the anisotropic fourth-order Schrodinger operator.

Sign convention (used by every module):

    u_hat(t, xi) = exp(-i t omega(xi)) u_hat(0, xi)

with

    general       omega = a1 xi1^2 + a_perp |xi_perp|^2 - beta xi1^3 - gamma xi1^4
    canonical     omega = |xi|^2 / 2 + xi1^4 / 4
    non-elliptic  omega = |xi_perp|^2 / 2 - xi1^2 / 2 - sign xi1^4 / 4

where ``sign`` is the sign in front of the quartic term of the equation
(i u_t + 1/2 Lap_perp u - 1/2 u_11 + sign/4 u_1111 = lambda |u|^(p-1) u).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, SpectralField, dft, idft
from .profiles import AnalyticProfile, sample_fourier


class Form(enum.Enum):
    GENERAL = "general"
    CANONICAL = "canonical"
    NON_ELLIPTIC = "non_elliptic"


class Reducibility(enum.Enum):
    ELLIPTIC = "elliptic-reducible"
    NON_ELLIPTIC = "non-elliptic-reducible"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of i u_t + a Lap u + i b u_111 + g u_1111 = lam |u|^(p-1) u.

    ``alpha_perp`` overrides the coefficient of the transverse Laplacian,
    which is needed to represent the reduced (beta = 0) equation.
    """

    alpha: float = 0.5
    beta: float = 0.0
    gamma: float = -0.25
    lam: float = 1.0
    p: float = 3.0
    form: Form = Form.CANONICAL
    sign: int = 1
    alpha_perp: float | None = None

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"nonlinearity power must exceed 1, got {self.p}")
        if self.form is Form.CANONICAL and (self.alpha, self.beta, self.gamma) != (0.5, 0.0, -0.25):
            raise ValueError("canonical form fixes (alpha, beta, gamma) = (1/2, 0, -1/4)")
        if self.form is Form.CANONICAL and self.alpha_perp not in (None, 0.5):
            raise ValueError("canonical form is isotropic in the quadratic part")
        if self.form is Form.NON_ELLIPTIC and self.sign not in (1, -1):
            raise ValueError("non-elliptic sign must be +1 or -1")

    @classmethod
    def canonical(cls, lam: float = 1.0, p: float = 3.0) -> "ModelParams":
        return cls(lam=lam, p=p)

    @classmethod
    def general(cls, alpha: float, beta: float, gamma: float, lam: float = 1.0, p: float = 3.0,
                alpha_perp: float | None = None) -> "ModelParams":
        return cls(alpha, beta, gamma, lam, p, Form.GENERAL, 1, alpha_perp)

    @classmethod
    def non_elliptic(cls, sign: int, lam: float = 1.0, p: float = 3.0) -> "ModelParams":
        return cls(0.5, 0.0, 0.0, lam, p, Form.NON_ELLIPTIC, sign)

    def with_coupling(self, lam: float) -> "ModelParams":
        return ModelParams(self.alpha, self.beta, self.gamma, lam, self.p, self.form, self.sign, self.alpha_perp)

    def symbol(self, *xi) -> np.ndarray:
        """omega(xi) for broadcastable per-axis frequency arrays."""
        xi1, perp = xi[0], xi[1:]
        perp_sq = sum(k * k for k in perp) if perp else 0.0
        if self.form is Form.CANONICAL:
            return 0.5 * (xi1 * xi1 + perp_sq) + 0.25 * xi1**4
        if self.form is Form.NON_ELLIPTIC:
            return 0.5 * perp_sq - 0.5 * xi1 * xi1 - 0.25 * self.sign * xi1**4
        a_perp = self.alpha if self.alpha_perp is None else self.alpha_perp
        return self.alpha * xi1 * xi1 + a_perp * perp_sq - self.beta * xi1**3 - self.gamma * xi1**4

    def group_velocity_x1(self, xi1):
        h = 1e-6
        z = np.zeros_like(np.asarray(xi1, dtype=float))
        return (self.symbol(xi1 + h, z) - self.symbol(xi1 - h, z)) / (2 * h)


def symbol_on_grid(grid: Grid, m: ModelParams) -> np.ndarray:
    return np.broadcast_to(m.symbol(*grid.wavenumbers()), grid.shape)


def propagator(grid: Grid, m: ModelParams, dt: float) -> np.ndarray:
    return np.exp(-1j * dt * symbol_on_grid(grid, m))


def propagate(f: Field, dt: float, m: ModelParams) -> Field:
    """W(dt) f, exact in Fourier space; dt may be negative."""
    if dt == 0:
        return f.with_values(f.values.copy())
    coeffs = dft(f.values, f.grid) * propagator(f.grid, m, dt)
    return Field(f.grid, idft(coeffs, f.grid), f.time + dt)


def free_solution(psi: AnalyticProfile, t: float, g: Grid, m: ModelParams) -> Field:
    """W(t) psi synthesized from the analytic transform sampled on the lattice."""
    coeffs = sample_fourier(psi, g).coeffs
    if t != 0:
        coeffs = coeffs * propagator(g, m, t)
    return Field(g, idft(coeffs, g), t)


def free_spectral(psi: AnalyticProfile, t: float, g: Grid, m: ModelParams) -> SpectralField:
    coeffs = sample_fourier(psi, g).coeffs
    return SpectralField(g, coeffs * propagator(g, m, t), t)


@dataclass(frozen=True)
class GaugeParams:
    phase_rate: float
    wavenumber: float
    velocity: float


def gauge_params(m: ModelParams) -> GaugeParams:
    a, b, g = m.alpha, m.beta, m.gamma
    if g == 0:
        raise ValueError("gauge reduction requires gamma != 0")
    return GaugeParams(
        phase_rate=a * b * b / (16 * g * g) + 5 * b**4 / (256 * g**3),
        wavenumber=b / (4 * g),
        velocity=a * b / (2 * g) + b**3 / (8 * g * g),
    )


def gauge_reduce(u: Field, t: float, m: ModelParams) -> Field:
    """v(t,x) = exp(-i theta t + i k x1) u(t, x1 - c t, x_perp).

    The translation is applied as a spectral phase ramp, which is exact for
    band-limited fields and keeps the map unitary.
    """
    gp = gauge_params(m)
    g = u.grid
    shift = gp.velocity * t
    vals = u.values
    if shift != 0:
        xi1 = g.wavenumbers()[0]
        vals = idft(dft(vals, g) * np.exp(-1j * xi1 * shift), g)
    x1 = g.coords()[0]
    vals = vals * np.exp(-1j * gp.phase_rate * t + 1j * gp.wavenumber * x1)
    return u.with_values(vals)


def reduced_params(m: ModelParams) -> tuple[ModelParams, Reducibility]:
    """Coefficients of the beta-free equation and its reducibility class."""
    a, b, g = m.alpha, m.beta, m.gamma
    if g == 0:
        raise ValueError("reduction requires gamma != 0")
    a1 = a + 3 * b * b / (8 * g)
    a_perp = a if m.alpha_perp is None else m.alpha_perp
    reduced = ModelParams.general(a1, 0.0, g, m.lam, m.p, alpha_perp=a_perp)
    prod = a1 * a_perp
    if prod == 0:
        flag = Reducibility.DEGENERATE
    elif prod > 0 and a_perp * g < 0:
        flag = Reducibility.ELLIPTIC
    else:
        flag = Reducibility.NON_ELLIPTIC
    return reduced, flag


def canonical_scaling(m: ModelParams) -> tuple[float, float, float]:
    """Scales (T, X1, Xp) with v(t, x) = U(t/T, x1/X1, x_perp/Xp) canonical.

    U then solves i U_s + 1/2 Lap U - 1/4 U_1111 = T lam |U|^(p-1) U.  A
    negative T means the canonical time runs backwards.
    """
    reduced, flag = reduced_params(m)
    if flag is not Reducibility.ELLIPTIC:
        raise ValueError(f"equation is {flag.value}, not reducible to the canonical form")
    a1, a_perp, g = reduced.alpha, reduced.alpha_perp, reduced.gamma
    X1 = math.sqrt(-2.0 * g / a1)
    T = X1 * X1 / (2.0 * a1)
    Xp = math.sqrt(2.0 * T * a_perp)
    return T, X1, Xp


def centroid_x1(f: Field) -> float:
    dens = np.abs(f.values) ** 2
    x1 = f.grid.coords()[0]
    return float(np.sum(dens * x1) / np.sum(dens))


def gauge_compatible_length(m: ModelParams, target: float) -> float:
    """Half-length near ``target`` on which exp(i k x1) is periodic (k L / pi integer).

    On such a box the gauge map is an exact index shift of the spectrum.
    """
    k = abs(gauge_params(m).wavenumber)
    if k == 0:
        return float(target)
    n = max(1, round(k * target / math.pi))
    return n * math.pi / k
