"""Direct quadrature of one-dimensional oscillatory integrals.

The integrals have the form  int_a^b exp(-i phi(xi)) amp(xi) dxi  with a
polynomial phase.  The window is cut into Gauss-Legendre panels whose
width never exceeds a fixed fraction of the local wavelength
2 pi / |phi'(xi)|; the fraction is halved until two successive levels
agree, which gives an estimate that is independent of the spectral
propagator it is used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .asymptotics import solve_depressed_cubic

Amplitude = Callable[[np.ndarray], np.ndarray]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class QuadratureError(RuntimeError):
    """Panel refinement did not converge to the requested tolerance."""


@dataclass(frozen=True)
class OscillatoryIntegral:
    """int_a^b exp(-i phi(xi)) amp(xi) dxi with a polynomial phase phi."""

    phase: Polynomial
    amplitude: Amplitude
    window: tuple[float, float]
    center: float = 0.0
    amplitude_derivative: Amplitude | None = None
    taper: float = 0.0

    def taper_weight(self, xi: np.ndarray) -> np.ndarray:
        """Cosine roll-off over the outer ``taper`` fraction of the window."""
        if self.taper <= 0:
            return np.ones_like(xi)
        a, b = self.window
        width = self.taper * (b - a)
        w = np.ones_like(xi)
        lo = xi < a + width
        hi = xi > b - width
        w[lo] = 0.5 - 0.5 * np.cos(math.pi * (xi[lo] - a) / width)
        w[hi] = 0.5 - 0.5 * np.cos(math.pi * (b - xi[hi]) / width)
        return w


def quartic_phase(t: float, x1: float) -> Polynomial:
    """phi(xi) = t xi^4/4 + t xi^2/2 - x1 xi, so exp(-i phi) is the canonical kernel phase."""
    return Polynomial([0.0, -x1, 0.5 * t, 0.0, 0.25 * t])


def quadratic_phase(t: float, z: float) -> Polynomial:
    return Polynomial([0.0, -z, 0.5 * t])


def _breakpoints(phase: Polynomial, a: float, b: float, frac: float, hmax: float, pins=()) -> np.ndarray:
    """Panel edges with width <= min(hmax, frac * 2 pi / |phi'|)."""
    dphi = phase.deriv()
    fine = np.linspace(a, b, 4097)
    for p in pins:
        if a < p < b:
            fine = np.union1d(fine, [p])
    dens = np.abs(dphi(fine)) / (2.0 * math.pi * frac) + 1.0 / hmax
    # trapezoid cumulative count, with a safety factor for curvature between samples
    mids = 0.5 * (dens[1:] + dens[:-1]) * np.diff(fine)
    count = np.concatenate([[0.0], np.cumsum(np.maximum(mids, 0.0))]) * 1.25
    n = max(int(math.ceil(count[-1])), 1)
    edges = np.interp(np.linspace(0.0, count[-1], n + 1), count, fine)
    edges[0], edges[-1] = a, b
    for p in pins:
        if a < p < b:
            edges = np.union1d(edges, [p])
    return edges


def _panel_sum(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, chunk: int = 50000) -> complex:
    total = 0.0 + 0.0j
    n = len(edges) - 1
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        lo = edges[s:e]
        hi = edges[s + 1 : e + 1]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        xi = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = f(xi.ravel()).reshape(xi.shape)
        total += complex(np.sum((vals @ _GL_WEIGHTS) * half))
    return total


def integrate(oi: OscillatoryIntegral, tol: float = 1e-10, max_levels: int = 6) -> complex:
    """int_a^b exp(-i phi) amp (with taper) by oscillation-aware Gauss-Legendre panels."""
    a, b = oi.window
    if not b > a:
        raise ValueError("window must satisfy a < b")

    def integrand(xi):
        return np.exp(-1j * oi.phase(xi)) * oi.amplitude(xi) * oi.taper_weight(xi)

    hmax = min(0.5, (b - a) / 8.0)
    frac = 2.0
    prev = _panel_sum(integrand, _breakpoints(oi.phase, a, b, frac, hmax, (oi.center,)))
    for _ in range(max_levels):
        frac *= 0.5
        hmax *= 0.5
        cur = _panel_sum(integrand, _breakpoints(oi.phase, a, b, frac, hmax, (oi.center,)))
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise QuadratureError(f"oscillatory quadrature stalled: last two levels differ by {abs(cur - prev):.3e}")


def amplitude_window(amp: Amplitude, center: float, rel: float = 1e-14, start: float = 1.0, limit: float = 1e4):
    """Symmetric-growth window around ``center`` outside of which |amp| < rel * max|amp|."""
    bounds = []
    for direction in (-1.0, 1.0):
        R = start
        while R < limit:
            xs = center + direction * np.linspace(0.0, R, 2001)
            vals = np.abs(amp(xs))
            peak = vals.max()
            if peak == 0.0:
                return center - start, center + start
            tail = vals[xs * direction >= (center * direction + 0.9 * R)]
            if tail.max() < rel * peak:
                break
            R *= 1.5
        bounds.append(center + direction * R)
    return bounds[0], bounds[1]


def kernel_integral(
    t: float,
    x1: float,
    amp: Amplitude,
    tol: float = 1e-8,
    window: tuple[float, float] | None = None,
    taper: float = 0.1,
) -> complex:
    """(2 pi)^(-1/2) int exp(i x1 xi - i t xi^2/2 - i t xi^4/4) amp(xi) dxi.

    For d = 1 this is W(t) psi evaluated at x1 when ``amp = psi_hat``.
    """
    if not t > 0:
        raise ValueError("kernel integral needs t > 0")
    c = float(solve_depressed_cubic(x1 / t))
    if window is None:
        lo, hi = amplitude_window(amp, 0.0)
        lo, hi = min(lo, c - 1.0), max(hi, c + 1.0)
        pad = 0.1 * (hi - lo) / 0.8 if taper > 0 else 0.0
        window = (lo - pad, hi + pad)
    oi = OscillatoryIntegral(quartic_phase(t, x1), amp, window, c, taper=taper)
    value = integrate(oi, tol=tol * math.sqrt(2.0 * math.pi) * 0.1)
    if value != value:
        raise QuadratureError("non-finite quadrature result")
    return INV_SQRT_2PI * value


@dataclass(frozen=True)
class IBPResult:
    """Pieces of the integration-by-parts identity.

    int e^{-i phi} psi = boundary - int e^{-i phi} first - i int e^{-i phi} second
    """

    boundary: complex
    first: OscillatoryIntegral
    second: OscillatoryIntegral

    def evaluate(self, tol: float = 1e-10) -> complex:
        return self.boundary - integrate(self.first, tol) - 1j * integrate(self.second, tol)


def ibp_transform(oi: OscillatoryIntegral) -> IBPResult:
    """Rewrite int e^{-i phi} psi with the pivot c = oi.center.

    Uses e^{-i phi} = {e^{-i phi} (xi - c)}' / (1 - i (xi - c) phi') and
    integrates by parts once.  Tapering is not supported here because the
    taper would have to enter psi' as well.
    """
    if oi.amplitude_derivative is None:
        raise ValueError("ibp_transform needs the amplitude derivative")
    if oi.taper:
        raise ValueError("ibp_transform works on untapered integrals")
    phi, c = oi.phase, oi.center
    dphi, d2phi = phi.deriv(), phi.deriv(2)
    psi, dpsi = oi.amplitude, oi.amplitude_derivative

    def denom(xi):
        return 1.0 - 1j * (xi - c) * dphi(xi)

    def first(xi):
        return (xi - c) * dpsi(xi) / denom(xi)

    def second(xi):
        return (xi - c) * (dphi(xi) + (xi - c) * d2phi(xi)) * psi(xi) / denom(xi) ** 2

    def edge(xi):
        xi = np.asarray([xi], dtype=float)
        return complex((np.exp(-1j * phi(xi)) * (xi - c) * psi(xi) / denom(xi))[0])

    a, b = oi.window
    boundary = edge(b) - edge(a)
    return IBPResult(
        boundary,
        replace(oi, amplitude=first, amplitude_derivative=None),
        replace(oi, amplitude=second, amplitude_derivative=None),
    )


def fresnel_integral(t: float, z: float, eps: float = 1e-3, levels: int = 4, tol: float = 1e-12) -> complex:
    """(2 pi)^(-1/2) int exp(i z xi - i t xi^2 / 2) dxi by regularized quadrature.

    The conditionally convergent integral is damped by exp(-e xi^2) for
    e = eps t, eps t / 2, ..., and the damped values (each an analytic
    function of e) are Richardson-extrapolated to e = 0.
    """
    if not t > 0:
        raise ValueError("Fresnel integral needs t > 0")
    c = z / t
    vals = []
    epss = [eps * t / 2**k for k in range(levels)]
    for e in epss:
        R = abs(c) + math.sqrt(36.0 * math.log(10.0) / e)

        def amp(xi, e=e):
            return np.exp(-e * xi * xi)

        oi = OscillatoryIntegral(quadratic_phase(t, z), amp, (-R, R), c)
        vals.append(integrate(oi, tol=tol))
    # Neville tableau in e
    table = list(vals)
    for j in range(1, levels):
        for i in range(levels - 1, j - 1, -1):
            table[i] = (epss[i - j] * table[i] - epss[i] * table[i - 1]) / (epss[i - j] - epss[i])
    return INV_SQRT_2PI * table[-1]


def fresnel_closed_form(t: float, z: float) -> complex:
    return t**-0.5 * np.exp(1j * z * z / (2.0 * t) - 0.25j * math.pi)
