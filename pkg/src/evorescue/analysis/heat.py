"""Heat kernel, exact heat evolution of a sampled datum, and L^p scalings."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize, special

from ..core import DomainError, Field, Grid1D

_CHUNK = 1 << 20


def heat_kernel(t: float, x):
    """(4 pi t)^(-1/2) exp(-x^2 / 4t)."""
    if not t > 0:
        raise DomainError("heat kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    out = np.exp(-x * x / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return float(out) if out.ndim == 0 else out


def _erf_diff(z0, z1):
    # erf(z1) - erf(z0) for z0 <= z1 without cancellation in the tails
    return np.where(
        z0 >= 0,
        special.erfc(z0) - special.erfc(z1),
        np.where(z1 <= 0, special.erfc(-z1) - special.erfc(-z0), special.erf(z1) - special.erf(z0)),
    )


class HeatSolution:
    """Whole-line heat flow started from the piecewise-linear interpolant of ``u0``.

    Each linear piece is convolved with the Gaussian in closed form, so
    evaluation is exact up to special-function rounding at every t > 0.
    """

    def __init__(self, u0: Field):
        v = np.asarray(u0.values, dtype=float)
        x = u0.grid.x
        live = (v[:-1] != 0) | (v[1:] != 0)
        self.y0 = x[:-1][live]
        self.y1 = x[1:][live]
        self.v0 = v[:-1][live]
        self.slope = (v[1:][live] - self.v0) / u0.grid.dx
        self.u0 = u0
        self.alpha = u0.integral()

    def evaluate(self, t: float, x) -> np.ndarray:
        if not t > 0:
            raise DomainError("heat evolution needs t > 0")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        scale = math.sqrt(4.0 * t)
        step = max(1, _CHUNK // max(1, len(self.y0)))
        for start in range(0, len(x), step):
            xs = x[start:start + step, None]
            z0 = (self.y0 - xs) / scale
            z1 = (self.y1 - xs) / scale
            lin = self.v0 + self.slope * (xs - self.y0)
            part = 0.5 * lin * _erf_diff(z0, z1)
            part += self.slope * math.sqrt(t / math.pi) * (np.exp(-z0 * z0) - np.exp(-z1 * z1))
            out[start:start + step] = part.sum(axis=1)
        return out


def heat_evolve(u0: Field, t: float, grid: Grid1D | None = None) -> Field:
    """w(t) = Gamma(t) * u0 evaluated at the nodes of ``grid`` (default: u0's grid)."""
    grid = grid or u0.grid
    return Field(grid, HeatSolution(u0).evaluate(t, grid.x))


def _exponent(p: float) -> float:
    return 0.5 if math.isinf(p) else 0.5 * (1.0 - 1.0 / p)


def kernel_norm(t: float, p: float) -> float:
    """Closed form of ||Gamma(t, .)||_p = c_p t^(-(1 - 1/p)/2)."""
    if not t > 0:
        raise DomainError("kernel norm needs t > 0")
    if p < 1:
        raise DomainError("p must be >= 1")
    if math.isinf(p):
        c = (4.0 * math.pi) ** -0.5
    else:
        c = (4.0 * math.pi) ** -_exponent(p) * p ** (-1.0 / (2.0 * p))
    return c * t ** -_exponent(p)


def kernel_norm_quadrature(t: float, p: float) -> float:
    """Adaptive-quadrature value of ||Gamma(t, .)||_p, independent of the closed form."""
    if p < 1:
        raise DomainError("p must be >= 1")
    span = 40.0 * math.sqrt(t)
    if math.isinf(p):
        res = optimize.minimize_scalar(
            lambda x: -heat_kernel(t, x), bounds=(-span, span), method="bounded",
            options={"xatol": 1e-12 * span},
        )
        return float(-res.fun)
    val, _ = integrate.quad(
        lambda x: heat_kernel(t, x) ** p, -span, span, points=[0.0], epsabs=0.0, epsrel=1e-13, limit=400
    )
    return val ** (1.0 / p)


def lp_norm(values: np.ndarray, grid: Grid1D, p: float) -> float:
    v = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(v.max())
    return grid.trapezoid(v**p) ** (1.0 / p)


def evaluation_grid(u0: Field, t: float, n_cells: int = 8000) -> Grid1D:
    """Symmetric grid wide enough to hold w(t) and alpha Gamma(t) to e^-100."""
    x = u0.grid.x[np.asarray(u0.values) != 0]
    reach = float(np.abs(x).max()) if x.size else 0.0
    return Grid1D(reach + 10.0 * math.sqrt(4.0 * t), n_cells)


def self_similarity_gap(u0: Field, t: float, p: float, n_cells: int = 8000) -> float:
    """||w(t) - alpha Gamma(t)||_p scaled by t^((1 - 1/p)/2)."""
    sol = HeatSolution(u0)
    grid = evaluation_grid(u0, t, n_cells)
    diff = sol.evaluate(t, grid.x) - sol.alpha * heat_kernel(t, grid.x)
    return lp_norm(diff, grid, p) * t ** _exponent(p)
