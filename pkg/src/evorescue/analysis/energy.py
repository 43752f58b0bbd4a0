"""Dirichlet energy of the fixed-threshold problem on (-R, R)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import Boundary, Field
from ..reaction import F


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet_part: float
    reaction_part: float
    total: float
    R: float
    theta0: float


def energy(v: Field, theta0: float) -> EnergyBreakdown:
    """E = 1/2 int |v_x|^2 - int F(theta0, v) on a Dirichlet grid.

    The gradient part uses cell-face differences (midpoint rule), the
    reaction part the trapezoid rule. With this pairing the energy is an
    exact Lyapunov function of the Crank-Nicolson/explicit-reaction stepper.
    """
    grid = v.grid
    if grid.boundary is not Boundary.DIRICHLET:
        raise ValueError("energy is defined on Dirichlet grids only")
    vals = np.asarray(v.values)
    if abs(vals[0]) > 1e-14 or abs(vals[-1]) > 1e-14:
        raise ValueError("field does not vanish at x = +-R")
    dx = grid.dx
    grad = np.diff(vals) / dx
    ed = 0.5 * float(np.sum(grad * grad)) * dx
    er = -grid.trapezoid(F(theta0, vals))
    return EnergyBreakdown(ed, er, ed + er, grid.half_width, theta0)


@dataclass
class EnergyDecayReport:
    times: np.ndarray
    energies: np.ndarray
    violations: list[tuple[float, float, float]] = field(default_factory=list)
    # (t_mid, dE/dt, -int |v_t|^2) on intervals where the identity was checked
    identity: list[tuple[float, float, float]] = field(default_factory=list)
    identity_mismatches: list[tuple[float, float]] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return not self.violations

    @property
    def total_decay(self) -> float:
        return float(self.energies[0] - self.energies[-1]) if len(self.energies) else 0.0


def energy_decay_check(
    trajectory: Sequence[tuple[float, Field]],
    theta0: float,
    identity_rtol: float = 0.1,
    smooth_floor: float = 1e-10,
) -> EnergyDecayReport:
    """Check E(t_{k+1}) <= E(t_k) + 1e-6 (1 + |E(t_k)|) along a trajectory.

    Also compares dE/dt with -int |v_t|^2 (both by finite differences) on
    intervals where the dissipation exceeds ``smooth_floor``.
    """
    times = np.array([t for t, _ in trajectory], dtype=float)
    energies = np.array([energy(v, theta0).total for _, v in trajectory])
    report = EnergyDecayReport(times, energies)
    for k in range(len(trajectory) - 1):
        e0, e1 = energies[k], energies[k + 1]
        if e1 > e0 + 1e-6 * (1.0 + abs(e0)):
            report.violations.append((float(times[k + 1]), float(e0), float(e1)))
        dt = times[k + 1] - times[k]
        if dt <= 0:
            continue
        vt = (np.asarray(trajectory[k + 1][1].values) - np.asarray(trajectory[k][1].values)) / dt
        dissipation = -trajectory[k][1].grid.trapezoid(vt * vt)
        if -dissipation <= smooth_floor:
            continue
        rate = (e1 - e0) / dt
        tm = 0.5 * float(times[k] + times[k + 1])
        report.identity.append((tm, float(rate), float(dissipation)))
        if abs(rate - dissipation) > identity_rtol * abs(dissipation):
            report.identity_mismatches.append((tm, float(rate / dissipation)))
    return report
