"""Truncated heat profile z = Theta chi(x/sqrt t) w(t, x) and its scaled energy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from ..core import Boundary, DomainError, Field, Grid1D, ThresholdSchedule
from .energy import energy
from .heat import HeatSolution

DEFAULT_LADDER = tuple(10.0 ** (2 + 0.5 * k) for k in range(7))
DEFAULT_CELLS = 2000


def cutoff(s):
    """C^2 cutoff: 1 on |s| <= 1/2, 0 on |s| >= 1, quintic smoothstep between."""
    s = np.abs(np.asarray(s, dtype=float))
    r = np.clip(2.0 * (1.0 - s), 0.0, 1.0)
    out = r * r * r * (10.0 + r * (-15.0 + 6.0 * r))
    return float(out) if out.ndim == 0 else out


def support_radius(u0: Field) -> float:
    x = u0.grid.x[np.asarray(u0.values) != 0]
    if x.size == 0:
        raise DomainError("initial datum vanishes identically")
    return float(np.abs(x).max())


def _theta_total(schedule: ThresholdSchedule) -> float:
    if not schedule.integrable:
        raise DomainError(f"schedule {schedule.label()} is not integrable on (0, inf)")
    return math.exp(-schedule.integral(math.inf))


def _check_time(t: float, u0: Field):
    rad = support_radius(u0)
    if math.sqrt(t) < 4.0 * rad:
        raise DomainError(f"t={t:g} too small: need sqrt(t) >= {4 * rad:g}")


def claim1_profile(
    t: float, u0: Field, schedule: ThresholdSchedule, n_cells: int = DEFAULT_CELLS,
    heat: HeatSolution | None = None,
) -> Field:
    """z(t, .) on the Dirichlet grid (-sqrt t, sqrt t)."""
    big_theta = _theta_total(schedule)
    _check_time(t, u0)
    grid = Grid1D(math.sqrt(t), n_cells, Boundary.DIRICHLET)
    heat = heat or HeatSolution(u0)
    z = big_theta * cutoff(grid.x / grid.half_width) * heat.evaluate(t, grid.x)
    z[0] = z[-1] = 0.0
    return Field(grid, z)


def cubic_term_limit(alpha: float) -> float:
    """alpha^3 (4 pi)^(-3/2) int_{-1/2}^{1/2} exp(-3 y^2 / 4) dy."""
    val, _ = integrate.quad(lambda y: math.exp(-0.75 * y * y), -0.5, 0.5, epsabs=0.0, epsrel=1e-13)
    return alpha**3 * (4.0 * math.pi) ** -1.5 * val


@dataclass
class Claim1Report:
    times: list[float] = field(default_factory=list)
    scaled_energies: list[float] = field(default_factory=list)
    dirichlet_scaled: list[float] = field(default_factory=list)  # E^d t^(3/2)
    reaction_scaled: list[float] = field(default_factory=list)  # t E^r
    cubic_scaled: list[float] = field(default_factory=list)  # t int_{|x|<=sqrt t/2} w^3
    cubic_limit: float = math.nan
    skipped: list[float] = field(default_factory=list)
    alpha: float = math.nan
    big_theta: float = math.nan

    @property
    def first_negative_t(self) -> float | None:
        for t, e in zip(self.times, self.scaled_energies):
            if e < 0:
                return t
        return None

    def dirichlet_ratios(self) -> list[float]:
        d = self.dirichlet_scaled
        return [d[k + 1] / d[k] for k in range(len(d) - 1)]

    def as_dict(self) -> dict:
        return {
            "times": self.times,
            "scaled_energies": self.scaled_energies,
            "dirichlet_scaled": self.dirichlet_scaled,
            "reaction_scaled": self.reaction_scaled,
            "cubic_scaled": self.cubic_scaled,
            "cubic_limit": self.cubic_limit,
            "skipped": self.skipped,
            "alpha": self.alpha,
            "big_theta": self.big_theta,
            "first_negative_t": self.first_negative_t,
        }


def claim1_scan(
    u0: Field,
    schedule: ThresholdSchedule,
    time_ladder: Sequence[float] = DEFAULT_LADDER,
    n_cells: int = DEFAULT_CELLS,
) -> Claim1Report:
    """Evaluate t E_{sqrt t, theta(t)}(z(t)) along ``time_ladder``.

    Ladder points where sqrt(t) is below four support radii are listed in
    ``skipped`` rather than evaluated.
    """
    big_theta = _theta_total(schedule)
    times = [float(t) for t in time_ladder]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("time ladder must be increasing")
    heat = HeatSolution(u0)
    rad = support_radius(u0)
    rep = Claim1Report(cubic_limit=cubic_term_limit(heat.alpha), alpha=heat.alpha, big_theta=big_theta)
    for t in times:
        if math.sqrt(t) < 4.0 * rad:
            rep.skipped.append(t)
            continue
        z = claim1_profile(t, u0, schedule, n_cells, heat)
        e = energy(z, float(schedule.at(t)))
        rep.times.append(t)
        rep.scaled_energies.append(t * e.total)
        rep.dirichlet_scaled.append(e.dirichlet_part * t**1.5)
        rep.reaction_scaled.append(t * e.reaction_part)
        x = z.grid.x
        inner = np.abs(x) <= 0.5 * z.grid.half_width * (1 + 1e-12)
        w = heat.evaluate(t, x[inner])
        rep.cubic_scaled.append(t * float(integrate.trapezoid(w**3, x[inner])))
    return rep
