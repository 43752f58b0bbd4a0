"""Lower bound u(t) >= exp(-int_0^t theta) (Gamma(t) * u0) along a scalar run."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import Field, ThresholdSchedule
from .heat import HeatSolution
from .outcome import RunOutcome, Snapshot

REL_TOL = 1e-3


@dataclass
class ComparisonReport:
    checked_times: list[float] = field(default_factory=list)
    # (t, x, u, bound - tol)
    violations: list[tuple[float, float, float, float]] = field(default_factory=list)
    # min over nodes of (u - bound) / max w, per checked time
    margins: list[float] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "checked_times": self.checked_times,
            "n_violations": len(self.violations),
            "violations": self.violations[:50],
            "margins": self.margins,
        }


def comparison_bound_check(
    run: RunOutcome | Sequence[Snapshot],
    schedule: ThresholdSchedule,
    t_max: float = math.inf,
    rel_tol: float = REL_TOL,
    grid=None,
) -> ComparisonReport:
    """Check every recorded snapshot with 0 < t <= t_max against the bound.

    The t = 0 snapshot supplies u0. Pass ``grid`` when handing in bare snapshots.
    """
    if isinstance(run, RunOutcome):
        snaps, grid = run.snapshots, run.grid
    else:
        snaps = list(run)
    if grid is None:
        raise ValueError("grid is required with bare snapshots")
    if not snaps or snaps[0].t != 0:
        raise ValueError("snapshots must start at t = 0")
    heat = HeatSolution(Field(grid, snaps[0].u))
    x = grid.x
    rep = ComparisonReport()
    for s in snaps[1:]:
        if s.t > t_max:
            break
        w = heat.evaluate(s.t, x)
        wmax = float(w.max())
        bound = math.exp(-schedule.integral(s.t)) * w
        slack = np.asarray(s.u) - bound
        tol = rel_tol * wmax
        rep.checked_times.append(float(s.t))
        rep.margins.append(float(slack.min() / wmax) if wmax > 0 else 0.0)
        for i in np.flatnonzero(slack < -tol):
            rep.violations.append((float(s.t), float(x[i]), float(s.u[i]), float(bound[i] - tol)))
    return rep
