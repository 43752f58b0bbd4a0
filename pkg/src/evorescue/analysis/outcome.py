"""Run outcomes, diagnostics series, front tracking and classification."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from ..core import Field, Grid1D

FRONT_LEVEL = 0.5
INVADE_LEVEL = 0.99
EXTINCT_LEVEL = 0.01
PERSIST_LEVEL = 0.5
_MONOTONE_TOL = 1e-9


class Classification(str, enum.Enum):
    EXTINCT = "extinct"
    UNDECIDED = "undecided"
    PERSISTENT = "persistent"
    INVADING = "invading"

    @property
    def rank(self) -> int:
        return list(Classification).index(self)


DIAGNOSTIC_COLUMNS = (
    "t", "max_u", "min_u", "max_a", "mass_u", "front_right", "front_left", "energy", "core_min_u",
)


@dataclass(frozen=True, eq=False)
class DiagnosticsTable:
    """Columnar diagnostics; absent values (no front, no a-field) are NaN."""

    t: np.ndarray
    max_u: np.ndarray
    min_u: np.ndarray
    max_a: np.ndarray
    mass_u: np.ndarray
    front_right: np.ndarray
    front_left: np.ndarray
    energy: np.ndarray
    core_min_u: np.ndarray

    @classmethod
    def from_rows(cls, rows: Sequence[dict[str, float]]) -> "DiagnosticsTable":
        cols = {
            name: np.array([r.get(name, np.nan) for r in rows], dtype=float)
            for name in DIAGNOSTIC_COLUMNS
        }
        return cls(**cols)

    def __len__(self):
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def rows(self):
        for i in range(len(self)):
            yield {name: float(getattr(self, name)[i]) for name in DIAGNOSTIC_COLUMNS}

    def reflected(self) -> "DiagnosticsTable":
        """Series of the mirror-image run x -> -x."""
        return replace(self, front_right=-self.front_left, front_left=-self.front_right)


@dataclass(frozen=True, eq=False)
class Snapshot:
    t: float
    u: np.ndarray
    a: np.ndarray | None = None


def front_positions(u: Field, level: float = FRONT_LEVEL) -> tuple[float, float] | None:
    """Outermost linearly interpolated crossings of ``u = level``.

    When u exceeds ``level`` up to a domain end, that end is reported.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    v = np.asarray(u.values)
    x = u.grid.x
    above = np.flatnonzero(v >= level)
    if above.size == 0:
        return None
    i, j = above[-1], above[0]
    if i == len(v) - 1:
        xr = x[-1]
    else:
        xr = x[i] + (v[i] - level) / (v[i] - v[i + 1]) * u.grid.dx
    if j == 0:
        xl = x[0]
    else:
        xl = x[j] - (v[j] - level) / (v[j] - v[j - 1]) * u.grid.dx
    return float(xl), float(xr)


def core_min(u: Field) -> float:
    x = u.grid.x
    return float(np.min(np.asarray(u.values)[np.abs(x) <= u.grid.half_width / 8]))


def _fronts_expand(series: DiagnosticsTable) -> bool:
    t = series.t
    late = t >= 0.5 * t[-1]
    right = series.front_right[late]
    left = series.front_left[late]
    if np.isnan(right[-1]) or np.isnan(left[-1]):
        return False
    right = right[~np.isnan(right)]
    left = left[~np.isnan(left)]
    return bool(np.all(np.diff(right) >= -_MONOTONE_TOL) and np.all(np.diff(left) <= _MONOTONE_TOL))


def classify(series: DiagnosticsTable, grid: Grid1D) -> Classification:
    """Label a run from its diagnostics.

    Invading: u >= 0.99 on |x| <= L/8 at the end and both fronts expanding
    monotonically over the second half. Extinct: final max u < 0.01.
    Persistent: max u exceeds 0.5 somewhere in the final quarter.
    """
    if len(series) == 0:
        return Classification.UNDECIDED
    if series.core_min_u[-1] >= INVADE_LEVEL and _fronts_expand(series):
        return Classification.INVADING
    if series.max_u[-1] < EXTINCT_LEVEL:
        return Classification.EXTINCT
    late = series.t >= 0.75 * series.t[-1]
    if np.max(series.max_u[late]) > PERSIST_LEVEL:
        return Classification.PERSISTENT
    return Classification.UNDECIDED


def speed_estimate(series: DiagnosticsTable, grid: Grid1D) -> float | None:
    """Least-squares slope of the right front over the second half, while inside the domain."""
    t = series.t
    if len(t) < 3:
        return None
    xr = series.front_right
    keep = (t >= 0.5 * t[-1]) & ~np.isnan(xr) & (xr < grid.half_width - grid.dx)
    if keep.sum() < 3:
        return None
    slope, _ = np.polyfit(t[keep], xr[keep], 1)
    return float(slope)


@dataclass(eq=False)
class RunOutcome:
    classification: Classification
    series: DiagnosticsTable
    grid: Grid1D
    snapshots: list[Snapshot] = field(default_factory=list)
    speed_estimate: float | None = None
    problem: Any = None
    clipped: int = 0
    max_substeps: int = 0
    boundary_contact_t: float | None = None

    @property
    def fronts(self) -> np.ndarray:
        """Rows of (t, x_left, x_right); NaN where no front exists."""
        s = self.series
        return np.column_stack([s.t, s.front_left, s.front_right])

    @property
    def t_end(self) -> float:
        return float(self.series.t[-1])

    def final_u(self) -> Field:
        return Field(self.grid, self.snapshots[-1].u)
