"""Kernel backend selection.

The compiled extension is used when importable; set ``EVORESCUE_PURE_PYTHON=1``
to force the numpy fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

MAX_SUBSTEPS = 1000


@dataclass(frozen=True, eq=False)
class DiffusionOperator:
    """Factorized (I - c D2) for a fixed grid size, boundary and coefficient."""

    n: int
    neumann: bool
    sub: np.ndarray
    cp: np.ndarray
    inv_den: np.ndarray
    ab: np.ndarray


@lru_cache(maxsize=64)
def diffusion_operator(n: int, coef: float, neumann: bool) -> DiffusionOperator:
    sub = np.full(n, -coef)
    diag = np.full(n, 1.0 + 2.0 * coef)
    sup = np.full(n, -coef)
    sub[0] = 0.0
    sup[-1] = 0.0
    if neumann:
        sup[0] = -2.0 * coef
        sub[-1] = -2.0 * coef
    else:
        diag[0] = diag[-1] = 1.0
        sup[0] = 0.0
        sub[-1] = 0.0

    cp = np.zeros(n)
    inv_den = np.empty(n)
    inv_den[0] = 1.0 / diag[0]
    cp[0] = sup[0] * inv_den[0]
    for i in range(1, n):
        inv_den[i] = 1.0 / (diag[i] - sub[i] * cp[i - 1])
        cp[i] = sup[i] * inv_den[i]

    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1] = diag
    ab[2, :-1] = sub[1:]
    for arr in (sub, cp, inv_den, ab):
        arr.flags.writeable = False
    return DiffusionOperator(n, neumann, sub, cp, inv_den, ab)


class Backend:
    def __init__(self, name: str):
        if name == "compiled" and _compiled is None:
            raise ImportError("compiled kernels are not built")
        self.name = name
        self._mod = _compiled if name == "compiled" else _kernels_py

    def __repr__(self):
        return f"Backend({self.name!r})"

    def scalar_advance(self, u, thetas, r, dt, neumann, implicit, reaction, op, upper):
        if self.name == "compiled":
            work = np.empty_like(u)
            return self._mod.scalar_advance(
                u, thetas, r, dt, neumann, implicit, reaction, op.sub, op.cp, op.inv_den, work, upper
            )
        return self._mod.scalar_advance(u, thetas, r, dt, neumann, implicit, reaction, op.ab, upper)

    def coupled_advance(self, u, a, nsteps, r, dt, dx, eps, floor, upwind, a0, implicit, op):
        if self.name == "compiled":
            n = len(u)
            return self._mod.coupled_advance(
                u, a, nsteps, r, dt, dx, eps, floor, upwind, a0, implicit,
                op.sub, op.cp, op.inv_den,
                np.empty(n), np.empty(n), np.empty(n), np.empty(n - 1),
                MAX_SUBSTEPS,
            )
        return self._mod.coupled_advance(
            u, a, nsteps, r, dt, dx, eps, floor, upwind, a0, implicit, op.ab, MAX_SUBSTEPS
        )


def available() -> list[str]:
    return (["compiled"] if _compiled is not None else []) + ["python"]


def _default() -> Backend:
    if os.environ.get("EVORESCUE_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
        return Backend("python")
    return Backend("compiled")


_active = _default()


def active() -> Backend:
    return _active


def set_backend(name: str) -> Backend:
    """Switch the process-wide backend; returns the previous one."""
    global _active
    previous = _active
    _active = Backend(name)
    return previous
