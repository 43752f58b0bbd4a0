"""Numpy/scipy fallback for the compiled kernels (same signatures and status codes)."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_banded

NEG_TOL = 1e-12
OVER_TOL = 1e-10

OK, UNDERSHOOT, OVERSHOOT, NONFINITE, CFL = range(5)


def _second_diff(u, neumann):
    out = np.empty_like(u)
    out[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    if neumann:
        out[0] = 2.0 * (u[1] - u[0])
        out[-1] = 2.0 * (u[-2] - u[-1])
    else:
        out[0] = out[-1] = 0.0
    return out


def _check(v, upper, clipped):
    bad = ~np.isfinite(v)
    if bad.any():
        i = int(np.argmax(bad))
        return NONFINITE, i, float(v[i]), clipped
    neg = v < 0.0
    if neg.any():
        deep = v < -NEG_TOL
        if deep.any():
            i = int(np.argmax(deep))
            return UNDERSHOOT, i, float(v[i]), clipped
        clipped += int(neg.sum())
        v[neg] = 0.0
    over = v > upper + OVER_TOL
    if over.any():
        i = int(np.argmax(over))
        return OVERSHOOT, i, float(v[i]), clipped
    return OK, -1, 0.0, clipped


def scalar_advance(u, thetas, r, dt, neumann, implicit, reaction, ab, upper):
    """``ab`` is the banded (I - r/2 D2) matrix in ``solve_banded`` layout."""
    coef = 0.5 * r if implicit else r
    clipped = 0
    k = 0
    for k, th in enumerate(thetas):
        rhs = u + coef * _second_diff(u, neumann)
        if reaction:
            rhs += dt * u * (u - th) * (1.0 - u)
        if not neumann:
            rhs[0] = rhs[-1] = 0.0
        u[:] = solve_banded((1, 1), ab, rhs, check_finite=False) if implicit else rhs
        status, node, value, clipped = _check(u, upper, clipped)
        if status != OK:
            return status, k, node, value, clipped
    return OK, k, -1, 0.0, clipped


def coupled_advance(u, a, nsteps, r, dt, dx, eps, floor, upwind, a0, implicit, ab, max_substeps):
    coef = 0.5 * r if implicit else r
    clipped = 0
    sub_used = 0
    k = 0
    for k in range(nsteps):
        uf = 0.5 * (u[1:] + u[:-1])
        v = 2.0 * np.diff(u) / (dx * np.maximum(uf, floor))
        vmax = float(np.abs(v).max())
        nsub = max(1, math.ceil(dt * 2.0 * vmax / dx))
        if nsub > max_substeps:
            return CFL, k, -1, vmax, clipped, 0, sub_used
        sub_used = max(sub_used, nsub)

        rhs_u = u + coef * _second_diff(u, True) + dt * u * (u - a * a) * (1.0 - u)

        h = dt / nsub
        term = np.empty_like(a)
        for _ in range(nsub):
            da = np.diff(a)
            if upwind:
                vp = np.maximum(v, 0.0)
                vm = np.minimum(v, 0.0)
                term[0] = 2.0 * vp[0] * da[0]
                term[1:-1] = vp[1:] * da[1:] + vm[:-1] * da[:-1]
                term[-1] = 2.0 * -vm[-1] * -da[-1]
            else:
                term[0] = v[0] * da[0]
                term[1:-1] = 0.5 * (v[1:] * da[1:] + v[:-1] * da[:-1])
                term[-1] = v[-1] * da[-1]
            a += h * (term / dx)

        rhs_a = a + coef * _second_diff(a, True) - dt * eps * (1.0 - u) * a

        if implicit:
            u[:] = solve_banded((1, 1), ab, rhs_u, check_finite=False)
            a[:] = solve_banded((1, 1), ab, rhs_a, check_finite=False)
        else:
            u[:] = rhs_u
            a[:] = rhs_a

        status, node, value, clipped = _check(u, 1.0, clipped)
        if status != OK:
            return status, k, node, value, clipped, 0, sub_used
        status, node, value, clipped = _check(a, a0, clipped)
        if status != OK:
            return status, k, node, value, clipped, 1, sub_used
    return OK, k, -1, 0.0, clipped, 0, sub_used
