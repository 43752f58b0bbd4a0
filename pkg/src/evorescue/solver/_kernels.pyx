# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled multi-step kernels. Mirrors ``_kernels_py`` operation for operation."""

from libc.math cimport ceil, fabs, isfinite

cdef double NEG_TOL = 1e-12
cdef double OVER_TOL = 1e-10

# status codes shared with the Python fallback
cdef enum:
    OK = 0
    UNDERSHOOT = 1
    OVERSHOOT = 2
    NONFINITE = 3
    CFL = 4


cdef inline void _second_diff(const double[::1] u, double[::1] out, Py_ssize_t n, bint neumann) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(1, n - 1):
        out[i] = u[i + 1] - 2.0 * u[i] + u[i - 1]
    if neumann:
        out[0] = 2.0 * (u[1] - u[0])
        out[n - 1] = 2.0 * (u[n - 2] - u[n - 1])
    else:
        out[0] = 0.0
        out[n - 1] = 0.0


cdef inline void _solve(double[::1] d, double[::1] x, const double[::1] sub,
                        const double[::1] cp, const double[::1] inv_den, Py_ssize_t n) noexcept nogil:
    # forward sweep overwrites d, back substitution writes x
    cdef Py_ssize_t i
    d[0] = d[0] * inv_den[0]
    for i in range(1, n):
        d[i] = (d[i] - sub[i] * d[i - 1]) * inv_den[i]
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - cp[i] * x[i + 1]


cdef inline int _check(double[::1] v, Py_ssize_t n, double upper,
                       Py_ssize_t *node, double *value, long *clipped) noexcept nogil:
    cdef Py_ssize_t i
    cdef double w
    for i in range(n):
        w = v[i]
        if not isfinite(w):
            node[0] = i
            value[0] = w
            return NONFINITE
        if w < 0.0:
            if w > -NEG_TOL:
                v[i] = 0.0
                clipped[0] += 1
            else:
                node[0] = i
                value[0] = w
                return UNDERSHOOT
        elif w > upper + OVER_TOL:
            node[0] = i
            value[0] = w
            return OVERSHOOT
    return OK


def scalar_advance(double[::1] u, const double[::1] thetas, double r, double dt,
                   bint neumann, bint implicit, bint reaction,
                   const double[::1] sub, const double[::1] cp, const double[::1] inv_den,
                   double[::1] work, double upper):
    """Advance ``u`` in place by ``len(thetas)`` steps.

    Returns ``(status, step, node, value, clipped)``.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t nsteps = thetas.shape[0]
    cdef Py_ssize_t k = 0, i
    cdef double coef = 0.5 * r if implicit else r
    cdef double th, v
    cdef int status = OK
    cdef Py_ssize_t node = -1
    cdef double value = 0.0
    cdef long clipped = 0

    with nogil:
        for k in range(nsteps):
            th = thetas[k]
            _second_diff(u, work, n, neumann)
            for i in range(n):
                v = u[i]
                work[i] = v + coef * work[i]
                if reaction:
                    work[i] += dt * v * (v - th) * (1.0 - v)
            if not neumann:
                work[0] = 0.0
                work[n - 1] = 0.0
            if implicit:
                _solve(work, u, sub, cp, inv_den, n)
            else:
                for i in range(n):
                    u[i] = work[i]
            status = _check(u, n, upper, &node, &value, &clipped)
            if status != OK:
                break
    return status, k, node, value, clipped


def coupled_advance(double[::1] u, double[::1] a, Py_ssize_t nsteps, double r, double dt, double dx,
                    double eps, double floor, bint upwind, double a0, bint implicit,
                    const double[::1] sub, const double[::1] cp, const double[::1] inv_den,
                    double[::1] work_u, double[::1] work_a, double[::1] tmp, double[::1] vel,
                    long max_substeps):
    """Advance the (u, a) pair in place by ``nsteps`` steps.

    Returns ``(status, step, node, value, clipped, which, substeps_max)`` where
    ``which`` is 0 for u and 1 for a.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k = 0, i, s
    cdef double coef = 0.5 * r if implicit else r
    cdef double uf, den, vmax, h, ui, ai, vr, vl
    cdef long nsub, sub_used = 0
    cdef int status = OK
    cdef int which = 0
    cdef Py_ssize_t node = -1
    cdef double value = 0.0
    cdef long clipped = 0

    with nogil:
        for k in range(nsteps):
            # gene-flow velocity 2 d_x u / max(u, floor) on cell faces
            vmax = 0.0
            for i in range(n - 1):
                uf = 0.5 * (u[i] + u[i + 1])
                den = uf if uf > floor else floor
                vel[i] = 2.0 * (u[i + 1] - u[i]) / (dx * den)
                if fabs(vel[i]) > vmax:
                    vmax = fabs(vel[i])
            nsub = <long>ceil(dt * 2.0 * vmax / dx)
            if nsub < 1:
                nsub = 1
            if nsub > max_substeps:
                status = CFL
                value = vmax
                break
            if nsub > sub_used:
                sub_used = nsub

            # u: diffusion + reaction with the old threshold a^2
            _second_diff(u, work_u, n, True)
            for i in range(n):
                ui = u[i]
                ai = a[i]
                work_u[i] = ui + coef * work_u[i] + dt * ui * (ui - ai * ai) * (1.0 - ui)

            # a: explicit convection sub-steps
            h = dt / nsub
            for s in range(nsub):
                if upwind:
                    vr = vel[0] if vel[0] > 0.0 else 0.0
                    tmp[0] = 2.0 * vr * (a[1] - a[0]) / dx
                    for i in range(1, n - 1):
                        vr = vel[i] if vel[i] > 0.0 else 0.0
                        vl = vel[i - 1] if vel[i - 1] < 0.0 else 0.0
                        tmp[i] = (vr * (a[i + 1] - a[i]) + vl * (a[i] - a[i - 1])) / dx
                    vl = -vel[n - 2] if vel[n - 2] < 0.0 else 0.0
                    tmp[n - 1] = 2.0 * vl * (a[n - 2] - a[n - 1]) / dx
                else:
                    tmp[0] = vel[0] * (a[1] - a[0]) / dx
                    for i in range(1, n - 1):
                        tmp[i] = 0.5 * (vel[i] * (a[i + 1] - a[i]) + vel[i - 1] * (a[i] - a[i - 1])) / dx
                    tmp[n - 1] = vel[n - 2] * (a[n - 1] - a[n - 2]) / dx
                for i in range(n):
                    a[i] = a[i] + h * tmp[i]

            # a: diffusion + selection with the old density
            _second_diff(a, work_a, n, True)
            for i in range(n):
                ai = a[i]
                work_a[i] = ai + coef * work_a[i] - dt * eps * (1.0 - u[i]) * ai

            if implicit:
                _solve(work_u, u, sub, cp, inv_den, n)
                _solve(work_a, a, sub, cp, inv_den, n)
            else:
                for i in range(n):
                    u[i] = work_u[i]
                    a[i] = work_a[i]

            status = _check(u, n, 1.0, &node, &value, &clipped)
            if status != OK:
                which = 0
                break
            status = _check(a, n, a0, &node, &value, &clipped)
            if status != OK:
                which = 1
                break
    return status, k, node, value, clipped, which, sub_used
