"""Time stepping for the scalar, coupled and Dirichlet problems.

All three share one Crank-Nicolson diffusion operator with explicit
reaction. The gene-flow convection of the trait equation is explicit,
sub-cycled so every sub-step satisfies dt_sub <= dx / (2 max|velocity|).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..analysis.outcome import (
    DiagnosticsTable,
    RunOutcome,
    Snapshot,
    classify,
    core_min,
    front_positions,
    speed_estimate,
)
from ..core import (
    Boundary,
    ConvectionLimiter,
    CoupledParams,
    CoupledProblem,
    DirichletProblem,
    Field,
    Grid1D,
    ScalarProblem,
    ScenarioConfig,
    Scheme,
    ThresholdSchedule,
    dt_max,
    sample_initial,
)
from . import _backend
from ._backend import available as available_backends
from ._backend import set_backend

log = logging.getLogger(__name__)

_STATUS_TEXT = {1: "undershoot below -1e-12", 2: "overshoot of the upper bound", 3: "non-finite value"}


class StepError(RuntimeError):
    """Step size outside the stability contract."""

    def __init__(self, message: str, dt: float, t: float | None = None):
        super().__init__(message)
        self.dt = dt
        self.t = t


class SolverFault(RuntimeError):
    """Invariant breach after a step; carries the offending state."""

    def __init__(self, message: str, t: float, u: np.ndarray, a: np.ndarray | None = None):
        super().__init__(message)
        self.t = t
        self.u = u
        self.a = a


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    scheme: Scheme = Scheme.IMEX_CN
    convection_limiter: ConvectionLimiter = ConvectionLimiter.UPWIND

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "convection_limiter", ConvectionLimiter(self.convection_limiter))
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "StepperConfig":
        return cls(config.dt, config.scheme, config.convection)


@dataclass(frozen=True)
class CoupledState:
    t: float
    u: Field
    a: Field

    def check(self, a0: float, tol: float = 1e-10):
        u = np.asarray(self.u.values)
        a = np.asarray(self.a.values)
        if u.min() < 0 or u.max() > 1 + tol:
            raise SolverFault(f"u outside [0, 1] at t={self.t}", self.t, u, a)
        if a.min() <= 0 or a.max() > a0 + tol:
            raise SolverFault(f"a outside (0, a0] at t={self.t}", self.t, u, a)


def _validate_dt(grid: Grid1D, dt: float, scheme: Scheme, t: float | None = None):
    limit = dt_max(grid, scheme)
    if dt > limit * (1 + 1e-12):
        raise StepError(f"dt={dt} exceeds the {scheme.value} limit {limit:g}", dt, t)


def _operator(grid: Grid1D, dt: float, scheme: Scheme):
    r = dt / grid.dx**2
    return r, _backend.diffusion_operator(grid.n_nodes, 0.5 * r, grid.boundary is Boundary.NEUMANN)


def _fault(status, k, node, value, t0, dt, u, a=None, which="u"):
    t = t0 + (k + 1) * dt
    raise SolverFault(
        f"{_STATUS_TEXT.get(status, status)} in {which} at node {node} (value {value!r}), t={t:g}",
        t, u.copy(), None if a is None else a.copy(),
    )


def _advance_scalar(u, t0, dt, thetas, grid, scheme, reaction=True, upper=1.0, backend=None):
    backend = backend or _backend.active()
    r, op = _operator(grid, dt, scheme)
    status, k, node, value, clipped = backend.scalar_advance(
        u, thetas, r, dt, grid.boundary is Boundary.NEUMANN, scheme is Scheme.IMEX_CN, reaction, op, upper
    )
    if status:
        _fault(status, k, node, value, t0, dt, u)
    return clipped


def _advance_coupled(u, a, t0, nsteps, dt, grid, params, cfg, backend=None):
    backend = backend or _backend.active()
    r, op = _operator(grid, dt, cfg.scheme)
    status, k, node, value, clipped, which, nsub = backend.coupled_advance(
        u, a, nsteps, r, dt, grid.dx, params.epsilon, params.u_floor,
        cfg.convection_limiter is ConvectionLimiter.UPWIND, params.a0,
        cfg.scheme is Scheme.IMEX_CN, op,
    )
    if status == 4:
        raise StepError(
            f"convection velocity {value:g} needs more than {_backend.MAX_SUBSTEPS} sub-steps",
            dt, t0 + k * dt,
        )
    if status:
        _fault(status, k, node, value, t0, dt, u, a, "ua"[which])
    return clipped, nsub


def step_scalar(u: Field, t: float, dt: float, schedule: ThresholdSchedule, cfg: StepperConfig) -> Field:
    """One step of u_t = u_xx + f(theta(t), u), theta sampled at t + dt/2."""
    _validate_dt(u.grid, dt, cfg.scheme, t)
    vals = np.array(u.values, dtype=float)
    _advance_scalar(vals, t, dt, np.array([schedule.at(t + 0.5 * dt)]), u.grid, cfg.scheme)
    return Field(u.grid, vals)


def step_heat(u: Field, dt: float, cfg: StepperConfig, nsteps: int = 1) -> Field:
    """``nsteps`` steps of the heat equation with the same diffusion operator."""
    _validate_dt(u.grid, dt, cfg.scheme)
    vals = np.array(u.values, dtype=float)
    _advance_scalar(vals, 0.0, dt, np.zeros(nsteps), u.grid, cfg.scheme, reaction=False, upper=np.inf)
    return Field(u.grid, vals)


def step_dirichlet(v: Field, dt: float, theta0: float, cfg: StepperConfig) -> Field:
    if v.grid.boundary is not Boundary.DIRICHLET:
        raise ValueError("step_dirichlet needs a dirichlet grid")
    if v.values[0] != 0 or v.values[-1] != 0:
        raise ValueError("v must vanish at x = +-R")
    return step_scalar(v, 0.0, dt, ThresholdSchedule.constant(theta0), cfg)


def step_coupled(state: CoupledState, dt: float, params: CoupledParams, cfg: StepperConfig) -> CoupledState:
    grid = state.u.grid
    if grid.boundary is not Boundary.NEUMANN:
        raise ValueError("the coupled system runs on zero-flux grids only")
    _validate_dt(grid, dt, cfg.scheme, state.t)
    state.check(params.a0)
    u = np.array(state.u.values, dtype=float)
    a = np.array(state.a.values, dtype=float)
    _advance_coupled(u, a, state.t, 1, dt, grid, params, cfg)
    return CoupledState(state.t + dt, Field(grid, u), Field(grid, a))


def _diagnostics_row(t, u_field, a, problem):
    from ..analysis.energy import energy

    u = np.asarray(u_field.values)
    fr = front_positions(u_field)
    row = {
        "t": t,
        "max_u": float(u.max()),
        "min_u": float(u.min()),
        "mass_u": u_field.integral(),
        "front_left": fr[0] if fr else np.nan,
        "front_right": fr[1] if fr else np.nan,
        "core_min_u": core_min(u_field),
    }
    if a is not None:
        row["max_a"] = float(a.max())
    if isinstance(problem, DirichletProblem):
        row["energy"] = energy(u_field, problem.theta0).total
    return row


def run(
    config: ScenarioConfig,
    problem=None,
    u_init: Field | None = None,
    keep_snapshots: bool = True,
    backend: str | None = None,
) -> RunOutcome:
    """Integrate ``problem`` (default: the one in ``config``) to ``config.t_end``.

    Diagnostics are recorded at t=0, every ``record_every`` steps and at the
    final step. ``u_init`` replaces the sampled initial datum.
    """
    problem = problem if problem is not None else config.problem
    grid = config.grid
    cfg = StepperConfig.from_config(config)
    _validate_dt(grid, config.dt, cfg.scheme)
    be = _backend.Backend(backend) if backend else _backend.active()
    if isinstance(problem, CoupledProblem) and grid.boundary is not Boundary.NEUMANN:
        raise ValueError("the coupled system runs on zero-flux grids only")
    if isinstance(problem, DirichletProblem) and grid.boundary is not Boundary.DIRICHLET:
        raise ValueError("the Dirichlet problem needs a dirichlet grid")

    u0 = u_init if u_init is not None else sample_initial(config.initial_u, grid)
    if u0.grid != grid:
        raise ValueError("initial field lives on a different grid")
    u = np.array(u0.values, dtype=float)
    if grid.boundary is Boundary.DIRICHLET:
        u[0] = u[-1] = 0.0
    coupled = isinstance(problem, CoupledProblem)
    a = np.full_like(u, config.params.a0) if coupled else None
    if isinstance(problem, ScalarProblem):
        schedule = problem.schedule
    elif isinstance(problem, DirichletProblem):
        schedule = ThresholdSchedule.constant(problem.theta0)
    else:
        schedule = None

    dt = config.dt
    n_steps = config.n_steps
    rows, snaps = [], []
    clipped = 0
    nsub_max = 0
    boundary_t = None
    # floored data start positive at the edges; warn only on growth beyond that
    edge0 = max(u[0], u[-1])

    def record(k):
        nonlocal boundary_t
        t = k * dt
        field_u = Field(grid, u)
        rows.append(_diagnostics_row(t, field_u, a, problem))
        if keep_snapshots:
            snaps.append(Snapshot(t, u.copy(), None if a is None else a.copy()))
        if boundary_t is None and grid.boundary is Boundary.NEUMANN and max(u[0], u[-1]) > edge0 + 1e-6:
            boundary_t = t
            log.warning("u reached the truncation boundary (%.3g) at t=%g", max(u[0], u[-1]), t)

    record(0)
    k = 0
    while k < n_steps:
        chunk = min(config.record_every, n_steps - k)
        t0 = k * dt
        if coupled:
            c, ns = _advance_coupled(u, a, t0, chunk, dt, grid, config.params, cfg, backend=be)
            clipped += c
            nsub_max = max(nsub_max, ns)
        else:
            thetas = np.asarray(schedule.at(t0 + (np.arange(chunk) + 0.5) * dt), dtype=float)
            clipped += _advance_scalar(u, t0, dt, np.atleast_1d(thetas), grid, cfg.scheme, backend=be)
        k += chunk
        record(k)

    series = DiagnosticsTable.from_rows(rows)
    return RunOutcome(
        classification=classify(series, grid),
        series=series,
        grid=grid,
        snapshots=snaps,
        speed_estimate=speed_estimate(series, grid),
        problem=problem,
        clipped=clipped,
        max_substeps=nsub_max,
        boundary_contact_t=boundary_t,
    )


__all__ = [
    "CoupledState",
    "SolverFault",
    "StepError",
    "StepperConfig",
    "available_backends",
    "run",
    "set_backend",
    "step_coupled",
    "step_dirichlet",
    "step_heat",
    "step_scalar",
]
