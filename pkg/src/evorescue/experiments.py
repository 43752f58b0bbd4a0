"""Named experiment suites built on :func:`evorescue.solver.run`.

Runs inside one experiment are independent; they execute on a thread pool
(the compiled kernels release the GIL) and are reduced in submission order,
so results never depend on the thread count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import io
from .analysis.outcome import Classification, RunOutcome
from .core import (
    CoupledParams,
    CoupledProblem,
    Field,
    Grid1D,
    InitialDatum,
    ScalarProblem,
    ScenarioConfig,
    ThresholdSchedule,
    sample_initial,
)
from .solver import run

DEFAULT_EPSILONS = (0.0, 0.01, 0.02, 0.05, 0.1)
DEFAULT_WIDTHS = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
DEFAULT_N = (10, 100, 1000)
WITNESS_LEVEL = 0.05


def run_jobs(jobs: Sequence[Callable[[], RunOutcome]], threads: int = 1) -> list[RunOutcome]:
    """Execute zero-argument jobs, returning results in job order."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job(), jobs))


class Axis(str, enum.Enum):
    EPSILON = "epsilon"
    A0_SQUARED = "a0_squared"
    BUMP_HEIGHT = "bump_height"
    PLATEAU_HALF_WIDTH = "plateau_half_width"
    REGULARIZATION_N = "regularization_n"


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    axis: Axis
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("a sweep needs at least two values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be strictly increasing")

    def point(self, value: float) -> tuple[ScenarioConfig, Field | None]:
        cfg = self.base
        p = cfg.params
        if self.axis is Axis.EPSILON:
            return replace(cfg, params=replace(p, epsilon=value)), None
        if self.axis is Axis.A0_SQUARED:
            return replace(cfg, params=replace(p, a0=math.sqrt(value))), None
        if self.axis is Axis.BUMP_HEIGHT:
            d = cfg.initial_u
            return replace(cfg, initial_u=InitialDatum.bump(value, d.half_width, d.center)), None
        if self.axis is Axis.PLATEAU_HALF_WIDTH:
            d = cfg.initial_u
            return replace(cfg, initial_u=InitialDatum.plateau(d.height, value, d.center)), None
        u0 = floored_initial(cfg, int(value))
        return cfg, u0


@dataclass
class SweepRow:
    value: float
    classification: Classification
    final_max_u: float
    speed: float | None

    def as_list(self):
        return [self.value, self.classification.value, self.final_max_u, self.speed]


SWEEP_HEADER = ["value", "classification", "final_max_u", "speed"]


@dataclass
class SweepResult:
    axis: str
    rows: list[SweepRow]
    outcomes: list[RunOutcome] = field(default_factory=list, repr=False)

    def classifications(self) -> list[Classification]:
        return [r.classification for r in self.rows]

    def monotone(self) -> bool:
        ranks = [c.rank for c in self.classifications()]
        return all(b >= a for a, b in zip(ranks, ranks[1:]))


def _row(value, out: RunOutcome) -> SweepRow:
    return SweepRow(float(value), out.classification, float(out.series.max_u[-1]), out.speed_estimate)


def run_sweep(spec: SweepSpec, threads: int = 1, keep_snapshots: bool = False) -> SweepResult:
    jobs = []
    for v in spec.values:
        cfg, u0 = spec.point(v)
        jobs.append(lambda cfg=cfg, u0=u0: run(cfg, u_init=u0, keep_snapshots=keep_snapshots))
    outs = run_jobs(jobs, threads)
    return SweepResult(spec.axis.value, [_row(v, o) for v, o in zip(spec.values, outs)], outs)


# ---------------------------------------------------------------- rescue


def sub_threshold(config: ScenarioConfig) -> bool:
    u0 = sample_initial(config.initial_u, config.grid)
    return bool(np.max(u0.values) <= config.params.a0**2)


def rescue_contrast(
    config: ScenarioConfig,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    threads: int = 1,
    t_end: float | Sequence[float] | None = None,
) -> SweepResult:
    """Coupled runs of one datum across genetic variances.

    ``t_end`` may be one horizon for all rows or one per epsilon.
    """
    eps = [float(e) for e in epsilons]
    if t_end is None:
        horizons = [config.t_end] * len(eps)
    elif isinstance(t_end, (int, float)):
        horizons = [float(t_end)] * len(eps)
    else:
        horizons = [float(t) for t in t_end]
        if len(horizons) != len(eps):
            raise ValueError("one horizon per epsilon")
    jobs = []
    for e, te in zip(eps, horizons):
        cfg = replace(config, params=replace(config.params, epsilon=e), t_end=te, problem=CoupledProblem())
        jobs.append(lambda cfg=cfg: run(cfg, keep_snapshots=False))
    outs = run_jobs(jobs, threads)
    return SweepResult(Axis.EPSILON.value, [_row(e, o) for e, o in zip(eps, outs)], outs)


# ---------------------------------------------------------------- hair trigger


@dataclass
class HairTriggerRow:
    schedule: ThresholdSchedule
    classification: Classification
    final_max_u: float
    t_end: float

    def as_list(self):
        return [self.schedule.label(), self.schedule.integrable, self.classification.value, self.final_max_u, self.t_end]


HAIR_HEADER = ["schedule", "integrable", "classification", "final_max_u", "t_end"]


def hair_trigger_sweep(
    schedules: Sequence[ThresholdSchedule],
    datum: InitialDatum,
    base: ScenarioConfig,
    threads: int = 1,
    t_end: float | Sequence[float] | None = None,
) -> tuple[list[HairTriggerRow], list[RunOutcome]]:
    horizons = (
        [base.t_end] * len(schedules) if t_end is None
        else [float(t_end)] * len(schedules) if isinstance(t_end, (int, float))
        else [float(t) for t in t_end]
    )
    jobs = []
    for sch, te in zip(schedules, horizons):
        cfg = replace(base, initial_u=datum, t_end=te, problem=ScalarProblem(sch))
        jobs.append(lambda cfg=cfg: run(cfg))
    outs = run_jobs(jobs, threads)
    rows = [
        HairTriggerRow(s, o.classification, float(o.series.max_u[-1]), te)
        for s, o, te in zip(schedules, outs, horizons)
    ]
    return rows, outs


# ---------------------------------------------------------------- seed width


@dataclass
class WidthSearch:
    theta0: float
    height: float
    widths: list[float]
    classifications: list[Classification]

    @property
    def l_star(self) -> float | None:
        for w, c in zip(self.widths, self.classifications):
            if c is Classification.INVADING:
                return w
        return None

    @property
    def found(self) -> bool:
        return self.l_star is not None

    @property
    def monotone(self) -> bool:
        """Every width at or above L* invades."""
        if not self.found:
            return True
        k = self.widths.index(self.l_star)
        return all(c is Classification.INVADING for c in self.classifications[k:])

    def rows(self):
        return [[w, c.value] for w, c in zip(self.widths, self.classifications)]


def fife_mcleod_width(
    theta0: float,
    widths: Sequence[float] = DEFAULT_WIDTHS,
    base: ScenarioConfig | None = None,
    height: float | None = None,
    threads: int = 1,
) -> WidthSearch:
    """Smallest plateau half-width that invades under the constant threshold theta0."""
    if not 0 < theta0 < 0.5:
        raise ValueError("theta0 must lie in (0, 1/2)")
    h = (1.0 + theta0) / 2.0 if height is None else float(height)
    ws = sorted(float(w) for w in widths)
    base = base or default_scalar_config(t_end=300.0)
    sch = ThresholdSchedule.constant(theta0)
    jobs = []
    for w in ws:
        cfg = replace(base, initial_u=InitialDatum.plateau(h, w), problem=ScalarProblem(sch))
        jobs.append(lambda cfg=cfg: run(cfg, keep_snapshots=False))
    outs = run_jobs(jobs, threads)
    return WidthSearch(theta0, h, ws, [o.classification for o in outs])


# ---------------------------------------------------------------- continuation


def floored_initial(config: ScenarioConfig, n: int) -> Field:
    """max(u0, 1/n) on the config grid."""
    if n < 2:
        raise ValueError("n must be >= 2")
    u0 = sample_initial(config.initial_u, config.grid)
    return Field(config.grid, np.maximum(np.asarray(u0.values), 1.0 / n))


@dataclass
class ContinuationReport:
    n_values: list[int]
    window: tuple[float, float, float, float]  # x_lo, x_hi, t_lo, t_hi
    # sup over the window of |u^n - u^m| and |a^n - a^m| for consecutive n, m
    u_distances: list[float]
    a_distances: list[float]
    exponent: float  # fitted M + N
    exponent_ceiling: float  # eps + 2 max(a0^2, 1/4)
    bound_violations: int
    small_t: list[float]
    small_t_ratios: list[float]  # ||a(t) - a0||_inf / t for the first n
    final_u: list[np.ndarray] = field(default_factory=list, repr=False)
    final_a: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def distances(self) -> list[float]:
        return [max(du, da) for du, da in zip(self.u_distances, self.a_distances)]

    @property
    def distances_decrease(self) -> bool:
        d = self.distances
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def small_t_bounded(self) -> bool:
        """O(t) check: the earliest ratio does not exceed twice the fifth earliest."""
        r = self.small_t_ratios
        return len(r) >= 5 and all(np.isfinite(r)) and r[0] <= 2.0 * r[4]

    def as_dict(self) -> dict:
        return {
            "n_values": self.n_values,
            "window": list(self.window),
            "u_distances": self.u_distances,
            "a_distances": self.a_distances,
            "distances_decrease": self.distances_decrease,
            "exponent": self.exponent,
            "exponent_ceiling": self.exponent_ceiling,
            "bound_violations": self.bound_violations,
            "small_t": self.small_t,
            "small_t_ratios": self.small_t_ratios,
            "small_t_bounded": self.small_t_bounded,
        }


def regularization_continuation(
    config: ScenarioConfig,
    n_list: Sequence[int] = DEFAULT_N,
    t_window: float = 0.5,
    threads: int = 1,
) -> ContinuationReport:
    """Coupled runs from (max(u0, 1/n), a0), compared on [-L/4, L/4] x [t_window, t_end]."""
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n values must be strictly increasing")
    cfg = replace(config, problem=CoupledProblem())
    jobs = [lambda n=n: run(cfg, u_init=floored_initial(cfg, n)) for n in ns]
    outs = run_jobs(jobs, threads)

    grid = cfg.grid
    x = grid.x
    a0 = cfg.params.a0
    xmask = np.abs(x) <= grid.half_width / 4
    times = np.array([s.t for s in outs[0].snapshots])
    tmask = times >= t_window

    def window_stack(out, name):
        return np.array([getattr(s, name)[xmask] for s, keep in zip(out.snapshots, tmask) if keep])

    u_d, a_d = [], []
    for o1, o2 in zip(outs, outs[1:]):
        u_d.append(float(np.max(np.abs(window_stack(o1, "u") - window_stack(o2, "u")))))
        a_d.append(float(np.max(np.abs(window_stack(o1, "a") - window_stack(o2, "a")))))

    # log-envelope over every recorded (t > 0, x) and every n
    exponent = 0.0
    for o in outs:
        for s in o.snapshots:
            if s.t > 0:
                exponent = max(exponent, float(np.max(np.abs(np.log(s.a / a0)))) / s.t)
    k = exponent * (1 + 1e-12)
    violations = 0
    for o in outs:
        for s in o.snapshots:
            lo, hi = a0 * math.exp(-k * s.t), a0 * math.exp(k * s.t)
            violations += int(np.sum((s.a < lo * (1 - 1e-14)) | (s.a > hi * (1 + 1e-14))))

    early = [s for s in outs[0].snapshots if s.t > 0][:5]
    ratios = [float(np.max(np.abs(s.a - a0))) / s.t for s in early]
    ceiling = cfg.params.epsilon + 2.0 * max(a0**2, 0.25)
    return ContinuationReport(
        n_values=ns,
        window=(-grid.half_width / 4, grid.half_width / 4, t_window, cfg.t_end),
        u_distances=u_d,
        a_distances=a_d,
        exponent=exponent,
        exponent_ceiling=ceiling,
        bound_violations=violations,
        small_t=[s.t for s in early],
        small_t_ratios=ratios,
        final_u=[o.snapshots[-1].u for o in outs],
        final_a=[o.snapshots[-1].a for o in outs],
    )


# ---------------------------------------------------------------- persistence


class WitnessNotFound(RuntimeError):
    pass


@dataclass
class Witness:
    x0: float
    node: int
    times: list[float]


def persistence_witness(run_out: RunOutcome, level: float = WITNESS_LEVEL) -> Witness:
    """A node x0 where u(t, x0) >= level at recorded times including the final quarter.

    Among qualifying nodes, the one with most late hits wins; ties go to the
    node nearest the origin.
    """
    if run_out.classification is Classification.EXTINCT:
        raise WitnessNotFound("run is extinct")
    if not run_out.snapshots:
        raise WitnessNotFound("run kept no snapshots")
    times = np.array([s.t for s in run_out.snapshots])
    u = np.array([s.u for s in run_out.snapshots])
    hits = u >= level
    late = times >= 0.75 * times[-1]
    late_hits = hits[late].sum(axis=0)
    if late_hits.max() == 0:
        raise WitnessNotFound(f"no node stays above {level} in the final quarter")
    x = run_out.grid.x
    order = np.lexsort((np.abs(x), -late_hits))
    node = int(order[0])
    return Witness(float(x[node]), node, [float(t) for t in times[hits[:, node]]])


# ---------------------------------------------------------------- defaults and output


def default_coupled_config(epsilon: float = 0.05, t_end: float = 600.0, **kw) -> ScenarioConfig:
    return ScenarioConfig(
        grid=kw.pop("grid", Grid1D(150.0, 1200)),
        initial_u=kw.pop("initial_u", InitialDatum.bump(0.2, 5.0, 0.0)),
        t_end=t_end,
        dt=kw.pop("dt", 0.02),
        params=kw.pop("params", CoupledParams(epsilon, math.sqrt(0.3))),
        record_every=kw.pop("record_every", 50),
        problem=CoupledProblem(),
        **kw,
    )


def default_scalar_config(t_end: float = 300.0, schedule: ThresholdSchedule | None = None, **kw) -> ScenarioConfig:
    return ScenarioConfig(
        grid=kw.pop("grid", Grid1D(150.0, 1200)),
        initial_u=kw.pop("initial_u", InitialDatum.bump(0.05, 3.0, 0.0)),
        t_end=t_end,
        dt=kw.pop("dt", 0.02),
        record_every=kw.pop("record_every", 50),
        problem=ScalarProblem(schedule or ThresholdSchedule.constant(0.3)),
        **kw,
    )


def experiment_dir(root: Path, name: str, config) -> Path:
    return Path(root) / f"{name}-{io.fingerprint(config)}"


def write_sweep(result: SweepResult, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    paths = [io.write_csv(out_dir / "summary.csv", SWEEP_HEADER, (r.as_list() for r in result.rows))]
    for k, (row, out) in enumerate(zip(result.rows, result.outcomes)):
        paths.append(io.write_diagnostics(out, out_dir / f"run{k:03d}_diagnostics.csv"))
    return paths


__all__ = [
    "Axis",
    "ContinuationReport",
    "SweepResult",
    "SweepSpec",
    "Witness",
    "WitnessNotFound",
    "WidthSearch",
    "fife_mcleod_width",
    "floored_initial",
    "hair_trigger_sweep",
    "persistence_witness",
    "regularization_continuation",
    "rescue_contrast",
    "run_jobs",
    "run_sweep",
]
