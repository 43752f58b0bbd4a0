"""Grids, fields, threshold schedules and scenario configuration."""

from __future__ import annotations

import enum
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Invalid scenario or datum; ``key`` names the offending setting."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class DomainError(ValueError):
    pass


class Boundary(str, enum.Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class Grid1D:
    """Uniform mesh on [-half_width, half_width] with ``n_cells + 1`` nodes."""

    half_width: float
    n_cells: int
    boundary: Boundary = Boundary.NEUMANN

    def __post_init__(self):
        if not self.half_width > 0:
            raise ConfigError("must be positive", "grid.half_width")
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ConfigError("must be an integer >= 8", "grid.n_cells")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @classmethod
    def from_spacing(cls, half_width: float, dx: float, boundary=Boundary.NEUMANN) -> "Grid1D":
        n = round(2.0 * half_width / dx)
        if not math.isclose(n * dx, 2.0 * half_width, rel_tol=1e-9):
            raise ConfigError(f"dx={dx} does not divide the domain", "grid.dx")
        return cls(half_width, n, boundary)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n_nodes)

    def trapezoid(self, values: np.ndarray) -> float:
        v = np.asarray(values, dtype=float)
        return float(self.dx * (v.sum() - 0.5 * (v[0] + v[-1])))


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n_nodes,):
            raise ValueError(f"expected {self.grid.n_nodes} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def integral(self) -> float:
        return self.grid.trapezoid(self.values)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)


# --- threshold schedules -------------------------------------------------


class ScheduleKind(str, enum.Enum):
    CONSTANT = "constant"
    EXPONENTIAL = "exponential"
    POWER = "power"


@dataclass(frozen=True)
class ThresholdSchedule:
    """Time-dependent Allee threshold.

    ``exponential``: theta0 * exp(-rate * t); ``power``: theta0 / (1 + t)**power.
    """

    kind: ScheduleKind
    theta0: float
    rate: float = 0.0
    power: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if not 0.0 <= self.theta0 < 1.0:
            raise ConfigError(f"theta0={self.theta0} outside [0, 1)", "run.theta0")
        if self.rate < 0 or self.power < 0:
            raise ConfigError("decay parameters must be nonnegative", "run.decay_rate")

    @classmethod
    def constant(cls, theta0: float) -> "ThresholdSchedule":
        return cls(ScheduleKind.CONSTANT, theta0)

    @classmethod
    def exponential(cls, theta0: float, rate: float) -> "ThresholdSchedule":
        return cls(ScheduleKind.EXPONENTIAL, theta0, rate=rate)

    @classmethod
    def power_law(cls, theta0: float, power: float) -> "ThresholdSchedule":
        return cls(ScheduleKind.POWER, theta0, power=power)

    @property
    def integrable(self) -> bool:
        if self.theta0 == 0.0:
            return True
        if self.kind is ScheduleKind.EXPONENTIAL:
            return self.rate > 0
        if self.kind is ScheduleKind.POWER:
            return self.power > 1
        return False

    def at(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("theta is defined for t >= 0")
        if self.kind is ScheduleKind.EXPONENTIAL:
            out = self.theta0 * np.exp(-self.rate * t)
        elif self.kind is ScheduleKind.POWER:
            out = self.theta0 / (1.0 + t) ** self.power
        else:
            out = np.full_like(t, self.theta0)
        return float(out) if out.ndim == 0 else out

    def integral(self, t: float) -> float:
        """Closed-form integral of theta over [0, t]; ``t`` may be ``math.inf``."""
        if t < 0:
            raise DomainError("integral needs t >= 0")
        th0 = self.theta0
        if math.isinf(t):
            if not self.integrable:
                raise DomainError(f"{self.kind.value} schedule is not integrable on [0, inf)")
            if th0 == 0.0:
                return 0.0
            if self.kind is ScheduleKind.EXPONENTIAL:
                return th0 / self.rate
            return th0 / (self.power - 1.0)
        # written as (base) * expm1(y)/y so an underflowing y cannot zero the result
        if self.kind is ScheduleKind.EXPONENTIAL and self.rate > 0:
            y = -self.rate * t
            return th0 * t * (math.expm1(y) / y if y != 0.0 else 1.0)
        if self.kind is ScheduleKind.POWER and self.power > 0:
            s = math.log1p(t)
            y = (1.0 - self.power) * s
            return th0 * s * (math.expm1(y) / y if y != 0.0 else 1.0)
        return th0 * t

    def label(self) -> str:
        if self.kind is ScheduleKind.EXPONENTIAL:
            return f"exponential(theta0={self.theta0:g}, rate={self.rate:g})"
        if self.kind is ScheduleKind.POWER:
            return f"power(theta0={self.theta0:g}, p={self.power:g})"
        return f"constant(theta0={self.theta0:g})"


def theta_at(schedule: ThresholdSchedule, t):
    return schedule.at(t)


def theta_integral(schedule: ThresholdSchedule, t: float) -> float:
    return schedule.integral(t)


# --- parameters and initial data -----------------------------------------


DEFAULT_EPSILON = 0.05


@dataclass(frozen=True)
class CoupledParams:
    epsilon: float = DEFAULT_EPSILON
    a0: float = math.sqrt(0.3)
    u_floor: float = 1e-10

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigError("must be >= 0", "params.epsilon")
        if not 0 < self.a0 < 1:
            raise ConfigError("must lie in (0, 1)", "params.a0")
        if not 0 < self.u_floor < 1:
            raise ConfigError("must lie in (0, 1)", "params.u_floor")


class DatumKind(str, enum.Enum):
    BUMP = "bump"
    PLATEAU = "plateau"
    CUSTOM = "custom"


@dataclass(frozen=True)
class InitialDatum:
    """Initial population profile.

    ``bump`` is h * max(0, 1 - (x-c)^2/l^2)^2. ``plateau`` is h on |x-c| < l,
    with nodes lying exactly on the jump set to h/2. ``custom`` linearly
    interpolates ``table`` rows (x, u) and is zero outside the table.
    """

    kind: DatumKind
    height: float = 0.0
    half_width: float = 0.0
    center: float = 0.0
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", DatumKind(self.kind))
        if self.kind is DatumKind.CUSTOM:
            table = tuple((float(x), float(u)) for x, u in self.table)
            object.__setattr__(self, "table", table)
            if len(table) < 2:
                raise ConfigError("custom datum needs at least two rows", "initial.table")
        else:
            if not 0 < self.height <= 1:
                raise ConfigError("must lie in (0, 1]", "initial.height")
            if not self.half_width > 0:
                raise ConfigError("must be positive", "initial.half_width")

    @classmethod
    def bump(cls, height: float, half_width: float, center: float = 0.0) -> "InitialDatum":
        return cls(DatumKind.BUMP, height, half_width, center)

    @classmethod
    def plateau(cls, height: float, half_width: float, center: float = 0.0) -> "InitialDatum":
        return cls(DatumKind.PLATEAU, height, half_width, center)

    @classmethod
    def custom(cls, table: Sequence[Sequence[float]]) -> "InitialDatum":
        return cls(DatumKind.CUSTOM, table=tuple(tuple(r) for r in table))

    def support(self) -> tuple[float, float]:
        if self.kind is DatumKind.CUSTOM:
            xs = [x for x, u in self.table if u != 0]
            if not xs:
                return (0.0, 0.0)
            return (min(xs), max(xs))
        return (self.center - self.half_width, self.center + self.half_width)


def sample_initial(datum: InitialDatum, grid: Grid1D) -> Field:
    x = grid.x
    if datum.kind is DatumKind.BUMP:
        s = 1.0 - ((x - datum.center) / datum.half_width) ** 2
        v = datum.height * np.maximum(s, 0.0) ** 2
    elif datum.kind is DatumKind.PLATEAU:
        dist = np.abs(x - datum.center)
        edge = np.abs(dist - datum.half_width) <= 1e-9 * grid.dx
        v = np.where(dist < datum.half_width, datum.height, 0.0)
        v[edge] = 0.5 * datum.height
    else:
        tx, tu = np.array(datum.table).T
        if np.any(np.diff(tx) <= 0):
            raise ConfigError("table x must be strictly increasing", "initial.table")
        v = np.interp(x, tx, tu, left=0.0, right=0.0)

    if np.any(v < 0) or np.any(v > 1):
        raise ConfigError("initial values must lie in [0, 1]", "initial")
    if not np.any(v > 0):
        raise ConfigError("initial datum vanishes identically on the grid", "initial")
    margin = grid.half_width / 4
    xs = x[v > 0]
    if xs.min() < -grid.half_width + margin or xs.max() > grid.half_width - margin:
        raise ConfigError(
            f"support [{xs.min():g}, {xs.max():g}] closer than {margin:g} to the boundary",
            "initial",
        )
    return Field(grid, v)


# --- scenario ------------------------------------------------------------


class Scheme(str, enum.Enum):
    IMEX_CN = "imex_cn"
    EXPLICIT = "explicit"


class ConvectionLimiter(str, enum.Enum):
    CENTERED = "centered"
    UPWIND = "upwind"


@dataclass(frozen=True)
class ScalarProblem:
    schedule: ThresholdSchedule


@dataclass(frozen=True)
class CoupledProblem:
    pass


@dataclass(frozen=True)
class DirichletProblem:
    theta0: float


Problem = ScalarProblem | CoupledProblem | DirichletProblem

OUTPUT_KINDS = ("diagnostics", "snapshots", "plotdata")


def dt_max(grid: Grid1D, scheme: Scheme) -> float:
    """Largest admissible step for the diffusion part of ``scheme``."""
    if Scheme(scheme) is Scheme.EXPLICIT:
        return 0.4 * grid.dx**2
    # keeps the explicit half of Crank-Nicolson monotone
    return grid.dx**2


@dataclass(frozen=True)
class ScenarioConfig:
    grid: Grid1D
    initial_u: InitialDatum
    t_end: float
    dt: float
    params: CoupledParams = field(default_factory=CoupledParams)
    record_every: int = 50
    outputs: tuple[str, ...] = OUTPUT_KINDS
    problem: Problem = field(default_factory=CoupledProblem)
    scheme: Scheme = Scheme.IMEX_CN
    convection: ConvectionLimiter = ConvectionLimiter.UPWIND

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "convection", ConvectionLimiter(self.convection))
        if self.t_end < 0:
            raise ConfigError("must be >= 0", "run.t_end")
        if not 0 < self.dt <= dt_max(self.grid, self.scheme) * (1 + 1e-12):
            raise ConfigError(
                f"dt={self.dt} outside (0, {dt_max(self.grid, self.scheme):g}] for {self.scheme.value}",
                "run.dt",
            )
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError("must be a positive integer", "run.record_every")
        for kind in self.outputs:
            if kind not in OUTPUT_KINDS:
                raise ConfigError(f"unknown output {kind!r}", "run.outputs")
        if isinstance(self.problem, CoupledProblem) and self.grid.boundary is not Boundary.NEUMANN:
            raise ConfigError("the coupled system runs on zero-flux grids only", "grid.boundary")
        if isinstance(self.problem, DirichletProblem) and self.grid.boundary is not Boundary.DIRICHLET:
            raise ConfigError("the Dirichlet problem needs a dirichlet grid", "grid.boundary")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


_SCHEMA: dict[str, dict[str, Any]] = {
    "grid": {"half_width": 150.0, "n_cells": 1200, "boundary": "neumann"},
    "params": {"epsilon": DEFAULT_EPSILON, "a0": None, "a0_squared": 0.3, "u_floor": 1e-10},
    "initial": {"kind": "bump", "height": 0.2, "half_width": 5.0, "center": 0.0, "table": None},
    "run": {
        "problem": "coupled",
        "t_end": 300.0,
        "dt": 0.02,
        "record_every": 50,
        "scheme": "imex_cn",
        "convection": "upwind",
        "schedule": "constant",
        "theta0": 0.3,
        "decay_rate": 0.0,
        "power": 0.0,
        "outputs": list(OUTPUT_KINDS),
    },
}


def parse_scenario_text(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"unparseable scenario: {exc}") from exc


def load_scenario_dict(path: str | Path) -> dict:
    return parse_scenario_text(Path(path).read_text())


def _parse_override_value(raw: str):
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_overrides(raw: Mapping, overrides: Sequence[str]) -> dict:
    """Apply ``section.key=value`` strings on top of a parsed scenario."""
    out = {k: dict(v) for k, v in raw.items()}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        key = key.strip()
        section, _, name = key.partition(".")
        if section not in _SCHEMA or name not in _SCHEMA[section]:
            raise ConfigError("unknown setting", key)
        out.setdefault(section, {})[name] = _parse_override_value(value.strip())
    return out


def _merged(raw: Mapping) -> dict:
    merged = {}
    for section, content in raw.items():
        if section not in _SCHEMA:
            raise ConfigError("unknown section", section)
        if not isinstance(content, Mapping):
            raise ConfigError("expected a table", section)
        for name in content:
            if name not in _SCHEMA[section]:
                raise ConfigError("unknown setting", f"{section}.{name}")
    for section, defaults in _SCHEMA.items():
        merged[section] = {**defaults, **raw.get(section, {})}
    return merged


def _num(section: dict, name: str, sect: str) -> float:
    value = section[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", f"{sect}.{name}")
    return float(value)


def _enum(cls, value, key):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"{value!r} not one of {choices}", key) from None


def config_from_dict(raw: Mapping) -> ScenarioConfig:
    """Validated config from a parsed scenario; every failure names a section or key."""
    try:
        return _config_from_dict(raw)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), _guess_section(str(exc))) from exc


def _guess_section(message: str) -> str | None:
    for section, keys in _SCHEMA.items():
        for name in keys:
            if name in message:
                return f"{section}.{name}"
    return None


def _config_from_dict(raw: Mapping) -> ScenarioConfig:
    m = _merged(raw)
    g, p, i, r = m["grid"], m["params"], m["initial"], m["run"]

    grid = Grid1D(
        _num(g, "half_width", "grid"),
        int(_num(g, "n_cells", "grid")),
        _enum(Boundary, g["boundary"], "grid.boundary"),
    )

    user_params = raw.get("params", {})
    if "a0" in user_params and "a0_squared" in user_params:
        raise ConfigError("give a0 or a0_squared, not both", "params.a0")
    if user_params.get("a0") is not None:
        a0 = _num(p, "a0", "params")
    else:
        a0_sq = _num(p, "a0_squared", "params")
        if not 0 < a0_sq < 1:
            raise ConfigError("must lie in (0, 1)", "params.a0_squared")
        a0 = math.sqrt(a0_sq)
    params = CoupledParams(_num(p, "epsilon", "params"), a0, _num(p, "u_floor", "params"))

    kind = _enum(DatumKind, i["kind"], "initial.kind")
    if kind is DatumKind.CUSTOM:
        if not i.get("table"):
            raise ConfigError("custom datum needs a table", "initial.table")
        datum = InitialDatum.custom(i["table"])
    else:
        datum = InitialDatum(
            kind,
            _num(i, "height", "initial"),
            _num(i, "half_width", "initial"),
            _num(i, "center", "initial"),
        )

    problem_name = r["problem"]
    if problem_name == "coupled":
        problem: Problem = CoupledProblem()
    elif problem_name == "scalar":
        sk = _enum(ScheduleKind, r["schedule"], "run.schedule")
        problem = ScalarProblem(
            ThresholdSchedule(sk, _num(r, "theta0", "run"), _num(r, "decay_rate", "run"), _num(r, "power", "run"))
        )
    elif problem_name == "dirichlet":
        th = _num(r, "theta0", "run")
        if not 0 < th < 1:
            raise ConfigError("must lie in (0, 1)", "run.theta0")
        problem = DirichletProblem(th)
    else:
        raise ConfigError(f"{problem_name!r} not one of coupled, scalar, dirichlet", "run.problem")

    outputs = r["outputs"]
    if isinstance(outputs, str) or not isinstance(outputs, Sequence):
        raise ConfigError("expected a list", "run.outputs")
    record_every = _num(r, "record_every", "run")
    if record_every != int(record_every):
        raise ConfigError("must be a positive integer", "run.record_every")

    return ScenarioConfig(
        grid=grid,
        params=params,
        initial_u=datum,
        t_end=_num(r, "t_end", "run"),
        dt=_num(r, "dt", "run"),
        record_every=int(record_every),
        outputs=tuple(outputs),
        problem=problem,
        scheme=_enum(Scheme, r["scheme"], "run.scheme"),
        convection=_enum(ConvectionLimiter, r["convection"], "run.convection"),
    )


def load_scenario(path: str | Path, overrides: Sequence[str] = ()) -> ScenarioConfig:
    return config_from_dict(apply_overrides(load_scenario_dict(path), overrides))


def config_hash(raw: Mapping) -> str:
    canon = json.dumps(_merged(raw), sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
