"""One-dimensional bistable reaction-diffusion with an evolving Allee threshold."""

from .core import (
    Boundary,
    ConfigError,
    CoupledParams,
    CoupledProblem,
    DirichletProblem,
    Field,
    Grid1D,
    InitialDatum,
    ScalarProblem,
    ScenarioConfig,
    ThresholdSchedule,
    load_scenario,
    sample_initial,
    theta_at,
    theta_integral,
)
from .reaction import F, f, invasion_condition

__version__ = "0.1.0"
