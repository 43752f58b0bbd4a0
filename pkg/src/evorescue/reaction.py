"""Cubic bistable nonlinearity u(u - theta)(1 - u) and its potential."""

from __future__ import annotations

from dataclasses import dataclass


def f(theta, u):
    return u * (u - theta) * (1.0 - u)


def F(theta, v):
    """Antiderivative of ``f(theta, .)`` vanishing at 0."""
    return -0.25 * v**4 + (1.0 + theta) / 3.0 * v**3 - 0.5 * theta * v**2


def invasion_condition(theta: float) -> bool:
    """True when the potential gap F(theta, 1) = (1 - 2 theta)/12 is positive."""
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta={theta} outside (0, 1)")
    return F(theta, 1.0) > 0.0


@dataclass(frozen=True)
class BistableEval:
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta={self.theta} outside (0, 1)")

    def __call__(self, u):
        return f(self.theta, u)

    def potential(self, v):
        return F(self.theta, v)

    @property
    def invades(self) -> bool:
        return invasion_condition(self.theta)
