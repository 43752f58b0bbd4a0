import numpy as np
import pytest

from evorescue.analysis import energy, energy_decay_check
from evorescue.core import (
    DirichletProblem,
    Field,
    Grid1D,
    InitialDatum,
    ScenarioConfig,
    sample_initial,
)
from evorescue.reaction import F
from evorescue.solver import run

GRID = Grid1D(50.0, 400, boundary="dirichlet")


def test_zero():
    e = energy(Field(GRID, np.zeros(GRID.n_nodes)), 0.3)
    assert (e.dirichlet_part, e.reaction_part, e.total) == (0.0, 0.0, 0.0)


def test_total_is_sum():
    v = sample_initial(InitialDatum.bump(0.9, 15.0), GRID)
    e = energy(v, 0.3)
    assert e.total == e.dirichlet_part + e.reaction_part
    assert e.R == 50.0 and e.theta0 == 0.3


def test_bulk_at_one_has_negative_reaction():
    x = GRID.x
    v = np.clip(1.3 * np.cos(np.pi * x / 100.0), 0, 1)
    v[0] = v[-1] = 0.0
    e = energy(Field(GRID, v), 0.3)
    assert e.reaction_part < 0
    # quadrature oracle on a finer grid
    fine = np.linspace(-50, 50, 200001)
    vf = np.clip(1.3 * np.cos(np.pi * fine / 100.0), 0, 1)
    assert e.reaction_part == pytest.approx(-np.trapezoid(F(0.3, vf), fine), rel=1e-3)


def test_tiny_bump_positive():
    v = sample_initial(InitialDatum.bump(1e-4, 10.0), GRID)
    e = energy(v, 0.3)
    assert e.reaction_part > 0 and e.total > 0


def test_gradient_part_against_exact():
    x = GRID.x
    v = 0.5 * np.cos(np.pi * x / 100.0)
    v[0] = v[-1] = 0.0
    exact = 0.5 * 0.25 * (np.pi / 100.0) ** 2 * 50.0
    assert energy(Field(GRID, v), 0.3).dirichlet_part == pytest.approx(exact, rel=1e-4)


def test_requires_dirichlet():
    with pytest.raises(ValueError):
        energy(Field(Grid1D(50.0, 400), np.zeros(401)), 0.3)


def _trajectory():
    cfg = ScenarioConfig(
        GRID, InitialDatum.bump(1.0, 20.0), 100.0, 0.02, record_every=10, problem=DirichletProblem(0.3)
    )
    out = run(cfg)
    return [(s.t, Field(GRID, s.u)) for s in out.snapshots]


def test_decay_on_run():
    traj = _trajectory()
    assert energy(traj[0][1], 0.3).total < 0
    rep = energy_decay_check(traj, 0.3)
    assert rep.monotone
    assert rep.total_decay > 0
    assert rep.identity and not rep.identity_mismatches


def test_stationary_zero_trajectory():
    z = Field(GRID, np.zeros(GRID.n_nodes))
    rep = energy_decay_check([(0.0, z), (1.0, z), (2.0, z)], 0.3)
    assert rep.monotone and rep.total_decay == 0.0


def test_permuted_snapshots_flagged():
    traj = _trajectory()
    rep = energy_decay_check(list(reversed(traj)), 0.3)
    assert not rep.monotone
