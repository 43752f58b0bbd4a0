import numpy as np
import pytest

from evorescue.analysis import Classification, DiagnosticsTable, classify, comparison_bound_check, front_positions
from evorescue.analysis.outcome import Snapshot, speed_estimate
from evorescue.core import (
    Field,
    Grid1D,
    InitialDatum,
    ScalarProblem,
    ScenarioConfig,
    ThresholdSchedule,
    sample_initial,
)
from evorescue.experiments import persistence_witness, WitnessNotFound
from evorescue.solver import run

GRID = Grid1D(150.0, 1200)


def _rows(ts, max_u, core, right, left):
    return DiagnosticsTable.from_rows(
        [
            {"t": t, "max_u": m, "min_u": 0.0, "mass_u": 0.0, "core_min_u": c, "front_right": r, "front_left": l}
            for t, m, c, r, l in zip(ts, max_u, core, right, left)
        ]
    )


class TestFronts:
    def test_plateau(self):
        u = sample_initial(InitialDatum.plateau(1.0, 10.0), Grid1D(100.0, 800))
        assert front_positions(u) == pytest.approx((-10.0, 10.0))

    def test_zero(self):
        assert front_positions(Field(GRID, np.zeros(GRID.n_nodes))) is None

    def test_symmetric(self):
        u = sample_initial(InitialDatum.bump(0.9, 7.3), GRID)
        xl, xr = front_positions(u)
        assert abs(xl + xr) <= GRID.dx

    def test_level_range(self):
        with pytest.raises(ValueError):
            front_positions(Field(GRID, np.zeros(GRID.n_nodes)), 1.0)


class TestClassify:
    ts = np.linspace(0, 100, 11)

    def test_all_zero_extinct(self):
        nan = [np.nan] * 11
        assert classify(_rows(self.ts, [0.0] * 11, [0.0] * 11, nan, nan), GRID) is Classification.EXTINCT

    def test_invading(self):
        right = np.linspace(5, 60, 11)
        s = _rows(self.ts, [1.0] * 11, [0.995] * 11, right, -right)
        assert classify(s, GRID) is Classification.INVADING

    def test_retreating_front_not_invading(self):
        right = np.linspace(60, 30, 11)
        s = _rows(self.ts, [1.0] * 11, [0.995] * 11, right, -right)
        assert classify(s, GRID) is Classification.PERSISTENT

    def test_undecided(self):
        nan = [np.nan] * 11
        s = _rows(self.ts, [0.2] * 11, [0.1] * 11, nan, nan)
        assert classify(s, GRID) is Classification.UNDECIDED

    @pytest.mark.parametrize("shift", [0.0, 20.0, -35.0])
    def test_reflection_invariance(self, shift):
        right = shift + np.linspace(5, 60, 11)
        left = shift - np.linspace(5, 30, 11)
        s = _rows(self.ts, [1.0] * 11, [0.995] * 11, right, left)
        assert classify(s, GRID) is classify(s.reflected(), GRID)

    def test_reflection_on_real_run(self):
        cfg = ScenarioConfig(
            GRID, InitialDatum.plateau(0.65, 8.0, 12.0), 150.0, 0.02,
            problem=ScalarProblem(ThresholdSchedule.constant(0.3)),
        )
        out = run(cfg, keep_snapshots=False)
        assert classify(out.series, GRID) is classify(out.series.reflected(), GRID) is Classification.INVADING
        assert out.speed_estimate == pytest.approx(np.sqrt(2) * 0.2, rel=0.05)

    def test_speed_needs_rows(self):
        nan = [np.nan] * 2
        assert speed_estimate(_rows([0, 1], [0, 0], [0, 0], nan, nan), GRID) is None


class TestComparisonBound:
    @pytest.fixture(scope="class")
    @staticmethod
    def decaying():
        sched = ThresholdSchedule.exponential(0.3, 0.1)
        cfg = ScenarioConfig(GRID, InitialDatum.bump(0.05, 3.0), 100.0, 0.02, problem=ScalarProblem(sched))
        return run(cfg), sched

    def test_no_violations(self, decaying):
        out, sched = decaying
        rep = comparison_bound_check(out, sched, t_max=100.0)
        assert rep.ok and len(rep.checked_times) == 100

    def test_zero_threshold(self):
        sched = ThresholdSchedule.constant(0.0)
        cfg = ScenarioConfig(GRID, InitialDatum.bump(0.3, 5.0), 50.0, 0.02, problem=ScalarProblem(sched))
        rep = comparison_bound_check(run(cfg), sched)
        assert rep.ok

    def test_scaled_down_flagged(self, decaying):
        out, sched = decaying
        halved = [out.snapshots[0]] + [Snapshot(s.t, 0.5 * s.u) for s in out.snapshots[1:]]
        rep = comparison_bound_check(halved, sched, grid=GRID)
        assert not rep.ok


class TestWitness:
    def test_invading_origin(self):
        cfg = ScenarioConfig(
            GRID, InitialDatum.plateau(0.65, 8.0), 120.0, 0.02,
            problem=ScalarProblem(ThresholdSchedule.constant(0.3)),
        )
        w = persistence_witness(run(cfg))
        assert w.x0 == 0.0 and w.times[-1] == 120.0

    def test_extinct_raises(self):
        cfg = ScenarioConfig(
            GRID, InitialDatum.bump(0.2, 3.0), 100.0, 0.02,
            problem=ScalarProblem(ThresholdSchedule.constant(0.3)),
        )
        with pytest.raises(WitnessNotFound):
            persistence_witness(run(cfg))

    def test_dirichlet_negative_energy(self):
        from evorescue.core import DirichletProblem

        g = Grid1D(50.0, 400, "dirichlet")
        cfg = ScenarioConfig(g, InitialDatum.bump(1.0, 20.0), 200.0, 0.02, problem=DirichletProblem(0.3))
        w = persistence_witness(run(cfg))
        assert -50 < w.x0 < 50
