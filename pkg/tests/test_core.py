import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from evorescue.core import (
    Boundary,
    ConfigError,
    CoupledParams,
    DomainError,
    Field,
    Grid1D,
    InitialDatum,
    Scheme,
    ThresholdSchedule,
    apply_overrides,
    config_from_dict,
    config_hash,
    dt_max,
    parse_scenario_text,
    sample_initial,
    theta_at,
    theta_integral,
)

schedules = st.one_of(
    st.builds(ThresholdSchedule.constant, st.floats(0.01, 0.95)),
    st.builds(ThresholdSchedule.exponential, st.floats(0.01, 0.95), st.floats(0.0, 2.0)),
    st.builds(ThresholdSchedule.power_law, st.floats(0.01, 0.95), st.floats(0.0, 3.0)),
)


class TestGrid:
    def test_nodes(self):
        g = Grid1D(10.0, 20)
        assert g.dx == 1.0
        assert g.n_nodes == 21
        assert g.x[0] == -10.0 and g.x[-1] == 10.0
        assert np.allclose(np.diff(g.x), 1.0)

    @pytest.mark.parametrize("cells", [0, 7, -3])
    def test_too_few_cells(self, cells):
        with pytest.raises(ValueError):
            Grid1D(10.0, cells)

    def test_from_spacing(self):
        g = Grid1D.from_spacing(150.0, 0.25)
        assert g.n_cells == 1200

    def test_field_is_read_only_copy(self):
        g = Grid1D(10.0, 20)
        vals = np.zeros(21)
        f = Field(g, vals)
        vals[3] = 1.0
        assert f.values[3] == 0.0
        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_field_rejects_nonfinite_and_bad_length(self):
        g = Grid1D(10.0, 20)
        with pytest.raises(ValueError):
            Field(g, np.full(21, np.nan))
        with pytest.raises(ValueError):
            Field(g, np.zeros(20))


class TestSchedules:
    def test_constant(self):
        assert theta_at(ThresholdSchedule.constant(0.3), 17.0) == 0.3

    def test_exponential_values(self):
        s = ThresholdSchedule.exponential(0.3, 0.1)
        assert theta_at(s, 0.0) == 0.3
        assert theta_at(s, 10.0) == pytest.approx(0.110364, abs=1e-6)

    def test_closed_form_integrals(self):
        assert theta_integral(ThresholdSchedule.exponential(0.3, 0.1), math.inf) == pytest.approx(3.0, rel=1e-15)
        assert theta_integral(ThresholdSchedule.constant(0.3), 10.0) == pytest.approx(3.0, rel=1e-15)
        assert theta_integral(ThresholdSchedule.power_law(0.5, 2.0), math.inf) == pytest.approx(0.5, rel=1e-15)

    @pytest.mark.parametrize(
        "sched, integrable",
        [
            (ThresholdSchedule.exponential(0.3, 0.1), True),
            (ThresholdSchedule.power_law(0.3, 2.0), True),
            (ThresholdSchedule.power_law(0.3, 1.0), False),
            (ThresholdSchedule.power_law(0.3, 0.5), False),
            (ThresholdSchedule.constant(0.3), False),
            (ThresholdSchedule.constant(0.0), True),
        ],
    )
    def test_integrable_flag(self, sched, integrable):
        assert sched.integrable is integrable
        if not integrable:
            with pytest.raises(DomainError):
                theta_integral(sched, math.inf)

    def test_invalid_theta0(self):
        with pytest.raises(ValueError):
            ThresholdSchedule.constant(1.0)
        with pytest.raises(ValueError):
            ThresholdSchedule.exponential(-0.1, 1.0)

    @given(schedules, st.floats(0, 1e4), st.floats(0, 1e4))
    def test_monotone(self, sched, s, t):
        lo, hi = min(s, t), max(s, t)
        assert theta_at(sched, hi) <= theta_at(sched, lo)
        assert 0 <= theta_at(sched, hi) < 1

    @given(schedules, st.floats(0.0, 1e4))
    def test_integral_matches_quadrature(self, sched, t):
        # geometric panels so fast exponential decay near 0 is never undersampled
        edges = [0.0] + [e for e in np.geomspace(1e-3, 1e4, 22) if e < t] + [t]
        quad = math.fsum(
            integrate.quad(lambda s: theta_at(sched, s), a, b, epsabs=0.0, epsrel=1e-13, limit=200)[0]
            for a, b in zip(edges, edges[1:])
        )
        closed = theta_integral(sched, t)
        assert closed == pytest.approx(quad, rel=1e-10, abs=1e-300)

    def test_integral_tiny_arguments(self):
        tiny = 1.221110054687402e-282
        assert theta_integral(ThresholdSchedule.exponential(0.5, tiny), tiny) == pytest.approx(0.5 * tiny, rel=1e-15)
        assert theta_integral(ThresholdSchedule.power_law(0.5, 3.0), tiny) == pytest.approx(0.5 * tiny, rel=1e-15)
        assert theta_integral(ThresholdSchedule.power_law(0.5, 1.0), 1e3) == pytest.approx(0.5 * math.log(1001.0))

    def test_vectorised(self):
        s = ThresholdSchedule.power_law(0.3, 2.0)
        t = np.array([0.0, 1.0, 3.0])
        assert np.allclose(s.at(t), 0.3 / (1 + t) ** 2)


class TestInitialData:
    def test_plateau(self):
        g = Grid1D(100.0, 800)
        u = sample_initial(InitialDatum.plateau(0.65, 10.0), g)
        x = g.x
        v = np.asarray(u.values)
        assert np.all(v[np.abs(x) < 10] == 0.65)
        assert np.all(v[np.abs(x) > 10] == 0.0)

    def test_bump(self):
        g = Grid1D(150.0, 1200)
        u = np.asarray(sample_initial(InitialDatum.bump(0.2, 5.0), g).values)
        assert u.max() == 0.2 and u[g.x == 0.0][0] == 0.2
        assert np.all(u[np.abs(g.x) >= 5] == 0.0)

    def test_zero_custom_rejected(self):
        with pytest.raises(ValueError):
            sample_initial(InitialDatum.custom([[-1.0, 0.0], [1.0, 0.0]]), Grid1D(10.0, 40))

    def test_custom_interpolates(self):
        g = Grid1D(10.0, 40)
        u = sample_initial(InitialDatum.custom([[-1.0, 0.0], [0.0, 0.5], [1.0, 0.0]]), g)
        assert u.values[g.x.tolist().index(0.0)] == 0.5
        assert u.values[g.x.tolist().index(0.5)] == 0.25

    def test_boundary_margin(self):
        with pytest.raises(ConfigError):
            sample_initial(InitialDatum.bump(0.2, 5.0, 140.0), Grid1D(150.0, 1200))

    @pytest.mark.parametrize("h", [0.0, 1.5, -0.2])
    def test_height_range(self, h):
        with pytest.raises(ValueError):
            InitialDatum.bump(h, 5.0)

    @given(
        st.sampled_from(["bump", "plateau"]),
        st.floats(0.01, 1.0),
        st.floats(0.5, 30.0),
        st.floats(-50.0, 50.0),
    )
    def test_sampled_values_in_range(self, kind, h, ell, c):
        g = Grid1D(150.0, 1200)
        datum = getattr(InitialDatum, kind)(h, ell, c)
        v = np.asarray(sample_initial(datum, g).values)
        assert v.min() >= 0 and v.max() <= 1
        assert np.any(v > 0)


class TestParams:
    def test_defaults(self):
        p = CoupledParams()
        assert p.epsilon == 0.05 and p.a0 ** 2 == pytest.approx(0.3)

    @pytest.mark.parametrize("kw", [{"epsilon": -1.0}, {"a0": 1.0}, {"a0": 0.0}, {"u_floor": 0.0}])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            CoupledParams(**kw)


class TestScenario:
    TEXT = """
[grid]
half_width = 150.0
n_cells = 1200
[params]
epsilon = 0.05
a0_squared = 0.3
[initial]
kind = "bump"
height = 0.2
half_width = 5.0
[run]
problem = "coupled"
t_end = 10.0
dt = 0.02
"""

    def test_roundtrip(self):
        cfg = config_from_dict(parse_scenario_text(self.TEXT))
        assert cfg.grid.dx == 0.25
        assert cfg.params.a0 == pytest.approx(math.sqrt(0.3))
        assert cfg.n_steps == 500

    def test_unknown_key_is_hard_error(self):
        raw = parse_scenario_text(self.TEXT + "bogus = 1\n")
        with pytest.raises(ConfigError) as exc:
            config_from_dict(raw)
        assert exc.value.key == "run.bogus"

    def test_unknown_section(self):
        with pytest.raises(ConfigError) as exc:
            config_from_dict({"extra": {"a": 1}})
        assert exc.value.key == "extra"

    def test_overrides(self):
        raw = apply_overrides(parse_scenario_text(self.TEXT), ["params.epsilon=0", 'run.problem="scalar"'])
        cfg = config_from_dict(raw)
        assert cfg.params.epsilon == 0.0
        with pytest.raises(ConfigError) as exc:
            apply_overrides(raw, ["params.epsilno=0"])
        assert exc.value.key == "params.epsilno"

    def test_dt_contract(self):
        raw = apply_overrides(parse_scenario_text(self.TEXT), ["run.dt=0.1"])
        with pytest.raises(ConfigError) as exc:
            config_from_dict(raw)
        assert exc.value.key == "run.dt"
        g = Grid1D(150.0, 1200)
        assert dt_max(g, Scheme.EXPLICIT) == pytest.approx(0.4 * 0.0625)

    def test_coupled_needs_neumann(self):
        raw = apply_overrides(parse_scenario_text(self.TEXT), ['grid.boundary="dirichlet"'])
        with pytest.raises(ConfigError) as exc:
            config_from_dict(raw)
        assert exc.value.key == "grid.boundary"

    def test_hash_stable(self):
        raw = parse_scenario_text(self.TEXT)
        assert config_hash(raw) == config_hash(parse_scenario_text(self.TEXT))
        assert config_hash(raw) != config_hash(apply_overrides(raw, ["params.epsilon=0.1"]))
        # defaults filled in: an explicit default does not change the hash
        assert config_hash(raw) == config_hash(apply_overrides(raw, ["run.record_every=50"]))

    def test_shipped_scenarios_parse(self):
        from pathlib import Path

        from evorescue.core import load_scenario

        for path in sorted((Path(__file__).parent.parent / "scenarios").glob("*.toml")):
            load_scenario(path)
