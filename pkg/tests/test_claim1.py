import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evorescue.analysis import claim1_profile, claim1_scan, cubic_term_limit, cutoff
from evorescue.analysis.claim1 import DEFAULT_LADDER
from evorescue.analysis.heat import HeatSolution
from evorescue.core import DomainError, Field, Grid1D, InitialDatum, ThresholdSchedule, sample_initial

GRID = Grid1D(150.0, 1200)
BUMP = sample_initial(InitialDatum.bump(0.2, 5.0), GRID)
DECAY = ThresholdSchedule.exponential(0.3, 0.1)

# limits along the ladder, from mpmath quadrature of the continuous profile with
# w replaced by alpha * Gamma; per unit alpha^2 Theta^2 and alpha^3 Theta^3:
#   t^(3/2) E^d -> K_D alpha^2 Theta^2,   t E^r -> -K_R alpha^3 Theta^3
K_D = 0.194966537348065839
K_R = 0.00896990999493113279
CUBIC_UNIT = 0.0211208873877967977


@given(st.floats(-3, 3))
def test_cutoff_shape(s):
    c = cutoff(s)
    assert 0 <= c <= 1
    if abs(s) <= 0.5:
        assert c == 1
    if abs(s) >= 1:
        assert c == 0


def test_cutoff_c2_seams():
    # one-sided second differences; both sides must vanish at each seam
    h = 1e-5
    for s0 in (0.5, 1.0):
        left = (cutoff(s0 - h) - 2 * cutoff(s0 - 2 * h) + cutoff(s0 - 3 * h)) / h ** 2
        right = (cutoff(s0 + 3 * h) - 2 * cutoff(s0 + 2 * h) + cutoff(s0 + h)) / h ** 2
        assert abs(left) < 0.05 and abs(right) < 0.05


def test_profile_endpoints_and_centre():
    t = 1e4
    z = claim1_profile(t, BUMP, DECAY)
    assert z.grid.half_width == pytest.approx(100.0)
    assert z.values[0] == 0.0 and z.values[-1] == 0.0
    w0 = HeatSolution(BUMP).evaluate(t, [0.0])[0]
    mid = z.grid.n_cells // 2
    assert z.values[mid] == pytest.approx(math.exp(-3.0) * w0, rel=1e-14)


def test_profile_refuses_non_integrable():
    with pytest.raises(DomainError):
        claim1_profile(1e4, BUMP, ThresholdSchedule.constant(0.3))
    with pytest.raises(DomainError):
        claim1_scan(BUMP, ThresholdSchedule.power_law(0.3, 1.0))


def test_profile_needs_large_t():
    with pytest.raises(DomainError):
        claim1_profile(100.0, BUMP, DECAY)


def test_cubic_limit_constant():
    assert cubic_term_limit(1.0) == pytest.approx(CUBIC_UNIT, rel=1e-13)


def test_scan_default_ladder():
    rep = claim1_scan(BUMP, DECAY)
    assert rep.skipped == [100.0, pytest.approx(10 ** 2.5)]
    assert rep.times == pytest.approx([10 ** k for k in (3, 3.5, 4, 4.5, 5)])
    theta2 = math.exp(-6.0)
    assert rep.dirichlet_scaled[-1] == pytest.approx(K_D * rep.alpha ** 2 * theta2, rel=1e-3)
    assert rep.reaction_scaled[-1] == pytest.approx(-K_R * rep.alpha ** 3 * math.exp(-9.0), rel=1e-3)
    assert all(r <= 1.5 for r in rep.dirichlet_ratios())
    # cubic term converges to its limit within 5% by t = 1e5
    assert rep.cubic_scaled[-1] == pytest.approx(rep.cubic_limit, rel=0.05)
    # decreasing toward the sign change
    assert all(b < a for a, b in zip(rep.scaled_energies, rep.scaled_energies[1:]))


def test_scan_turns_negative_past_default_ladder():
    """Sign change predicted by the constants: t* = (K_D / (K_R alpha Theta))^2 ~ 1.7e5."""
    ladder = list(DEFAULT_LADDER) + [10 ** 5.5, 1e6]
    rep = claim1_scan(BUMP, DECAY, ladder)
    t_star = (K_D / (K_R * rep.alpha * math.exp(-3.0))) ** 2
    assert 1e5 < t_star < 10 ** 5.5
    assert rep.first_negative_t == pytest.approx(10 ** 5.5)


def test_more_mass_more_negative():
    big = Field(GRID, 10 * np.asarray(BUMP.values))
    a = claim1_scan(BUMP, DECAY, [1e4, 1e5])
    b = claim1_scan(big, DECAY, [1e4, 1e5])
    assert all(y < x for x, y in zip(a.scaled_energies, b.scaled_energies))
    assert b.first_negative_t is not None


def test_ladder_must_increase():
    with pytest.raises(ValueError):
        claim1_scan(BUMP, DECAY, [1e4, 1e3])
