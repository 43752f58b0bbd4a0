import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from evorescue.reaction import BistableEval, F, f, invasion_condition

thetas = st.floats(0.001, 0.999)


def test_roots():
    assert f(0.3, 0.0) == 0 and f(0.3, 1.0) == 0 and f(0.3, 0.3) == 0
    assert f(0.25, 0.5) == pytest.approx(0.0625, rel=1e-15)


def test_potential_values():
    assert F(0.3, 0.0) == 0
    assert F(0.5, 1.0) == pytest.approx(0.0, abs=1e-16)
    quad, _ = integrate.quad(lambda s: f(0.3, s), 0, 1, epsabs=0, epsrel=1e-13)
    assert F(0.3, 1.0) == pytest.approx(quad, rel=1e-12)
    assert F(0.3, 1.0) == pytest.approx(0.033333, abs=1e-6)


@given(thetas)
def test_potential_at_one(theta):
    assert F(theta, 1.0) == pytest.approx((1 - 2 * theta) / 12, abs=1e-15)


def test_derivative_identity():
    rng = np.random.default_rng(7)
    th = rng.uniform(0.01, 0.99, 200)
    v = rng.uniform(-0.2, 1.2, 200)
    h = 1e-5
    fd = (F(th, v + h) - F(th, v - h)) / (2 * h)
    assert np.allclose(fd, f(th, v), rtol=1e-8, atol=1e-10)


@given(thetas)
def test_linear_lower_bound_and_sign(theta):
    u = np.linspace(0, 1, 1001)
    assert np.all(f(theta, u) >= -theta * u - 1e-15)
    inner = u[(u > 0) & (u < theta)]
    outer = u[(u > theta) & (u < 1)]
    assert np.all(f(theta, inner) < 0)
    assert np.all(f(theta, outer) > 0)


@pytest.mark.parametrize("theta, expected", [(0.3, True), (0.5, False), (0.7, False), (0.49, True)])
def test_invasion_condition(theta, expected):
    assert invasion_condition(theta) is expected


@pytest.mark.parametrize("theta", [0.0, 1.0, -0.5, 1.5])
def test_invasion_condition_domain(theta):
    with pytest.raises(ValueError):
        invasion_condition(theta)


def test_bistable_eval():
    b = BistableEval(0.3)
    assert b(0.5) == f(0.3, 0.5)
    assert b.potential(1.0) == F(0.3, 1.0)
    assert b.invades
    with pytest.raises(ValueError):
        BistableEval(1.2)
