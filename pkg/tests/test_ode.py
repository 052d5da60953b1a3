import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqed.ode import B4, B5, StepperStalled, integrate, ode_step


def test_tableau_weights_are_consistent():
    assert sum(B5) == pytest.approx(1.0, abs=1e-15)
    assert sum(B4) == pytest.approx(1.0, abs=1e-15)


def test_zero_derivative_keeps_state_and_accepts_proposal():
    y0 = np.array([1 + 2j, -3j])
    y, t, used, nxt = ode_step(lambda t, y: np.zeros_like(y), y0, 0.5, 0.25, 1e-8)
    np.testing.assert_array_equal(y, y0)
    assert (t, used) == (0.75, 0.25)
    assert nxt >= used


def test_exponential_decay():
    y, _ = integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.0, eps=1e-8)
    assert abs(y[0] - math.exp(-1)) < 1e-7


def test_rotation_keeps_radius():
    y, steps = integrate(lambda t, y: np.array([-y[1], y[0]]), np.array([1.0, 0.0]), 0.0, 10.0,
                         eps=1e-8)
    assert abs(np.hypot(*y) - 1) < 1e-7
    np.testing.assert_allclose(y, [math.cos(10), math.sin(10)], atol=1e-6)
    assert steps > 1


def test_complex_oscillation():
    y, _ = integrate(lambda t, y: 1j * y, np.array([1 + 0j]), 0.0, 3.0, eps=1e-10)
    assert abs(y[0] - np.exp(3j)) < 1e-8


def test_used_step_never_exceeds_proposal():
    y = np.array([1.0])
    t, dt = 0.0, 5.0
    for _ in range(20):
        y, t, used, nxt = ode_step(lambda t, y: -50 * y * np.cos(t), y, t, dt, 1e-6)
        assert used <= dt
        dt = nxt


def test_stalled_stepper_raises():
    with pytest.raises(StepperStalled, match="stepper stalled"):
        ode_step(lambda t, y: np.full_like(y, np.nan), np.array([1.0]), 0.0, 1.0, 1e-8)
    with pytest.raises(ValueError):
        ode_step(lambda t, y: y, np.array([1.0]), 0.0, 0.0, 1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 2.0))
def test_linear_decay_property(rate, horizon):
    y, _ = integrate(lambda t, y: -rate * y, np.array([1.0]), 0.0, horizon, eps=1e-9)
    assert y[0] == pytest.approx(math.exp(-rate * horizon), rel=1e-7)


def test_landing_is_exact():
    times = []

    def f(t, y):
        times.append(t)
        return -y

    y, _ = integrate(f, np.array([1.0]), 0.0, 0.3, eps=1e-10, dt0=0.07)
    assert max(times) <= 0.3
    assert y[0] == pytest.approx(math.exp(-0.3), rel=1e-9)
