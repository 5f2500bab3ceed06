import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracburgers.blowup import (
    WindowPlan,
    default_guess,
    estimate_blowup_time,
    fit_start_time,
    fit_window,
    limit_blowup_alpha_zero,
    limit_blowup_inviscid,
    sliding_estimate,
    thin_series,
)
from fracburgers.errors import ConfigurationError


def power_law(t, c, gamma, t_star):
    return c * (t_star - t) ** gamma


def test_limits_for_sine_data():
    # inf g' = -1 for g = sin
    assert limit_blowup_inviscid(-1.0) == 1.0
    assert limit_blowup_alpha_zero(0.11, -1.0) == pytest.approx(-math.log(0.89) / 0.11)
    assert limit_blowup_alpha_zero(0.11, -1.0) == pytest.approx(1.0594, abs=5e-5)
    assert limit_blowup_inviscid(0.5) is None
    assert limit_blowup_alpha_zero(2.0, -1.0) is None
    with pytest.raises(ConfigurationError):
        limit_blowup_alpha_zero(0.0, -1.0)


def test_alpha_zero_limit_tends_to_inviscid():
    assert limit_blowup_alpha_zero(1e-8, -1.0) == pytest.approx(1.0, rel=1e-7)


def test_window_plan():
    wins = WindowPlan(50, 10).windows(200)
    assert wins[-1] == slice(150, 200)
    assert wins[0] == slice(0, 50)
    assert all(w.stop - w.start == 50 for w in wins)
    assert WindowPlan(50, 10, count=3).windows(200) == [slice(130, 180), slice(140, 190),
                                                         slice(150, 200)]
    with pytest.raises(ConfigurationError):
        WindowPlan(50, 10).windows(40)
    with pytest.raises(ConfigurationError):
        WindowPlan(50, 10, count=30).windows(200)
    with pytest.raises(ConfigurationError):
        WindowPlan(2, 1)


@settings(max_examples=25)
@given(st.floats(0.1, 100.0), st.floats(-2.0, -0.2), st.floats(0.8, 1.5))
def test_exact_diverging_data_recovered_in_every_window(c, gamma, t_star):
    t = np.linspace(0.5, t_star - 0.02, 200)
    fits = sliding_estimate(t, power_law(t, c, gamma, t_star), WindowPlan(50, 10))
    for f in fits:
        assert f.t_star == pytest.approx(t_star, abs=1e-6)
        assert f.gamma == pytest.approx(gamma, abs=1e-6)
        assert f.c == pytest.approx(c, rel=1e-6)


@settings(max_examples=15)
@given(st.floats(0.1, 10.0), st.floats(0.5, 2.0), st.floats(0.8, 1.5))
def test_exact_vanishing_data_recovered(c, gamma, t_star):
    t = np.linspace(0.5, t_star - 0.02, 150)
    fit = sliding_estimate(t, power_law(t, c, gamma, t_star), quantity="delta")[-1]
    assert fit.t_star == pytest.approx(t_star, abs=1e-6)
    assert fit.gamma == pytest.approx(gamma, abs=1e-6)


def test_noisy_data_recovers_t_star():
    rng = np.random.default_rng(0)
    t = np.linspace(0.6, 1.08, 400)
    y = power_law(t, 7.0, -0.6, 1.13) * (1 + 0.01 * rng.standard_normal(t.size))
    assert estimate_blowup_time(t, y) == pytest.approx(1.13, abs=1e-2)


def test_fit_window_input_checks():
    t = np.linspace(0, 1, 10)
    y = power_law(t, 1.0, -1.0, 1.5)
    with pytest.raises(ConfigurationError):
        fit_window(t, -y, (1.0, -1.0, 1.5))
    with pytest.raises(ConfigurationError):
        fit_window(t, y, (1.0, -1.0, 0.9))
    with pytest.raises(ConfigurationError):
        fit_window(t, y, (-1.0, -1.0, 1.5))
    with pytest.raises(ConfigurationError):
        sliding_estimate(t[::-1], y, WindowPlan(5, 1))


def test_exponential_growth_hits_horizon():
    # no finite-time singularity: the fit runs to the search cap
    t = np.linspace(0, 1, 60)
    fit = fit_window(t, np.exp(0.5 * t), (1.0, -1.0, 1.2))
    assert fit.at_horizon and not fit.identifiable
    assert fit.t_star <= 1.0 + 10.0 + 1e-6


def test_default_guess():
    t = np.linspace(0, 1, 11)
    assert default_guess(t, np.arange(11.0)) == (10.0, -1.0, 1.2)
    assert default_guess(t, np.arange(11.0), "delta")[1] == 1.0


def test_thin_series_keeps_last_sample():
    t = np.array([0.0, 0.0004, 0.001, 0.0011, 0.0025, 0.0031, 0.00315])
    ts, ys = thin_series(t, t * 2, 1e-3)
    assert ts[-1] == t[-1]
    assert np.all(np.diff(ts) >= 1e-3 * (1 - 1e-9))
    np.testing.assert_array_equal(ys, 2 * ts)


def test_fit_start_time():
    t = np.linspace(0, 1, 11)
    e = np.array([1, 0.9, 0.9, 1.2, 1.9, 2.0, 3, 5, 9, 20, 50.0])
    assert fit_start_time(t, e) == pytest.approx(0.5)
    with pytest.raises(ConfigurationError):
        fit_start_time(t, np.ones(11))
