import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracburgers.deterministic import SolverConfig, run_deterministic
from fracburgers.errors import ConfigurationError
from fracburgers.spectral import GridSpec, SpectralField
from fracburgers.stats import (
    bootstrap_ci,
    extract_outcome,
    histogram_pdf,
    jensen_check,
    joint_pdf,
    loglog_slope,
    moments,
    powerlaw_fit,
    running_errors,
    running_moments,
)

REFERENCE_ROWS = [
    (0.233, 0.792, 0.0),
    (3.136, 1.984, 0.0),
    (12.888, 1.128, -0.015),
    (1008.425, 2.615, 3.0),
]
RHO = np.array([1e-6, 1e-4, 1e-2, 2e-2, 5e-2])

samples_strategy = arrays(float, st.integers(5, 60),
                          elements=st.floats(-100, 100, allow_nan=False))


def test_moments_match_scipy_population_estimators():
    x = np.random.default_rng(2).gamma(2.0, size=5000)
    m = moments(x)
    assert m.mu == pytest.approx(np.mean(x), rel=1e-13)
    assert m.sigma == pytest.approx(np.std(x, ddof=0), rel=1e-13)
    assert m.skew == pytest.approx(scipy.stats.skew(x, bias=True), rel=1e-11)
    assert m.kurt == pytest.approx(scipy.stats.kurtosis(x, fisher=False, bias=True), rel=1e-11)
    assert m.m_used == 5000 and not m.degenerate


def test_moments_of_constant_samples():
    m = moments(np.full(10, 3.0))
    assert m.degenerate and m.sigma == 0.0 and m.mu == 3.0
    assert math.isnan(m.skew) and math.isnan(m.kurt)
    with pytest.raises(ConfigurationError):
        moments([1.0])


@given(samples_strategy, st.floats(0.1, 10), st.floats(-50, 50))
def test_moments_under_positive_affine_maps(x, a, b):
    m = moments(x)
    if m.degenerate or m.sigma < 1e-6 * (1 + abs(m.mu)):
        return
    y = moments(a * x + b)
    assert y.mu == pytest.approx(a * m.mu + b, rel=1e-12, abs=1e-9)
    assert y.sigma == pytest.approx(a * m.sigma, rel=1e-10)
    assert y.skew == pytest.approx(m.skew, rel=1e-8, abs=1e-9)
    assert y.kurt == pytest.approx(m.kurt, rel=1e-8)


def test_negative_scale_flips_skew_only():
    x = np.random.default_rng(0).exponential(size=100)
    m, y = moments(x), moments(-2 * x)
    assert y.sigma == pytest.approx(2 * m.sigma)
    assert y.skew == pytest.approx(-m.skew)
    assert y.kurt == pytest.approx(m.kurt)


def test_running_moments_match_direct_evaluation():
    x = np.random.default_rng(5).normal(1.1, 0.02, size=60)
    run = running_moments(x)
    for m in (2, 7, 31, 60):
        ref = moments(x[:m])
        assert run["mu"][m - 1] == pytest.approx(ref.mu, rel=1e-14)
        assert run["sigma"][m - 1] == pytest.approx(ref.sigma, rel=1e-9)
        assert run["skew"][m - 1] == pytest.approx(ref.skew, rel=1e-7, abs=1e-9)
        assert run["kurt"][m - 1] == pytest.approx(ref.kurt, rel=1e-7)


def test_running_errors_end_at_zero_and_decay():
    x = np.random.default_rng(1).standard_normal(10_000) + 2.0
    r = running_errors(x, permutations=50, seed=1)
    for name, err in r.errors.items():
        assert err[-1] == 0.0
        assert -0.7 <= loglog_slope(r.m, err) <= -0.3, name


def test_running_errors_flag_zero_reference():
    x = np.array([-1.0, 1.0] * 10)
    r = running_errors(x)
    assert r.errors["mu"] is None
    assert r.errors["sigma"] is not None


def test_bootstrap_width_matches_clt():
    x = np.random.default_rng(3).standard_normal(10_000)
    lo, hi = bootstrap_ci(x, "mu", 0.95, b=1000, seed=3)
    assert hi - lo == pytest.approx(2 * 1.96 / 100, rel=0.2)
    assert lo < 0 < hi


def test_bootstrap_is_seeded_and_validates():
    x = np.random.default_rng(0).standard_normal(200)
    assert bootstrap_ci(x, "skew", seed=4) == bootstrap_ci(x, "skew", seed=4)
    assert bootstrap_ci(np.full(20, 2.5)) == (2.5, 2.5)
    with pytest.raises(ConfigurationError):
        bootstrap_ci(x, b=10)
    with pytest.raises(ConfigurationError):
        bootstrap_ci(x, "median")
    with pytest.raises(ConfigurationError):
        bootstrap_ci(x, level=1.0)


def test_bootstrap_width_shrinks_like_inverse_sqrt():
    rng = np.random.default_rng(8)
    ms = np.array([100, 400, 1600, 6400])
    widths = []
    for m in ms:
        lo, hi = bootstrap_ci(rng.standard_normal(m), "mu", b=1000, seed=int(m))
        widths.append(hi - lo)
    slope = np.polyfit(np.log(ms), np.log(widths), 1)[0]
    assert -0.7 <= slope <= -0.3


@settings(max_examples=30)
@given(arrays(float, st.integers(2, 300), elements=st.floats(-1e3, 1e3, allow_nan=False)),
       st.one_of(st.just("auto"), st.integers(1, 50)))
def test_histogram_mass_is_one(x, bins):
    assert histogram_pdf(x, bins).mass() == pytest.approx(1.0, abs=1e-12)


def test_histogram_of_uniform_and_normal():
    rng = np.random.default_rng(6)
    u = histogram_pdf(rng.uniform(size=100_000), bins=20)
    np.testing.assert_allclose(u.density, 1.0, rtol=0.05)
    h = histogram_pdf(rng.standard_normal(100_000))
    assert np.max(np.abs(h.density - scipy.stats.norm.pdf(h.centers))) < 0.05


def test_zero_range_histogram_is_single_bin():
    h = histogram_pdf(np.full(5, 1.5))
    assert h.edges.tolist() == [1.0, 2.0] and h.density.tolist() == [1.0]
    with pytest.raises(ConfigurationError):
        histogram_pdf([1.0])


def test_joint_pdf_of_independent_samples_factorizes():
    rng = np.random.default_rng(7)
    x, y = rng.standard_normal(100_000), rng.uniform(size=100_000)
    j = joint_pdf(x, y, bins=20)
    assert j.mass() == pytest.approx(1.0, abs=1e-12)
    dx, dy = np.diff(j.x_edges), np.diff(j.y_edges)
    p = j.density * np.outer(dx, dy)
    px, py = p.sum(axis=1), p.sum(axis=0)
    nz = p > 0
    mutual_info = np.sum(p[nz] * np.log(p[nz] / np.outer(px, py)[nz]))
    assert mutual_info < 0.01


@pytest.mark.parametrize("a,b,c", REFERENCE_ROWS)
def test_powerlaw_recovers_reference_rows(a, b, c):
    fit = powerlaw_fit(RHO, a * RHO**b + c)
    assert fit.a == pytest.approx(a, rel=1e-6)
    assert fit.b == pytest.approx(b, rel=1e-6)
    assert fit.c == pytest.approx(c, abs=1e-6 * max(1.0, abs(c)))


def test_powerlaw_with_pinned_offset():
    fit = powerlaw_fit(RHO, 0.233 * RHO**0.792, fix_c=0.0)
    assert fit.c == 0.0
    assert fit.a == pytest.approx(0.233, rel=1e-10)
    assert fit.b == pytest.approx(0.792, rel=1e-10)


@settings(max_examples=25)
@given(st.floats(0.01, 100), st.floats(0.5, 3.0), st.floats(-5, 5))
def test_powerlaw_exact_on_noiseless_data(a, b, c):
    x = np.geomspace(1e-3, 1.0, 8)
    fit = powerlaw_fit(x, a * x**b + c)
    assert fit.residual < 1e-10 * max(1.0, a + abs(c))
    assert fit.b == pytest.approx(b, rel=1e-6)


def test_powerlaw_flat_data_and_errors():
    fit = powerlaw_fit(RHO, np.full(5, 1.2))
    assert abs(fit.a) < 1e-12 and fit.c == pytest.approx(1.2)
    with pytest.raises(ConfigurationError):
        powerlaw_fit([0.0, 1.0, 2.0], [1, 2, 3])
    with pytest.raises(ConfigurationError):
        powerlaw_fit([1.0, 2.0], [1, 2])


def test_jensen_identical_and_opposite_fields():
    grid = GridSpec(16)
    s = SpectralField.from_function(np.sin, grid)
    same = jensen_check([s, s, s])
    assert same.lhs == pytest.approx(same.rhs) and same.holds
    opp = jensen_check([s, s.with_coeffs(-s.coeffs)])
    assert opp.rhs == pytest.approx(0.0, abs=1e-28)
    assert opp.lhs == pytest.approx(np.pi**2)
    assert opp.holds


def test_jensen_rejects_mismatched_grids():
    a = SpectralField.from_function(np.sin, GridSpec(16))
    b = SpectralField.from_function(np.sin, GridSpec(32))
    with pytest.raises(ConfigurationError):
        jensen_check([a, b])
    with pytest.raises(ConfigurationError):
        jensen_check([a, a.with_coeffs(a.coeffs, time=1.0)])


def test_outcome_extraction_from_trajectories():
    sine = SpectralField.from_function(np.sin, GridSpec(512))
    traj = run_deterministic(SolverConfig(alpha=0.4, n_init=512, n_max=4096), sine)
    o = extract_outcome(traj, 7)
    assert o.sample_index == 7 and not o.censored
    assert 1.12 < o.t_star < 1.145
    assert o.t_max == traj.times()[-1]

    sub = SpectralField.from_function(np.sin, GridSpec(64))
    cfg = SolverConfig(alpha=0.8, t_end=3.0, n_init=64, n_max=64)
    o = extract_outcome(run_deterministic(cfg, sub), 0, estimate_t_star=False)
    assert o.t_star is None and not o.censored
    assert 0 < o.t_max < 3.0
