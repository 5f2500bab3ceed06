import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracburgers.deterministic import (
    SolverConfig,
    Termination,
    imex_step,
    maybe_refine,
    run_deterministic,
    tail_ratio,
)
from fracburgers.errors import ConfigurationError
from fracburgers.spectral import GridSpec, SpectralField, inverse_transform, wavenumbers
from oracles import cole_hopf_sine


def sine(n):
    return SpectralField.from_function(np.sin, GridSpec(n))


def cole_hopf_error(n, dt, t_end, nu=0.11):
    cfg = SolverConfig(alpha=1.0, nu=nu, t_end=t_end, dt_init=dt, n_init=n, n_max=n)
    traj = run_deterministic(cfg, sine(n))
    assert traj.termination is Termination.REACHED_T_END
    u = inverse_transform(traj.final)
    return np.max(np.abs(u - cole_hopf_sine(GridSpec(n).x, t_end, nu)))


def test_cole_hopf_short_run():
    assert cole_hopf_error(128, 4e-4, 0.25) < 1e-7


def test_time_convergence_is_second_order():
    e1 = cole_hopf_error(128, 4e-3, 0.25)
    e2 = cole_hopf_error(128, 2e-3, 0.25)
    assert 3.0 < e1 / e2 < 5.0


def test_linear_decay_matches_exponential():
    # a broadband spectrum would trip the tail test, so switch it off
    cfg = SolverConfig(alpha=0.3, nu=0.5, t_end=1.0, dt_init=1e-3, n_init=32, n_max=32,
                       refine_threshold=1.0, nonlinear=False)
    rng = np.random.default_rng(0)
    c0 = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    c0[-1] = 0
    traj = run_deterministic(cfg, SpectralField(GridSpec(32), c0))
    assert traj.termination is Termination.REACHED_T_END
    exact = c0 * np.exp(-0.5 * wavenumbers(32) ** 0.6 * 1.0)
    np.testing.assert_allclose(traj.final.coeffs, exact, atol=1e-7)


def test_tail_ratio():
    c = np.zeros(16, dtype=complex)
    c[0] = 1.0
    assert tail_ratio(c) == 0.0
    c[14] = 1e-6  # k = 15 lies in [7N/16, N/2] = [14, 16]
    assert tail_ratio(c) == pytest.approx(1e-6)
    c[14] = 0
    c[12] = 1e-6  # k = 13 does not
    assert tail_ratio(c) == 0.0
    assert tail_ratio(np.zeros(8)) == 0.0


def test_maybe_refine():
    cfg = SolverConfig(alpha=0.4, n_init=32, n_max=64)
    smooth = sine(32)
    assert maybe_refine(smooth, 1e-3, cfg) == (smooth, 1e-3, False)
    rough = smooth.with_coeffs(np.full(16, 1e-3 + 0j))
    refined, dt, flag = maybe_refine(rough, 1e-3, cfg)
    assert flag and refined.n == 64 and dt == 5e-4
    np.testing.assert_array_equal(refined.coeffs[:16], rough.coeffs)
    # no room left
    cfg_full = dataclasses.replace(cfg, n_max=32)
    assert maybe_refine(rough, 1e-3, cfg_full)[2] is False


def test_snapshots_hit_requested_times_exactly():
    cfg = SolverConfig(alpha=1.0, t_end=0.1, dt_init=7e-3, n_init=32, n_max=32,
                       snapshot_times=(0.0, 0.0314, 0.05))
    traj = run_deterministic(cfg, sine(32))
    assert [t for t, _ in traj.snapshots] == [0.0, 0.0314, 0.05]
    assert [f.time for _, f in traj.snapshots] == pytest.approx([0.0, 0.0314, 0.05], abs=1e-14)
    assert traj.records[-1].t == pytest.approx(0.1, abs=1e-14)


def test_single_step_matches_driver():
    cfg = SolverConfig(alpha=0.7, t_end=1e-3, dt_init=1e-3, n_init=64, n_max=64)
    one = imex_step(sine(64), 1e-3, cfg)
    traj = run_deterministic(cfg, sine(64))
    np.testing.assert_allclose(traj.final.coeffs, one.coeffs, atol=1e-15)


def test_supercritical_run_exhausts_resolution():
    cfg = SolverConfig(alpha=0.4, t_end=2.0, n_init=64, n_max=256)
    traj = run_deterministic(cfg, sine(64))
    assert traj.termination is Termination.RESOLUTION_EXHAUSTED
    assert traj.final.n == 256
    assert 0.5 < traj.records[-1].t < 1.13
    # refinement halves the policy step each time
    ns = sorted({r.n_active for r in traj.records})
    assert ns == [64, 128, 256]


def test_dt_underflow():
    cfg = SolverConfig(alpha=0.2, t_end=2.0, dt_init=1e-3, dt_min=4e-4, n_init=64, n_max=2**12)
    traj = run_deterministic(cfg, sine(64))
    assert traj.termination is Termination.DT_UNDERFLOW


def test_strip_series_recorded_at_stride():
    cfg = SolverConfig(alpha=0.6, t_end=0.5, n_init=128, n_max=128, strip_stride=5)
    traj = run_deterministic(cfg, sine(128))
    t, d = traj.strip_series(reliable_only=False)
    assert t.size >= len(traj.records) // 5 - 1
    assert np.all(d > 0)


@settings(max_examples=6)
@given(st.floats(0.0, 1.0))
def test_energy_never_increases(alpha):
    cfg = SolverConfig(alpha=alpha, t_end=0.3, dt_init=5e-3, n_init=64, n_max=64,
                       snapshot_times=tuple(np.linspace(0, 0.3, 7)))
    traj = run_deterministic(cfg, sine(64))
    energies = [np.sum(np.abs(f.coeffs) ** 2) for _, f in traj.snapshots]
    assert np.all(np.diff(energies) <= 1e-14)


@pytest.mark.parametrize("kw", [
    {"alpha": 1.2},
    {"alpha": 0.5, "nu": 0.0},
    {"alpha": 0.5, "n_init": 100},
    {"alpha": 0.5, "n_init": 1024, "n_max": 512},
    {"alpha": 0.5, "cfl": 1.5},
    {"alpha": 0.5, "snapshot_times": (0.5, 0.1)},
])
def test_invalid_config(kw):
    with pytest.raises(ConfigurationError):
        SolverConfig(**kw)


def test_initial_grid_must_match_config():
    with pytest.raises(ConfigurationError):
        run_deterministic(SolverConfig(alpha=0.5, n_init=64), sine(32))
