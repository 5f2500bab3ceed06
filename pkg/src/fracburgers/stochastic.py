"""
Stochastic fractional Burgers equation with additive colored noise,

    du = (r(u) + A u) dt + rho dW,

integrated with an order-1.5 two-stage stochastic Runge-Kutta scheme on a
fixed grid. Mode k is driven by

    W_k = sqrt(2)/(2k) (b_{2k} - i b_{2k-1})

with b_j independent standard Brownian motions, so E|dW_k|^2 = dt/k^2.
Every realization owns a generator seeded from (master_seed, index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deterministic import (
    DiagnosticRecord,
    SolverConfig,
    Termination,
    Trajectory,
    _validate_initial,
    tail_ratio,
)
from .diagnostics import enstrophy_coeffs
from .errors import ConfigurationError, NumericalFailure
from .spectral import GridSpec, SpectralField, linear_symbol, nonlinear_coeffs, wavenumbers

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SQRT3_6 = math.sqrt(3.0) / 6.0


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer (Steele, Lea & Flood 2014)."""
    z = (x + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def sample_seed(master_seed: int, sample_index: int) -> int:
    """64-bit child seed: element ``sample_index`` of the SplitMix64 stream
    started at ``master_seed``."""
    if sample_index < 0:
        raise ConfigurationError("sample_index must be >= 0")
    state = (int(master_seed) + sample_index * _GOLDEN_GAMMA) & _MASK64
    return splitmix64(state)


def make_rng(master_seed: int, sample_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(sample_seed(master_seed, sample_index)))


def default_stochastic_dt(n: int) -> float:
    """2.5e-4 at N = 1024, scaled like 1/N."""
    return 2.5e-4 * 1024 / n


@dataclass(frozen=True)
class NoiseParams:
    """Noise amplitude and seeding.

    ``n_modes`` is the number of real Brownian motions (default: the grid
    resolution N). ``colored_beta=False`` drops the 1/k weight from the
    auxiliary variate of the scheme, for comparison runs only.
    """

    rho: float = 0.0
    master_seed: int = 0
    n_modes: int | None = None
    colored_beta: bool = True

    def __post_init__(self):
        if not self.rho >= 0:
            raise ConfigurationError(f"rho must be >= 0, got {self.rho!r}")
        if not (0 <= int(self.master_seed) <= _MASK64):
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")
        if self.n_modes is not None and self.n_modes < 2:
            raise ConfigurationError("n_modes must be >= 2")


@dataclass(frozen=True)
class WienerIncrement:
    dW: np.ndarray
    beta: np.ndarray
    dt: float


def noise_weights(n_half: int, n_modes: int | None = None) -> np.ndarray:
    """sqrt(2)/(2k) for forced modes, 0 elsewhere.

    Modes with 2k > n_modes are unforced, and so is the Nyquist mode k = N/2,
    which the Fourier-Galerkin state keeps at zero.
    """
    k = wavenumbers(2 * n_half)
    w = math.sqrt(2.0) / (2.0 * k)
    w[-1] = 0.0
    if n_modes is not None:
        w[2 * k > n_modes] = 0.0
    return w


def _assemble(g, weight):
    # g[..., 0::2] holds b_{2k-1}, g[..., 1::2] holds b_{2k}
    return weight * (g[..., 1::2] - 1j * g[..., 0::2])


def sample_increment(rng: np.random.Generator, dt: float, n_half: int,
                     n_modes: int | None = None, colored_beta: bool = True,
                     size: tuple[int, ...] = ()) -> WienerIncrement:
    """Draw (dW, beta) for one step.

    dW_k = sqrt(dt) w_k (xi_{2k} - i xi_{2k-1}) and beta is assembled the
    same way from xi/2 + (sqrt(3)/6) eta, so that dt^{3/2} beta is the
    matching draw of the time-integrated Brownian path. ``size`` adds
    leading batch axes (independent paths).
    """
    if not dt > 0:
        raise ConfigurationError(f"dt must be > 0, got {dt!r}")
    shape = tuple(size) + (2 * n_half,)
    xi = rng.standard_normal(shape)
    eta = rng.standard_normal(shape)
    w = noise_weights(n_half, n_modes)
    dW = math.sqrt(dt) * _assemble(xi, w)
    w_beta = w if colored_beta else np.where(w > 0, math.sqrt(2.0) / 2.0, 0.0)
    beta = _assemble(0.5 * xi + SQRT3_6 * eta, w_beta)
    return WienerIncrement(dW=dW, beta=beta, dt=float(dt))


def _tendency(c, a, cfg):
    if cfg.nonlinear:
        return nonlinear_coeffs(c) + a * c
    return a * c


def srk_coeffs(c, dt, dW, beta, rho, a, cfg):
    """Array kernel of ``srk_step``; broadcasts over leading axes."""
    fu = _tendency(c, a, cfg)
    q = c + 0.5 * dt * fu
    q_star = q + 1.5 * rho * math.sqrt(dt) * beta
    return c + rho * dW + (dt / 3.0) * (_tendency(q, a, cfg) + 2.0 * _tendency(q_star, a, cfg))


def srk_step(state: SpectralField, dt: float, inc: WienerIncrement, rho: float,
             cfg: SolverConfig) -> SpectralField:
    """One step of the two-stage order-1.5 stochastic Runge-Kutta scheme."""
    if not math.isclose(inc.dt, dt, rel_tol=1e-12):
        raise ConfigurationError(f"increment drawn for dt={inc.dt}, step uses dt={dt}")
    a = linear_symbol(state.n, cfg.alpha, cfg.nu)
    c = srk_coeffs(state.coeffs, dt, inc.dW, inc.beta, rho, a, cfg)
    if not np.all(np.isfinite(c)):
        raise NumericalFailure(f"non-finite state after stochastic step at t={state.time:g}")
    return SpectralField(state.grid, c, state.time + dt)


def run_realization(cfg: SolverConfig, noise: NoiseParams, sample_index: int,
                    initial: SpectralField) -> Trajectory:
    """One realization on the fixed grid of ``initial`` with fixed step cfg.dt_init.

    Stops early (``resolution_exhausted``) once the relative spectral tail
    exceeds ``cfg.stochastic_tail_limit``.
    """
    _validate_initial(initial, cfg.n_init)
    rng = make_rng(noise.master_seed, sample_index)
    n = initial.n
    n_half = n // 2
    a = linear_symbol(n, cfg.alpha, cfg.nu)
    grid = GridSpec(n)
    c = np.array(initial.coeffs)
    t0 = float(initial.time)
    t = t0
    dt_fixed = cfg.dt_init
    eps = 1e-12 * max(1.0, cfg.t_end)
    pending = [s for s in cfg.snapshot_times if s >= t]
    traj = Trajectory()
    traj.records.append(
        DiagnosticRecord(t, float(enstrophy_coeffs(c)), None, False, n, 0.0)
    )
    while pending and pending[0] <= t + eps:
        traj.snapshots.append((pending.pop(0), SpectralField(grid, c, t)))
    while True:
        if t >= cfg.t_end - eps:
            traj.termination = Termination.REACHED_T_END
            break
        if tail_ratio(c) > cfg.stochastic_tail_limit:
            traj.termination = Termination.RESOLUTION_EXHAUSTED
            break
        target = min(cfg.t_end, pending[0]) if pending else cfg.t_end
        i_grid = math.floor((t - t0) / dt_fixed + 1e-9)
        t_next = t0 + (i_grid + 1) * dt_fixed
        if t_next >= target - eps:
            t_next = target
        dt = t_next - t
        inc = sample_increment(rng, dt, n_half, noise.n_modes, noise.colored_beta)
        c_new = srk_coeffs(c, dt, inc.dW, inc.beta, noise.rho, a, cfg)
        if not np.all(np.isfinite(c_new)):
            traj.termination = Termination.NUMERICAL_FAILURE
            break
        c = c_new
        t = t_next
        traj.records.append(
            DiagnosticRecord(t, float(enstrophy_coeffs(c)), None, False, n, dt)
        )
        while pending and pending[0] <= t + eps:
            traj.snapshots.append((pending.pop(0), SpectralField(grid, c, t)))
    traj.final = SpectralField(grid, c, t)
    return traj
