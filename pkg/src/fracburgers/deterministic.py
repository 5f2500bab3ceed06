"""
Time integration of the deterministic fractional Burgers equation

    u_t + (u^2/2)_x + nu (-Δ)^alpha u = 0

in Fourier space with a low-storage three-substage Runge-Kutta scheme for
the nonlinear term and Crank-Nicolson for the diagonal dissipative term.
The driver doubles the resolution whenever the top octave of the spectrum
rises above a relative threshold, halving the step at the same time.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import DEFAULT_FLOOR, DEFAULT_K_LO, enstrophy_coeffs, strip_fit_amplitudes
from .errors import ConfigurationError, DegenerateFitError, NumericalFailure
from .spectral import (
    GridSpec,
    SpectralField,
    check_alpha,
    is_power_of_two,
    linear_symbol,
    nonlinear_coeffs,
    pad_coeffs,
)

log = logging.getLogger(__name__)

# low-storage RK3 weights (explicit part); CN uses gamma + zeta per substage
RK3_GAMMA = (8.0 / 15.0, 5.0 / 12.0, 3.0 / 4.0)
RK3_ZETA = (0.0, -17.0 / 60.0, -5.0 / 12.0)


@dataclass(frozen=True)
class SolverConfig:
    """Physical and numerical parameters of a run.

    ``nonlinear=False`` drops the advection term; it exists for linear
    verification problems. ``stochastic_tail_limit`` is the relative tail
    level at which a fixed-grid stochastic realization counts as
    under-resolved (the deterministic ``refine_threshold`` sits below the
    noise floor).
    """

    alpha: float
    nu: float = 0.11
    t_end: float = 2.0
    dt_init: float = 1e-3
    cfl: float = 0.5
    n_init: int = 512
    n_max: int = 2**14
    refine_threshold: float = 1e-13
    dt_min: float = 1e-10
    snapshot_times: tuple[float, ...] = ()
    strip_stride: int = 10
    strip_floor: float = DEFAULT_FLOOR
    strip_k_lo: int = DEFAULT_K_LO
    stochastic_tail_limit: float = 1e-3
    nonlinear: bool = True

    def __post_init__(self):
        check_alpha(self.alpha)
        object.__setattr__(self, "snapshot_times", tuple(float(s) for s in self.snapshot_times))
        if not self.nu > 0:
            raise ConfigurationError(f"nu must be > 0, got {self.nu!r}")
        if not self.t_end > 0:
            raise ConfigurationError(f"t_end must be > 0, got {self.t_end!r}")
        if not self.dt_init > 0:
            raise ConfigurationError(f"dt_init must be > 0, got {self.dt_init!r}")
        if not (0 < self.cfl <= 1):
            raise ConfigurationError(f"cfl must lie in (0, 1], got {self.cfl!r}")
        for key in ("n_init", "n_max"):
            v = getattr(self, key)
            if not is_power_of_two(v) or v < 8:
                raise ConfigurationError(f"{key} must be a power of two >= 8, got {v!r}")
        if self.n_init > self.n_max:
            raise ConfigurationError(
                f"n_init ({self.n_init}) must not exceed n_max ({self.n_max})"
            )
        if not (0 < self.dt_min < self.dt_init):
            raise ConfigurationError(
                f"dt_min must satisfy 0 < dt_min < dt_init, got {self.dt_min!r}"
            )
        if not self.refine_threshold > 0:
            raise ConfigurationError("refine_threshold must be > 0")
        if list(self.snapshot_times) != sorted(self.snapshot_times):
            raise ConfigurationError("snapshot_times must be sorted")
        if self.strip_stride < 1:
            raise ConfigurationError("strip_stride must be >= 1")


@dataclass(frozen=True)
class DiagnosticRecord:
    t: float
    enstrophy: float
    delta: float | None
    delta_reliable: bool
    n_active: int
    dt: float


class Termination(str, enum.Enum):
    REACHED_T_END = "reached_t_end"
    RESOLUTION_EXHAUSTED = "resolution_exhausted"
    DT_UNDERFLOW = "dt_underflow"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class Trajectory:
    records: list[DiagnosticRecord] = field(default_factory=list)
    snapshots: list[tuple[float, SpectralField]] = field(default_factory=list)
    termination: Termination | None = None
    final: SpectralField | None = None

    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def enstrophy(self) -> np.ndarray:
        return np.array([r.enstrophy for r in self.records])

    def strip_series(self, reliable_only: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """(t, delta) pairs for records carrying a strip fit."""
        pts = [
            (r.t, r.delta)
            for r in self.records
            if r.delta is not None and (r.delta_reliable or not reliable_only)
        ]
        if not pts:
            return np.empty(0), np.empty(0)
        t, d = zip(*pts)
        return np.array(t), np.array(d)


# ---------------------------------------------------------------------------
# single step


def _nonlinear(c, cfg, return_physical=False):
    if cfg.nonlinear:
        return nonlinear_coeffs(c, return_physical)
    r = np.zeros_like(c)
    if return_physical:
        return r, None
    return r


def _imex_substages(c, dt, a, r1, cfg):
    r_prev = None
    r = r1
    for j in range(3):
        g, z = RK3_GAMMA[j], RK3_ZETA[j]
        h = 0.5 * dt * (g + z) * a
        rhs = (1.0 + h) * c + dt * g * r
        if z:
            rhs += dt * z * r_prev
        c = rhs / (1.0 - h)
        if j < 2:
            r_prev = r
            r = _nonlinear(c, cfg)
    return c


def imex_step(state: SpectralField, dt: float, cfg: SolverConfig) -> SpectralField:
    """Advance by one full RK3/Crank-Nicolson step (three nonlinear evaluations)."""
    if not dt > 0:
        raise ConfigurationError(f"dt must be > 0, got {dt!r}")
    a = linear_symbol(state.n, cfg.alpha, cfg.nu)
    c = _imex_substages(state.coeffs, dt, a, _nonlinear(state.coeffs, cfg), cfg)
    if not np.all(np.isfinite(c)):
        raise NumericalFailure(f"non-finite state after step at t={state.time:g}")
    return SpectralField(state.grid, c, state.time + dt)


# ---------------------------------------------------------------------------
# refinement


def tail_ratio(coeffs: np.ndarray) -> float:
    """max |u_k| over k in [7N/16, N/2] divided by max |u_k| overall."""
    amps = np.abs(coeffs)
    peak = amps.max()
    if peak == 0.0:
        return 0.0
    n = 2 * coeffs.shape[-1]
    lo = -(-7 * n // 16)  # ceil
    return float(amps[lo - 1 :].max() / peak)


def maybe_refine(
    state: SpectralField, dt: float, cfg: SolverConfig
) -> tuple[SpectralField, float, bool]:
    """Double N (and halve dt) when the spectral tail is above threshold."""
    if tail_ratio(state.coeffs) <= cfg.refine_threshold or 2 * state.n > cfg.n_max:
        return state, dt, False
    grid = GridSpec(2 * state.n)
    return SpectralField(grid, pad_coeffs(state.coeffs, grid.n_half), state.time), dt / 2, True


# ---------------------------------------------------------------------------
# driver


def _record(c, t, dt, step, cfg, force_strip=False):
    n = 2 * c.shape[-1]
    delta, reliable = None, False
    if force_strip or step % cfg.strip_stride == 0:
        try:
            fit = strip_fit_amplitudes(np.abs(c), n, cfg.strip_floor, cfg.strip_k_lo)
            delta, reliable = fit.delta, fit.reliable
        except DegenerateFitError:
            pass
    return DiagnosticRecord(
        t=t, enstrophy=float(enstrophy_coeffs(c)), delta=delta,
        delta_reliable=reliable, n_active=n, dt=dt,
    )


def _validate_initial(initial: SpectralField, n_expected: int) -> None:
    if initial.n != n_expected:
        raise ConfigurationError(
            f"initial field has n={initial.n}, config expects n_init={n_expected}"
        )


def run_deterministic(cfg: SolverConfig, initial: SpectralField) -> Trajectory:
    """Integrate from ``initial`` until t_end or until the run cannot continue."""
    _validate_initial(initial, cfg.n_init)
    traj = Trajectory()
    c = np.array(initial.coeffs)
    t = float(initial.time)
    dt_policy = cfg.dt_init
    pending = [s for s in cfg.snapshot_times if s >= t]
    step = 0
    eps = 1e-12 * max(1.0, cfg.t_end)

    traj.records.append(_record(c, t, 0.0, 0, cfg, force_strip=True))
    while pending and pending[0] <= t + eps:
        traj.snapshots.append((pending.pop(0), SpectralField(GridSpec(2 * c.size), c, t)))

    while True:
        if t >= cfg.t_end - eps:
            traj.termination = Termination.REACHED_T_END
            break
        while tail_ratio(c) > cfg.refine_threshold:
            if 2 * (2 * c.size) > cfg.n_max:
                traj.termination = Termination.RESOLUTION_EXHAUSTED
                break
            c = pad_coeffs(c, 2 * c.size)
            dt_policy /= 2
            log.debug("refined to N=%d at t=%.6f", 2 * c.size, t)
        if traj.termination is not None:
            break

        n = 2 * c.size
        try:
            r1, u = _nonlinear(c, cfg, return_physical=True)
        except FloatingPointError as exc:  # pragma: no cover - numpy errstate dependent
            raise NumericalFailure(str(exc)) from exc
        dt = dt_policy
        if u is not None:
            umax = float(np.max(np.abs(u)))
            if umax > 0:
                dt = min(dt, cfg.cfl * (2 * np.pi / n) / umax)
        if not np.isfinite(dt) or dt < cfg.dt_min:
            traj.termination = Termination.DT_UNDERFLOW
            break
        target = min(cfg.t_end, pending[0]) if pending else cfg.t_end
        snap = t + dt >= target - eps
        if snap:
            dt = target - t

        a = linear_symbol(n, cfg.alpha, cfg.nu)
        c_new = _imex_substages(c, dt, a, r1, cfg)
        if not np.all(np.isfinite(c_new)):
            traj.termination = Termination.NUMERICAL_FAILURE
            break
        c = c_new
        t = target if snap else t + dt
        step += 1
        at_snapshot = bool(pending) and snap and target == pending[0]
        traj.records.append(_record(c, t, dt, step, cfg, force_strip=at_snapshot))
        while pending and pending[0] <= t + eps:
            traj.snapshots.append((pending.pop(0), SpectralField(GridSpec(n), c, t)))

    traj.final = SpectralField(GridSpec(2 * c.size), c, t)
    return traj
