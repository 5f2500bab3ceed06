"""
Blow-up time estimation.

A diagnostic y(t) that diverges (enstrophy) or vanishes (strip width) at
T* is modelled locally as c (T* - t)^gamma. The three parameters are found
by minimizing the squared log-misfit over a window of samples, and the
window is slid toward the end of the data with each fit seeding the next.
Closed-form blow-up times for the inviscid and alpha -> 0 limits live
here as well since they are the reference values for the estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import ConfigurationError, FitFailure

# T* is kept at least this far past the last fitted time
T_STAR_MARGIN = 1e-9
XTOL = 1e-10
MAX_ITER = 500
# T* is searched within this many window spans past the last sample
HORIZON_SPANS = 10.0


@dataclass(frozen=True)
class WindowPlan:
    """Windows of ``window_len`` samples shifted by ``stride``; the last
    window ends on the final sample."""

    window_len: int = 50
    stride: int = 10
    count: int | None = None

    def __post_init__(self):
        if self.window_len < 3:
            raise ConfigurationError("window_len must be >= 3")
        if self.stride < 1:
            raise ConfigurationError("stride must be >= 1")
        if self.count is not None and self.count < 1:
            raise ConfigurationError("count must be >= 1")

    def windows(self, n_samples: int) -> list[slice]:
        if n_samples < self.window_len:
            raise ConfigurationError(
                f"series has {n_samples} samples, window needs {self.window_len}"
            )
        k_max = (n_samples - self.window_len) // self.stride + 1
        k = k_max if self.count is None else self.count
        if k > k_max:
            raise ConfigurationError(
                f"{k} windows of length {self.window_len} with stride {self.stride} "
                f"do not fit in {n_samples} samples"
            )
        ends = [n_samples - (k - 1 - j) * self.stride for j in range(k)]
        return [slice(e - self.window_len, e) for e in ends]


@dataclass(frozen=True)
class BlowupFit:
    c: float
    gamma: float
    t_star: float
    objective: float
    window_center: float
    curvature: float = math.nan
    identifiable: bool = True
    at_horizon: bool = False

    def as_guess(self) -> tuple[float, float, float]:
        return (self.c, self.gamma, self.t_star)


def _unpack(p, t_last):
    log_c, gamma, q = p
    return log_c, gamma, t_last + T_STAR_MARGIN + np.exp(q)


def fit_window(t, y, guess: tuple[float, float, float],
               horizon_spans: float = HORIZON_SPANS) -> BlowupFit:
    """Minimize sum_i [ln(c (T* - t_i)^gamma / y_i)]^2 from ``guess``.

    Trust-region least squares on (ln c, gamma, q) with
    T* = t_last + margin + e^q, which keeps every log argument positive.
    T* is capped at ``horizon_spans`` window spans past the last sample:
    on noisy or slowly varying data the objective keeps decreasing as
    T* -> inf and gamma -> -inf, and the cap turns that drift into a
    finite answer flagged with ``at_horizon``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1 or t.size < 3:
        raise ConfigurationError("need matching 1-D arrays with at least 3 samples")
    if np.any(~(y > 0)):
        raise ConfigurationError("blow-up fit requires strictly positive data")
    c0, g0, ts0 = (float(v) for v in guess)
    if not c0 > 0:
        raise ConfigurationError(f"guess c must be > 0, got {c0!r}")
    t_last = float(t.max())
    gap = ts0 - t_last - T_STAR_MARGIN
    if not gap > 0:
        raise ConfigurationError(
            f"guess T* = {ts0!r} must exceed the last sample time {t_last!r}"
        )
    log_y = np.log(y)

    def residual(p):
        log_c, gamma, ts = _unpack(p, t_last)
        return log_c + gamma * np.log(ts - t) - log_y

    def jac(p):
        _, gamma, ts = _unpack(p, t_last)
        d = ts - t
        return np.column_stack(
            [np.ones_like(t), np.log(d), gamma * np.exp(p[2]) / d]
        )

    span = float(t_last - t.min())
    q_max = math.log(horizon_spans * span) if span > 0 else np.inf
    q0 = min(math.log(gap), q_max - 1e-6)
    p0 = np.array([math.log(c0), g0, q0])
    res = least_squares(
        residual, p0, jac=jac, method="trf", xtol=XTOL, ftol=1e-15, gtol=1e-15,
        max_nfev=MAX_ITER, bounds=([-np.inf, -np.inf, -np.inf], [np.inf, np.inf, q_max]),
    )
    log_c, gamma, ts = _unpack(res.x, t_last)
    d = ts - t
    curvature = float(np.sum((gamma / d) ** 2))
    at_horizon = bool(res.x[2] >= q_max - 1e-6)
    fit = BlowupFit(
        c=float(math.exp(log_c)),
        gamma=float(gamma),
        t_star=float(ts),
        objective=float(np.sum(res.fun**2)),
        window_center=0.5 * float(t.min() + t_last),
        curvature=curvature,
        identifiable=curvature > 1e-8 * t.size and not at_horizon,
        at_horizon=at_horizon,
    )
    if res.status <= 0 or not np.all(np.isfinite(res.x)):
        raise FitFailure(f"blow-up fit did not converge: {res.message}", best=fit)
    return fit


def default_guess(t, y, quantity: str = "enstrophy") -> tuple[float, float, float]:
    """Starting point for the first window: c = last value, gamma = -1 for a
    diverging quantity (+1 for a vanishing one), T* 20% of the span past the
    last sample."""
    t = np.asarray(t, dtype=float)
    gamma = -1.0 if quantity == "enstrophy" else 1.0
    span = float(t[-1] - t[0])
    return (float(y[-1]), gamma, float(t[-1]) + 0.2 * span)


def sliding_estimate(t, y, plan: WindowPlan | None = None, guess=None,
                     quantity: str = "enstrophy") -> list[BlowupFit]:
    """Fit every window of ``plan`` in order, seeding each fit with the
    previous window's parameters. The last entry carries the estimate.

    If the previous T* falls inside the next window (possible on noisy
    data) the seed is moved just past that window's last sample.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ConfigurationError("t and y must be 1-D arrays of equal length")
    if np.any(np.diff(t) <= 0):
        raise ConfigurationError("series times must be strictly increasing")
    plan = plan or WindowPlan()
    wins = plan.windows(t.size)
    if guess is None:
        first = wins[0]
        guess = default_guess(t[first], y[first], quantity)
    fits = []
    w = tuple(float(v) for v in guess)
    for j, win in enumerate(wins):
        tw, yw = t[win], y[win]
        if w[2] <= tw[-1] + T_STAR_MARGIN:
            span = tw[-1] - tw[0]
            w = (w[0], w[1], float(tw[-1] + 0.05 * span))
        try:
            fit = fit_window(tw, yw, w)
        except FitFailure as exc:
            exc.index = j
            raise
        fits.append(fit)
        w = fit.as_guess()
    return fits


def estimate_blowup_time(t, y, plan: WindowPlan | None = None, guess=None,
                         quantity: str = "enstrophy") -> float:
    return sliding_estimate(t, y, plan, guess, quantity)[-1].t_star


def thin_series(t, y, spacing: float):
    """Keep samples at least ``spacing`` apart in time, always keeping the
    last sample. Solver output is recorded every step with a shrinking step
    size; the fit windows want roughly uniform sampling."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if spacing <= 0 or t.size == 0:
        return t, y
    keep = []
    last = -np.inf
    for i, ti in enumerate(t[:-1]):
        if ti - last >= spacing * (1 - 1e-9) and t[-1] - ti >= spacing * (1 - 1e-9):
            keep.append(i)
            last = ti
    keep.append(t.size - 1)
    idx = np.array(keep)
    return t[idx], y[idx]


def limit_blowup_inviscid(g_min_slope: float) -> float | None:
    """Shock time -1/inf g' of the inviscid equation; None if inf g' >= 0."""
    if g_min_slope >= 0:
        return None
    return -1.0 / g_min_slope


def limit_blowup_alpha_zero(nu: float, g_min_slope: float) -> float | None:
    """Blow-up time of u_t + u u_x + nu u = 0; None when inf g' + nu >= 0."""
    if not nu > 0:
        raise ConfigurationError(f"nu must be > 0, got {nu!r}")
    if g_min_slope + nu >= 0:
        return None
    return -math.log(nu / g_min_slope + 1.0) / nu


DEFAULT_SPACING = 1e-3
DEFAULT_GROWTH = 2.0


def fit_start_time(t, enstrophy, growth: float = DEFAULT_GROWTH) -> float:
    """First time the enstrophy reaches ``growth`` times its initial value.

    Earlier samples sit in the slowly varying phase where the power law is
    a poor local model and the window chain tends to drift.
    """
    t = np.asarray(t, dtype=float)
    e = np.asarray(enstrophy, dtype=float)
    hits = np.nonzero(e >= growth * e[0])[0]
    if hits.size == 0:
        raise ConfigurationError(
            f"enstrophy never reaches {growth:g} times its initial value"
        )
    return float(t[hits[0]])


def trajectory_series(traj, quantity: str = "enstrophy", growth: float = DEFAULT_GROWTH,
                      spacing: float = DEFAULT_SPACING):
    """Thinned (t, y) series of a trajectory ready for ``sliding_estimate``."""
    t, e = traj.times(), traj.enstrophy()
    t0 = fit_start_time(t, e, growth)
    if quantity == "enstrophy":
        ts, ys = t, e
    elif quantity == "delta":
        ts, ys = traj.strip_series(reliable_only=True)
    else:
        raise ConfigurationError(f"unknown quantity {quantity!r}")
    keep = ts >= t0
    return thin_series(ts[keep], ys[keep], spacing)


def estimate_from_trajectory(traj, plan: WindowPlan | None = None,
                             quantity: str = "enstrophy", growth: float = DEFAULT_GROWTH,
                             spacing: float = DEFAULT_SPACING) -> list[BlowupFit]:
    t, y = trajectory_series(traj, quantity, growth, spacing)
    return sliding_estimate(t, y, plan, quantity=quantity)
