"""
Ensemble statistics: per-realization outcomes, sample moments and their
convergence, bootstrap intervals, histogram densities, power-law fits in
the noise amplitude and the Jensen check E[E(u)] >= E(E[u]).

Moments use population (1/m) normalization. ``sigma`` is the standard
deviation, i.e. the square root of the 1/m variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .blowup import DEFAULT_GROWTH, DEFAULT_SPACING, WindowPlan, estimate_from_trajectory
from .diagnostics import enstrophy_coeffs
from .errors import ConfigurationError, FitFailure, FracBurgersError

STATISTICS = ("mu", "sigma", "skew", "kurt")


# ---------------------------------------------------------------------------
# outcomes


@dataclass(frozen=True)
class OutcomeSample:
    sample_index: int
    t_star: float | None
    e_max: float
    t_max: float
    censored: bool = False


def extract_outcome(traj, sample_index: int, estimate_t_star: bool = True,
                    plan: WindowPlan | None = None, growth: float = DEFAULT_GROWTH,
                    spacing: float = DEFAULT_SPACING) -> OutcomeSample:
    """Reduce one realization to (T*, max enstrophy, time of the maximum).

    T* is only estimated when ``estimate_t_star`` is set (supercritical
    runs). A realization whose estimate cannot be produced, or whose final
    window fit ends on the search horizon, is marked censored.
    """
    t, e = traj.times(), traj.enstrophy()
    i = int(np.argmax(e))
    t_star, censored = None, False
    if estimate_t_star:
        try:
            fit = estimate_from_trajectory(traj, plan, growth=growth, spacing=spacing)[-1]
        except (FracBurgersError, ValueError):
            censored = True
        else:
            if fit.at_horizon or not fit.identifiable or traj.termination == "reached_t_end":
                censored = True
            else:
                t_star = fit.t_star
    return OutcomeSample(sample_index, t_star, float(e[i]), float(t[i]), censored)


# ---------------------------------------------------------------------------
# moments


@dataclass(frozen=True)
class MomentSet:
    mu: float
    sigma: float
    skew: float
    kurt: float
    m_used: int
    degenerate: bool = False

    def get(self, name: str) -> float:
        return getattr(self, name)


def moments(samples) -> MomentSet:
    """Mean, standard deviation, skewness and kurtosis with 1/m weights.

    Constant samples give sigma = 0, NaN skewness/kurtosis and
    ``degenerate=True``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    m = x.size
    if m < 2:
        raise ConfigurationError("moments need at least 2 samples")
    mu = float(x.mean())
    dev = x - mu
    var = float(np.mean(dev**2))
    sigma = math.sqrt(var)
    if sigma == 0.0 or sigma <= 1e-14 * max(1.0, abs(mu)):
        return MomentSet(mu, 0.0, math.nan, math.nan, m, degenerate=True)
    z = dev / sigma
    return MomentSet(mu, sigma, float(np.mean(z**3)), float(np.mean(z**4)), m)


def _batch_stat(x: np.ndarray, statistic: str) -> np.ndarray:
    """Statistic along the last axis for a stack of samples."""
    mu = x.mean(axis=-1)
    if statistic == "mu":
        return mu
    dev = x - mu[..., None]
    var = np.mean(dev**2, axis=-1)
    sigma = np.sqrt(var)
    if statistic == "sigma":
        return sigma
    with np.errstate(invalid="ignore", divide="ignore"):
        z = dev / sigma[..., None]
        if statistic == "skew":
            return np.mean(z**3, axis=-1)
        if statistic == "kurt":
            return np.mean(z**4, axis=-1)
    raise ConfigurationError(f"unknown statistic {statistic!r}; use one of {STATISTICS}")


@dataclass(frozen=True)
class RunningErrors:
    """Running estimates X_m and relative errors |X_m - X_M| / |X_M|.

    ``errors[name]`` is None when X_M is zero (or undefined) so the
    relative error cannot be formed.
    """

    m: np.ndarray
    estimates: dict
    errors: dict


def running_moments(samples) -> dict:
    """Moments of the first m samples for every m = 1..M."""
    x = np.asarray(samples, dtype=float).ravel()
    # shifting by the full mean limits cancellation in the power sums
    x = x - x.mean()
    shift = np.asarray(samples, dtype=float).mean()
    m = np.arange(1, x.size + 1, dtype=float)
    s1 = np.cumsum(x) / m
    s2 = np.cumsum(x**2) / m
    s3 = np.cumsum(x**3) / m
    s4 = np.cumsum(x**4) / m
    var = np.maximum(s2 - s1**2, 0.0)
    c3 = s3 - 3 * s1 * s2 + 2 * s1**3
    c4 = s4 - 4 * s1 * s3 + 6 * s1**2 * s2 - 3 * s1**4
    sigma = np.sqrt(var)
    with np.errstate(invalid="ignore", divide="ignore"):
        tiny = var <= 1e-28 * np.maximum(1.0, s2)
        skew = np.where(tiny, np.nan, c3 / sigma**3)
        kurt = np.where(tiny, np.nan, c4 / var**2)
    return {"mu": s1 + shift, "sigma": sigma, "skew": skew, "kurt": kurt}


def _relative_errors(est: dict, size: int) -> dict:
    errs = {}
    for name, curve in est.items():
        final = curve[-1]
        if est["sigma"][-1] == 0.0:
            # constant samples: every running value equals the final one
            errs[name] = np.zeros(size)
        elif not np.isfinite(final) or final == 0.0:
            errs[name] = None
        else:
            errs[name] = np.abs((curve - final) / final)
    return errs


def running_errors(samples, permutations: int = 0, seed: int = 0) -> RunningErrors:
    """Relative errors of the running moments against the full-sample values.

    With ``permutations > 0`` the error curves are averaged over that many
    random orderings of the same samples. X_M is order independent, so the
    average is a smoothed version of the single-path curve that is easier
    to read a convergence rate from.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 10:
        raise ConfigurationError("running errors need at least 10 samples")
    est = running_moments(x)
    errs = _relative_errors(est, x.size)
    if permutations > 0:
        rng = np.random.default_rng(seed)
        acc = {k: (None if v is None else np.zeros(x.size)) for k, v in errs.items()}
        for _ in range(permutations):
            perm = _relative_errors(running_moments(rng.permutation(x)), x.size)
            for k in acc:
                if acc[k] is not None:
                    acc[k] += np.nan_to_num(perm[k], nan=0.0)
        errs = {k: (None if v is None else v / permutations) for k, v in acc.items()}
    return RunningErrors(m=np.arange(1, x.size + 1), estimates=est, errors=errs)


def loglog_slope(m, err, m_min: int = 10, m_max: int | None = None, points: int = 40) -> float:
    """Slope of log err against log m on log-spaced m in [m_min, m_max].

    ``m_max`` defaults to M/10, which keeps the fit away from the end of the
    curve where the error vanishes by construction.
    """
    m = np.asarray(m)
    err = np.asarray(err, dtype=float)
    m_max = m_max or int(m[-1]) // 10
    if m_max <= m_min:
        raise ConfigurationError(f"empty slope range [{m_min}, {m_max}]")
    idx = np.unique(np.geomspace(m_min, m_max, points).astype(int)) - int(m[0])
    e = err[idx]
    ok = (e > 0) & np.isfinite(e)
    if ok.sum() < 3:
        raise ConfigurationError("fewer than 3 positive error values in the slope range")
    slope, _ = np.polyfit(np.log(m[idx][ok]), np.log(e[ok]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# bootstrap


def bootstrap_ci(samples, statistic: str = "mu", level: float = 0.95, b: int = 1000,
                 seed: int = 0, chunk: int = 250) -> tuple[float, float]:
    """Percentile bootstrap interval from ``b`` resamples with replacement."""
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"level must lie in (0, 1), got {level!r}")
    if b < 1000:
        raise ConfigurationError(f"need at least 1000 resamples, got {b}")
    if statistic not in STATISTICS:
        raise ConfigurationError(f"unknown statistic {statistic!r}; use one of {STATISTICS}")
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ConfigurationError("bootstrap needs at least 2 samples")
    if np.all(x == x[0]):
        value = x[0] if statistic == "mu" else 0.0
        return (float(value), float(value))
    rng = np.random.default_rng(seed)
    stats = np.empty(b)
    for start in range(0, b, chunk):
        stop = min(b, start + chunk)
        idx = rng.integers(0, x.size, size=(stop - start, x.size))
        stats[start:stop] = _batch_stat(x[idx], statistic)
    stats = stats[np.isfinite(stats)]
    tail = 0.5 * (1.0 - level)
    lo, hi = np.quantile(stats, [tail, 1.0 - tail])
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class Density:
    edges: np.ndarray
    density: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    def mass(self) -> float:
        return float(np.sum(self.density * np.diff(self.edges)))


@dataclass(frozen=True)
class JointDensity:
    x_edges: np.ndarray
    y_edges: np.ndarray
    density: np.ndarray

    def mass(self) -> float:
        area = np.outer(np.diff(self.x_edges), np.diff(self.y_edges))
        return float(np.sum(self.density * area))


def _edges(x: np.ndarray, bins) -> np.ndarray:
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return np.array([lo - 0.5, lo + 0.5])
    if bins == "auto":
        return np.histogram_bin_edges(x, bins="fd")
    if isinstance(bins, (int, np.integer)) and bins >= 1:
        return np.linspace(lo, hi, int(bins) + 1)
    raise ConfigurationError(f"bins must be 'auto' or a positive integer, got {bins!r}")


def histogram_pdf(samples, bins="auto") -> Density:
    """Normalized histogram; automatic bins follow Freedman-Diaconis.

    Zero-range data collapse to one unit-width bin around the value.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ConfigurationError("histogram needs at least 2 samples")
    edges = _edges(x, bins)
    counts, _ = np.histogram(x, bins=edges)
    density = counts / (x.size * np.diff(edges))
    return Density(edges, density)


def joint_pdf(xs, ys, bins="auto") -> JointDensity:
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.shape != ys.shape or xs.size < 2:
        raise ConfigurationError("joint_pdf needs two equal-length samples of size >= 2")
    bx, by = (bins, bins) if not isinstance(bins, tuple) else bins
    ex, ey = _edges(xs, bx), _edges(ys, by)
    counts, _, _ = np.histogram2d(xs, ys, bins=[ex, ey])
    area = np.outer(np.diff(ex), np.diff(ey))
    return JointDensity(ex, ey, counts / (xs.size * area))


# ---------------------------------------------------------------------------
# power law in the noise amplitude


@dataclass(frozen=True)
class PowerLawFit:
    a: float
    b: float
    c: float
    residual: float

    def __call__(self, x):
        return self.a * np.asarray(x, dtype=float) ** self.b + self.c


def _linear_ac(xb, y, fix_c):
    if fix_c is None:
        design = np.column_stack([xb, np.ones_like(xb)])
        (a, c), *_ = np.linalg.lstsq(design, y, rcond=None)
        return a, c
    denom = float(xb @ xb)
    a = float(xb @ (y - fix_c)) / denom if denom > 0 else 0.0
    return a, fix_c


def powerlaw_fit(x, y, fix_c: float | None = None,
                 b_grid=np.linspace(-3.0, 5.0, 161)) -> PowerLawFit:
    """Least squares fit of y = a x^b + c in linear space.

    For fixed b the model is linear in (a, c), so a scan over b gives a
    starting point; Levenberg-Marquardt then polishes all free parameters.
    ``fix_c`` pins c.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape or x.size < 3:
        raise ConfigurationError("power-law fit needs at least 3 (x, y) pairs")
    if np.any(~(x > 0)):
        raise ConfigurationError("power-law fit requires x > 0")

    best = None
    for b in b_grid:
        xb = x**b
        a, c = _linear_ac(xb, y, fix_c)
        r = float(np.sum((a * xb + c - y) ** 2))
        if best is None or r < best[0]:
            best = (r, a, b, c)
    _, a0, b0, c0 = best
    if abs(a0) < 1e-300:
        return PowerLawFit(0.0, float(b0), float(c0), math.sqrt(best[0]))

    lx = np.log(x)
    if fix_c is None:
        def resid(p):
            return p[0] * x ** p[1] + p[2] - y

        def jac(p):
            xb = x ** p[1]
            return np.column_stack([xb, p[0] * xb * lx, np.ones_like(x)])

        p0 = [a0, b0, c0]
    else:
        def resid(p):
            return p[0] * x ** p[1] + fix_c - y

        def jac(p):
            xb = x ** p[1]
            return np.column_stack([xb, p[0] * xb * lx])

        p0 = [a0, b0]
    res = least_squares(resid, p0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15,
                        gtol=1e-15, max_nfev=2000)
    rms = float(np.sqrt(np.mean(res.fun**2)))
    a, b = float(res.x[0]), float(res.x[1])
    c = float(res.x[2]) if fix_c is None else float(fix_c)
    fit = PowerLawFit(a, b, c, rms)
    if res.status <= 0 or not np.all(np.isfinite(res.x)):
        raise FitFailure(f"power-law fit failed ({res.message}); rms residual {rms:.3g}",
                         best=fit)
    return fit


# ---------------------------------------------------------------------------
# Jensen


@dataclass(frozen=True)
class JensenResult:
    lhs: float
    rhs: float
    holds: bool


def jensen_check(fields, tol: float = 1e-12) -> JensenResult:
    """Compare the mean enstrophy with the enstrophy of the mean field."""
    fields = list(fields)
    if len(fields) < 2:
        raise ConfigurationError("Jensen check needs at least 2 realizations")
    n = fields[0].n
    t = fields[0].time
    for f in fields[1:]:
        if f.n != n:
            raise ConfigurationError(f"grid mismatch: n={f.n} vs n={n}")
        if not math.isclose(f.time, t, rel_tol=1e-12, abs_tol=1e-12):
            raise ConfigurationError(f"time mismatch: t={f.time} vs t={t}")
    coeffs = np.stack([f.coeffs for f in fields])
    lhs = float(np.mean(enstrophy_coeffs(coeffs)))
    rhs = float(enstrophy_coeffs(coeffs.mean(axis=0)))
    return JensenResult(lhs, rhs, lhs >= rhs - tol)
