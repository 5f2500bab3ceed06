"""Regularity diagnostics: enstrophy and the analyticity-strip width."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError
from .spectral import SpectralField, wavenumbers

FOUR_PI_SQ = 4.0 * np.pi**2

DEFAULT_FLOOR = 1e-14
DEFAULT_K_LO = 4
MIN_RELIABLE_MODES = 8
MIN_RELIABLE_DX = 3.0


def enstrophy_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """4π² Σ k²|u_k|² over the last axis."""
    k = wavenumbers(2 * coeffs.shape[-1])
    return FOUR_PI_SQ * np.sum(k * k * (coeffs.real**2 + coeffs.imag**2), axis=-1)


def enstrophy(field: SpectralField) -> float:
    """Enstrophy π∫|u_x|² dx evaluated from the spectrum."""
    return float(enstrophy_coeffs(field.coeffs))


@dataclass(frozen=True)
class StripFit:
    """Fit of |u_k| ≈ C k^alpha_tilde exp(-delta k)."""

    c_amp: float
    alpha_tilde: float
    delta: float
    k_range: tuple[int, int]
    residual: float
    reliable: bool


def strip_fit_amplitudes(
    amps: np.ndarray,
    n: int,
    floor: float = DEFAULT_FLOOR,
    k_lo: int = DEFAULT_K_LO,
) -> StripFit:
    """Log-linear least squares of ln|u_k| on (1, ln k, -k).

    The band runs from ``k_lo`` up to the largest k whose amplitude exceeds
    ``floor`` times the spectral maximum; that cut keeps the round-off
    plateau out of the fit.
    """
    amps = np.asarray(amps, dtype=float)
    k = wavenumbers(n)
    peak = amps.max() if amps.size else 0.0
    if peak <= 0.0:
        raise DegenerateFitError("spectrum is identically zero")
    above = np.nonzero(amps > floor * peak)[0]
    k_hi = int(k[above[-1]])
    band = slice(k_lo - 1, k_hi)
    kb, ab = k[band], amps[band]
    keep = ab > 0.0
    kb, ab = kb[keep], ab[keep]
    if kb.size < 3:
        raise DegenerateFitError(
            f"only {kb.size} usable modes in [{k_lo}, {k_hi}]; need at least 3"
        )
    design = np.column_stack([np.ones_like(kb), np.log(kb), -kb])
    target = np.log(ab)
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = design @ sol - target
    rms = float(np.sqrt(np.mean(resid**2)))
    log_c, alpha_tilde, delta = (float(v) for v in sol)
    reliable = delta >= MIN_RELIABLE_DX * (2.0 * np.pi / n) and kb.size >= MIN_RELIABLE_MODES
    return StripFit(
        c_amp=float(np.exp(log_c)),
        alpha_tilde=alpha_tilde,
        delta=delta,
        k_range=(k_lo, k_hi),
        residual=rms,
        reliable=bool(reliable),
    )


def strip_fit(
    field: SpectralField, floor: float = DEFAULT_FLOOR, k_lo: int = DEFAULT_K_LO
) -> StripFit:
    return strip_fit_amplitudes(np.abs(field.coeffs), field.n, floor, k_lo)
