"""
Fourier representation of real, zero-mean, 2π-periodic fields.

Only the coefficients for wavenumbers k = 1..N/2 are stored. The mean
(k = 0) is identically zero and negative wavenumbers follow from conjugate
symmetry. Coefficients use the analytic normalization

    u_k = (1/N) sum_j u(x_j) exp(-i k x_j),

so that sin(x) has u_1 = -i/2.

The array-level kernels (``nonlinear_coeffs``, ``linear_symbol``, ...) act
on the last axis and broadcast over leading batch axes; the solvers use
them directly. ``SpectralField`` is the immutable value type handed to
callers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft

from .errors import ConfigurationError, NumericalFailure

TWO_PI = 2.0 * np.pi


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform collocation grid x_j = 2πj/n on the periodic domain."""

    n: int
    domain_length: float = field(default=TWO_PI, init=False)

    def __post_init__(self):
        if not is_power_of_two(self.n) or self.n < 8:
            raise ConfigurationError(
                f"grid resolution n must be a power of two >= 8, got {self.n!r}"
            )

    @property
    def n_half(self) -> int:
        return self.n // 2

    @property
    def dx(self) -> float:
        return TWO_PI / self.n

    @property
    def x(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n)

    def refined(self) -> "GridSpec":
        return GridSpec(2 * self.n)


@lru_cache(maxsize=64)
def wavenumbers(n: int) -> np.ndarray:
    """Stored wavenumbers 1..n/2 as a read-only float array."""
    k = np.arange(1, n // 2 + 1, dtype=float)
    k.setflags(write=False)
    return k


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients u_1..u_{N/2} of a real zero-mean field."""

    grid: GridSpec
    coeffs: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_half,):
            raise ConfigurationError(
                f"expected {self.grid.n_half} coefficients for n={self.grid.n}, "
                f"got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise NumericalFailure("non-finite Fourier coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec, time: float = 0.0) -> "SpectralField":
        return cls(grid, np.zeros(grid.n_half, dtype=complex), time)

    @classmethod
    def from_function(cls, func, grid: GridSpec, time: float = 0.0) -> "SpectralField":
        """Sample ``func`` on the grid and transform."""
        return forward_transform(np.asarray(func(grid.x), dtype=float), grid, time)

    @property
    def n(self) -> int:
        return self.grid.n

    def with_coeffs(self, coeffs, time: float | None = None) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.time if time is None else time)

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, time={self.time:g})"


# ---------------------------------------------------------------------------
# array-level kernels


def to_physical(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Evaluate the real field on m >= 2*len(coeffs) equispaced points."""
    n_half = coeffs.shape[-1]
    full = np.zeros(coeffs.shape[:-1] + (m // 2 + 1,), dtype=complex)
    full[..., 1 : n_half + 1] = coeffs
    return scipy.fft.irfft(full, n=m, axis=-1) * m


def from_physical(values: np.ndarray, n_half: int) -> np.ndarray:
    """Coefficients 1..n_half of real samples (the mean is dropped)."""
    m = values.shape[-1]
    return scipy.fft.rfft(values, axis=-1)[..., 1 : n_half + 1] / m


def padded_size(n: int) -> int:
    """Collocation size of the 3/2-rule dealiased product."""
    return 3 * n // 2


def nonlinear_coeffs(coeffs: np.ndarray, return_physical: bool = False):
    """[r(u)]_k = -(i k / 2) [u^2]_k with u^2 formed on 3N/2 points.

    The Nyquist coefficient of the result is set to zero. With
    ``return_physical`` the padded-grid samples of u are returned too
    (callers reuse them for the CFL bound).
    """
    n_half = coeffs.shape[-1]
    n = 2 * n_half
    m = padded_size(n)
    u = to_physical(coeffs, m)
    sq_hat = from_physical(u * u, n_half)
    r = -0.5j * wavenumbers(n) * sq_hat
    r[..., -1] = 0.0
    if return_physical:
        return r, u
    return r


def linear_symbol(n: int, alpha: float, nu: float) -> np.ndarray:
    """Diagonal of A: -nu * k^(2 alpha) for k = 1..n/2."""
    check_alpha(alpha)
    return -nu * wavenumbers(n) ** (2.0 * alpha)


def check_alpha(alpha: float) -> None:
    if not (0.0 <= alpha <= 1.0):
        raise ConfigurationError(f"alpha must lie in [0, 1], got {alpha!r}")


def pad_coeffs(coeffs: np.ndarray, n_half_new: int) -> np.ndarray:
    out = np.zeros(coeffs.shape[:-1] + (n_half_new,), dtype=complex)
    out[..., : coeffs.shape[-1]] = coeffs
    return out


# ---------------------------------------------------------------------------
# field-level operations


def forward_transform(samples, grid: GridSpec, time: float = 0.0) -> SpectralField:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n,):
        raise ConfigurationError(
            f"expected {grid.n} samples, got array of shape {samples.shape}"
        )
    return SpectralField(grid, from_physical(samples, grid.n_half), time)


def inverse_transform(field: SpectralField) -> np.ndarray:
    c = field.coeffs
    if not np.all(np.isfinite(c)):
        raise NumericalFailure("non-finite Fourier coefficients")
    return to_physical(c, field.grid.n)


def fractional_laplacian(field: SpectralField, alpha: float, nu: float) -> SpectralField:
    """Apply A = -nu (-Δ)^alpha, i.e. multiply mode k by -nu k^(2 alpha)."""
    return field.with_coeffs(linear_symbol(field.n, alpha, nu) * field.coeffs)


def nonlinear_term(field: SpectralField) -> SpectralField:
    """Dealiased -(1/2) d/dx (u^2)."""
    r = nonlinear_coeffs(field.coeffs)
    if not np.all(np.isfinite(r)):
        raise NumericalFailure("non-finite values in the nonlinear term")
    return field.with_coeffs(r)


def derivative(field: SpectralField) -> np.ndarray:
    """Collocation values of du/dx."""
    return to_physical(1j * field.grid.k * field.coeffs, field.n)


def refine(field: SpectralField) -> SpectralField:
    """Zero-pad to twice the resolution.

    The represented function is unchanged provided the Nyquist coefficient
    is zero, which the solvers maintain. On its native grid that mode is a
    single-weight cosine; after padding it would count twice.
    """
    grid = field.grid.refined()
    return SpectralField(grid, pad_coeffs(field.coeffs, grid.n_half), field.time)
