import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracburgers.diagnostics import enstrophy, enstrophy_coeffs, strip_fit, strip_fit_amplitudes
from fracburgers.errors import DegenerateFitError
from fracburgers.spectral import GridSpec, SpectralField, derivative, wavenumbers


def test_enstrophy_of_sine_is_pi_squared():
    f = SpectralField.from_function(np.sin, GridSpec(32))
    assert enstrophy(f) == pytest.approx(np.pi**2, rel=1e-14)


def test_enstrophy_matches_quadrature():
    # pi * int_0^{2pi} u_x^2 dx by the trapezoidal rule, exact for trig polynomials
    grid = GridSpec(64)
    f = SpectralField.from_function(lambda x: np.sin(x) + 0.3 * np.cos(5 * x) - 0.1 * np.sin(9 * x), grid)
    ux = derivative(f)
    quad = np.pi * np.sum(ux**2) * grid.dx
    assert enstrophy(f) == pytest.approx(quad, rel=1e-12)


def test_enstrophy_batches():
    rng = np.random.default_rng(1)
    c = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
    np.testing.assert_allclose(enstrophy_coeffs(c), [enstrophy_coeffs(row) for row in c])


def synthetic_spectrum(n, c_amp, a, delta):
    k = wavenumbers(n)
    return c_amp * k**a * np.exp(-delta * k)


@given(st.floats(0.05, 1.0), st.floats(-2.0, 1.0), st.floats(0.1, 10.0))
def test_strip_fit_recovers_exact_parameters(delta, a, c_amp):
    amps = synthetic_spectrum(256, c_amp, a, delta)
    fit = strip_fit_amplitudes(amps, 256)
    assert fit.delta == pytest.approx(delta, rel=1e-8)
    assert fit.alpha_tilde == pytest.approx(a, abs=1e-7)
    assert fit.c_amp == pytest.approx(c_amp, rel=1e-7)
    assert fit.residual < 1e-9


def test_strip_fit_ignores_round_off_plateau():
    amps = synthetic_spectrum(512, 1.0, -1.0, 0.2)
    amps = np.maximum(amps, 1e-17)
    fit = strip_fit_amplitudes(amps, 512, floor=1e-14)
    assert fit.delta == pytest.approx(0.2, rel=1e-8)
    assert fit.k_range[1] < 256


def test_strip_fit_reliability_flag():
    wide = strip_fit_amplitudes(synthetic_spectrum(256, 1.0, 0.0, 0.5), 256)
    assert wide.reliable
    # delta below three grid spacings
    narrow = strip_fit_amplitudes(synthetic_spectrum(256, 1.0, 0.0, 0.05), 256)
    assert not narrow.reliable


def test_strip_fit_degenerate_spectra():
    with pytest.raises(DegenerateFitError):
        strip_fit_amplitudes(np.zeros(16), 32)
    with pytest.raises(DegenerateFitError):
        strip_fit(SpectralField.from_function(np.sin, GridSpec(32)))
