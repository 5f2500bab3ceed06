"""Fractional Burgers equation: spectral solvers, blow-up estimation and
Monte Carlo statistics."""

__version__ = "0.1.0"

from .blowup import BlowupFit, WindowPlan, estimate_blowup_time, sliding_estimate  # noqa: E402
from .deterministic import SolverConfig, Termination, Trajectory, run_deterministic  # noqa: E402
from .diagnostics import enstrophy, strip_fit  # noqa: E402
from .errors import (  # noqa: E402
    ConfigurationError,
    DegenerateFitError,
    FitFailure,
    FracBurgersError,
    NumericalFailure,
)
from .spectral import GridSpec, SpectralField  # noqa: E402
from .stochastic import NoiseParams, run_realization  # noqa: E402

__all__ = [
    "BlowupFit", "ConfigurationError", "DegenerateFitError", "FitFailure",
    "FracBurgersError", "GridSpec", "NoiseParams", "NumericalFailure", "SolverConfig",
    "SpectralField", "Termination", "Trajectory", "WindowPlan", "enstrophy",
    "estimate_blowup_time", "run_deterministic", "run_realization", "sliding_estimate",
    "strip_fit",
]
