"""
Run configuration: YAML files with flat keys, validated into the solver,
noise and window dataclasses.

Example::

    mode: ensemble
    alpha: 0.4
    rho: 0.01
    n_init: 1024
    samples: 200
    seed: 2020
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .blowup import WindowPlan
from .deterministic import SolverConfig
from .errors import ConfigurationError
from .spectral import GridSpec, SpectralField, is_power_of_two
from .stochastic import NoiseParams, default_stochastic_dt

MODES = ("deterministic", "stochastic", "ensemble")
INITIAL_CONDITIONS = {"sin": np.sin}
STOCHASTIC_N_DEFAULT = 1024

# key -> (type, constraint description, predicate)
_SCALARS = {
    "alpha": (float, "0 <= alpha <= 1", lambda v: 0.0 <= v <= 1.0),
    "nu": (float, "nu > 0", lambda v: v > 0),
    "t_end": (float, "t_end > 0", lambda v: v > 0),
    "dt": (float, "dt > 0", lambda v: v > 0),
    "cfl": (float, "0 < cfl <= 1", lambda v: 0 < v <= 1),
    "n_init": (int, "power of two >= 8", lambda v: is_power_of_two(v) and v >= 8),
    "n_max": (int, "power of two >= 8", lambda v: is_power_of_two(v) and v >= 8),
    "refine_threshold": (float, "refine_threshold > 0", lambda v: v > 0),
    "dt_min": (float, "dt_min > 0", lambda v: v > 0),
    "strip_stride": (int, "strip_stride >= 1", lambda v: v >= 1),
    "strip_floor": (float, "0 < strip_floor < 1", lambda v: 0 < v < 1),
    "strip_k_lo": (int, "strip_k_lo >= 1", lambda v: v >= 1),
    "stochastic_tail_limit": (float, "stochastic_tail_limit > 0", lambda v: v > 0),
    "rho": (float, "rho >= 0", lambda v: v >= 0),
    "seed": (int, "0 <= seed < 2**64", lambda v: 0 <= v < 2**64),
    "n_modes": (int, "n_modes >= 2", lambda v: v >= 2),
    "window_len": (int, "window_len >= 3", lambda v: v >= 3),
    "window_stride": (int, "window_stride >= 1", lambda v: v >= 1),
    "window_count": (int, "window_count >= 1", lambda v: v >= 1),
    "samples": (int, "samples >= 1", lambda v: v >= 1),
    "threads": (int, "threads >= 1", lambda v: v >= 1),
    "retain_series": (int, "retain_series >= 0", lambda v: v >= 0),
}
_OTHER = ("mode", "initial", "snapshot_times", "colored_beta")
KEYS = tuple(_SCALARS) + _OTHER


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce a run."""

    solver: SolverConfig
    noise: NoiseParams
    plan: WindowPlan
    mode: str = "deterministic"
    initial: str = "sin"
    samples: int = 1
    threads: int = 1
    retain_series: int = 0

    def initial_field(self) -> SpectralField:
        return SpectralField.from_function(INITIAL_CONDITIONS[self.initial],
                                           GridSpec(self.solver.n_init))

    def with_rho(self, rho: float) -> "RunSpec":
        return dataclasses.replace(self, noise=dataclasses.replace(self.noise, rho=float(rho)))


def _coerce(key, value):
    kind, constraint, ok = _SCALARS[key]
    try:
        if kind is int:
            if isinstance(value, bool):
                raise TypeError
            f = float(value)
            if not f.is_integer():
                raise ValueError
            v = int(f)
        else:
            if isinstance(value, bool):
                raise TypeError
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
    except (TypeError, ValueError):
        raise ConfigurationError(
            f"{key}: expected {kind.__name__}, got {value!r}"
        ) from None
    if not ok(v):
        raise ConfigurationError(f"{key}: {v!r} violates constraint {constraint}")
    return v


def build_run_spec(mapping: dict | None) -> RunSpec:
    """Validate a flat key/value mapping and fill the defaults."""
    raw = dict(mapping or {})
    unknown = sorted(set(raw) - set(KEYS))
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
    if "alpha" not in raw:
        raise ConfigurationError("alpha: required key is missing")
    mode = raw.get("mode", "deterministic")
    if mode not in MODES:
        raise ConfigurationError(f"mode: {mode!r} is not one of {', '.join(MODES)}")
    initial = raw.get("initial", "sin")
    if initial not in INITIAL_CONDITIONS:
        raise ConfigurationError(
            f"initial: {initial!r} is not one of {', '.join(INITIAL_CONDITIONS)}"
        )
    v = {k: _coerce(k, raw[k]) for k in _SCALARS if raw.get(k) is not None}

    stochastic = mode != "deterministic"
    n_init = v.get("n_init", STOCHASTIC_N_DEFAULT if stochastic else 512)
    solver_kw = dict(alpha=v["alpha"], n_init=n_init,
                     n_max=v.get("n_max", max(n_init, SolverConfig.n_max)))
    if "dt" in v:
        solver_kw["dt_init"] = v["dt"]
    elif stochastic:
        solver_kw["dt_init"] = default_stochastic_dt(n_init)
    if stochastic and "t_end" not in v:
        solver_kw["t_end"] = 4.0
    for key in ("nu", "t_end", "cfl", "refine_threshold", "dt_min", "strip_stride",
                "strip_floor", "strip_k_lo", "stochastic_tail_limit"):
        if key in v:
            solver_kw[key] = v[key]
    snaps = raw.get("snapshot_times")
    if snaps is not None:
        if not isinstance(snaps, (list, tuple)):
            raise ConfigurationError("snapshot_times: expected a list of times")
        try:
            solver_kw["snapshot_times"] = tuple(sorted(float(s) for s in snaps))
        except (TypeError, ValueError):
            raise ConfigurationError("snapshot_times: entries must be numbers") from None
    colored = raw.get("colored_beta", True)
    if not isinstance(colored, bool):
        raise ConfigurationError(f"colored_beta: expected a boolean, got {colored!r}")

    solver = SolverConfig(**solver_kw)
    noise = NoiseParams(rho=v.get("rho", 0.0), master_seed=v.get("seed", 0),
                        n_modes=v.get("n_modes"), colored_beta=colored)
    plan = WindowPlan(window_len=v.get("window_len", 50), stride=v.get("window_stride", 10),
                      count=v.get("window_count"))
    return RunSpec(solver, noise, plan, mode=mode, initial=initial,
                   samples=v.get("samples", 1), threads=v.get("threads", 1),
                   retain_series=v.get("retain_series", 0))


def load_yaml(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    data = yaml.safe_load(path.read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return data


def load_run_spec(path=None, overrides: dict | None = None) -> RunSpec:
    """Read ``path`` (optional) and apply ``overrides`` on top of it."""
    data = load_yaml(path) if path is not None else {}
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_run_spec(data)


def parse_config(path) -> tuple[SolverConfig, NoiseParams, WindowPlan, str]:
    spec = load_run_spec(path)
    return spec.solver, spec.noise, spec.plan, spec.mode


def spec_to_dict(spec: RunSpec) -> dict:
    """Explicit flat mapping of every key; inverse of ``build_run_spec``."""
    s, n, p = spec.solver, spec.noise, spec.plan
    return {
        "mode": spec.mode,
        "initial": spec.initial,
        "alpha": s.alpha,
        "nu": s.nu,
        "t_end": s.t_end,
        "dt": s.dt_init,
        "cfl": s.cfl,
        "n_init": s.n_init,
        "n_max": s.n_max,
        "refine_threshold": s.refine_threshold,
        "dt_min": s.dt_min,
        "snapshot_times": list(s.snapshot_times),
        "strip_stride": s.strip_stride,
        "strip_floor": s.strip_floor,
        "strip_k_lo": s.strip_k_lo,
        "stochastic_tail_limit": s.stochastic_tail_limit,
        "rho": n.rho,
        "seed": int(n.master_seed),
        "n_modes": n.n_modes,
        "colored_beta": n.colored_beta,
        "window_len": p.window_len,
        "window_stride": p.stride,
        "window_count": p.count,
        "samples": spec.samples,
        "threads": spec.threads,
        "retain_series": spec.retain_series,
    }


def serialize_config(spec: RunSpec) -> str:
    return yaml.safe_dump(spec_to_dict(spec), sort_keys=False)


def deserialize_config(text: str) -> RunSpec:
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigurationError("top level must be a mapping")
    return build_run_spec(data)
