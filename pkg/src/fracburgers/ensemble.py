"""
Monte Carlo orchestration. Realizations run in a process pool and are
collected in sample order, so outputs depend only on the manifest.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunSpec, build_run_spec, spec_to_dict
from .errors import ConfigurationError, FracBurgersError
from .stats import OutcomeSample, extract_outcome
from .stochastic import run_realization, sample_seed
from .tables import write_columns, write_outcomes

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
OUTCOMES_NAME = "outcomes.csv"


@dataclass
class SampleResult:
    outcome: OutcomeSample
    termination: str
    series: tuple | None = None
    snapshots: list = field(default_factory=list)
    error: str | None = None


@dataclass
class EnsembleResult:
    spec: RunSpec
    manifest: dict
    results: list[SampleResult]

    @property
    def outcomes(self) -> list[OutcomeSample]:
        return [r.outcome for r in self.results]


def supercritical(alpha: float) -> bool:
    return alpha < 0.5


def _run_sample(spec: RunSpec, index: int, keep_series: bool, keep_snapshots: bool) -> SampleResult:
    try:
        traj = run_realization(spec.solver, spec.noise, index, spec.initial_field())
        outcome = extract_outcome(traj, index, supercritical(spec.solver.alpha), spec.plan)
    except (FracBurgersError, ValueError, ArithmeticError) as exc:
        log.warning("sample %d failed: %s", index, exc)
        return SampleResult(OutcomeSample(index, None, float("nan"), float("nan"), True),
                            "error", error=f"{type(exc).__name__}: {exc}")
    series = (traj.times(), traj.enstrophy()) if keep_series else None
    snaps = list(traj.snapshots) if keep_snapshots else []
    return SampleResult(outcome, traj.termination.value, series, snaps)


def _task(args):
    return _run_sample(*args)


def run_ensemble(spec: RunSpec, samples: int | None = None, threads: int | None = None,
                 out_dir=None, retain_series: int | None = None,
                 keep_snapshots: bool = False) -> EnsembleResult:
    """Run ``samples`` realizations of ``spec`` and write the outputs.

    Per-sample failures are recorded as censored outcomes with termination
    ``error``; they never abort the ensemble. With ``out_dir`` set, writes
    outcomes.csv, manifest.json and enstrophy series for the first
    ``retain_series`` samples under series/.
    """
    samples = spec.samples if samples is None else int(samples)
    threads = spec.threads if threads is None else int(threads)
    retain = spec.retain_series if retain_series is None else int(retain_series)
    if samples < 1 or threads < 1:
        raise ConfigurationError("samples and threads must be >= 1")
    started = datetime.now(timezone.utc).isoformat()
    tasks = [(spec, i, i < retain, keep_snapshots) for i in range(samples)]
    if threads == 1:
        results = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_task, tasks))
    finished = datetime.now(timezone.utc).isoformat()

    config = spec_to_dict(spec)
    config.update(samples=samples, threads=threads, retain_series=retain)
    manifest = {
        "version": __version__,
        "config": config,
        "master_seed": int(spec.noise.master_seed),
        "sample_seeds": [sample_seed(spec.noise.master_seed, i) for i in range(samples)],
        "started": started,
        "finished": finished,
        "terminations": dict(sorted(Counter(r.termination for r in results).items())),
        "censored": sum(r.outcome.censored for r in results),
        "errors": {str(r.outcome.sample_index): r.error for r in results if r.error},
    }
    result = EnsembleResult(spec, manifest, results)
    if out_dir is not None:
        write_ensemble(result, out_dir)
    return result


def write_ensemble(result: EnsembleResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_outcomes(out / OUTCOMES_NAME, result.outcomes)
    for r in result.results:
        if r.series is not None:
            t, e = r.series
            write_columns(
                out / "series" / f"sample_{r.outcome.sample_index:06d}.txt",
                ["t", "enstrophy"], [t, e],
                comments=[f"sample_index {r.outcome.sample_index}",
                          f"termination {r.termination}"],
            )
    (out / MANIFEST_NAME).write_text(json.dumps(result.manifest, indent=2) + "\n")
    return out


def load_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise ConfigurationError(f"manifest not found: {path}")
    return json.loads(path.read_text())


def rerun_from_manifest(path, out_dir=None) -> EnsembleResult:
    """Repeat the ensemble described by a manifest."""
    manifest = load_manifest(path)
    spec = build_run_spec(manifest["config"])
    return run_ensemble(spec, out_dir=out_dir)


def rho_sweep(spec: RunSpec, rhos, out_dir=None, **kwargs) -> dict[float, EnsembleResult]:
    """One ensemble per noise amplitude, written to rho_<value>/ subfolders."""
    out = {}
    for rho in rhos:
        sub = None if out_dir is None else Path(out_dir) / f"rho_{rho:g}"
        out[float(rho)] = run_ensemble(spec.with_rho(rho), out_dir=sub, **kwargs)
    return out


def finite_t_star(outcomes) -> np.ndarray:
    return np.array([o.t_star for o in outcomes if not o.censored and o.t_star is not None])
