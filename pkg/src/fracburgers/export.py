"""
Plot-ready data files: one columnar text file per figure panel. No
plotting happens here.

Inputs are passed as a mapping:

- ``trajectory``: a deterministic Trajectory with snapshots (fig1a, fig1b)
  and diagnostics (fig1c, fig1d)
- ``t_star_sweep``: (alpha, t_star) pairs
- ``ensembles``: {rho: [OutcomeSample, ...]}
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .spectral import GridSpec, SpectralField, inverse_transform, pad_coeffs
from .stats import histogram_pdf, joint_pdf, moments
from .tables import write_columns

PANELS = ("fig1a", "fig1b", "fig1c", "fig1d", "t_star_vs_alpha", "moments_vs_rho",
          "pdfs", "jpdfs")
OUTCOME_QUANTITIES = ("t_star", "e_max", "t_max")


class MissingInputsError(ConfigurationError):
    def __init__(self, panels):
        self.panels = list(panels)
        super().__init__("missing inputs for panels: " + ", ".join(self.panels))


def _has_trajectory(results):
    return results.get("trajectory") is not None and len(results["trajectory"].records) > 0


def _available(results: dict) -> dict:
    traj = results.get("trajectory")
    has_snaps = _has_trajectory(results) and len(traj.snapshots) > 0
    has_delta = _has_trajectory(results) and traj.strip_series(False)[0].size > 0
    ens = {r: o for r, o in (results.get("ensembles") or {}).items() if len(o) >= 2}
    return {
        "fig1a": has_snaps,
        "fig1b": has_snaps,
        "fig1c": _has_trajectory(results),
        "fig1d": has_delta,
        "t_star_vs_alpha": len(results.get("t_star_sweep") or ()) > 0,
        "moments_vs_rho": bool(ens),
        "pdfs": bool(ens),
        "jpdfs": bool(ens),
    }


def _quantity(outcomes, name):
    vals = [getattr(o, name) for o in outcomes if not o.censored]
    return np.array([v for v in vals if v is not None and math.isfinite(v)], dtype=float)


def _snapshot_fields(traj):
    return [f for _, f in traj.snapshots]


def _on_grid(field, n):
    return inverse_transform(SpectralField(GridSpec(n), pad_coeffs(field.coeffs, n // 2),
                                           field.time))


def _fig1a(traj, out):
    fields = _snapshot_fields(traj)
    # snapshots may sit on different grids after refinement; use the finest
    n = max(f.n for f in fields)
    cols = [2 * np.pi * np.arange(n) / n] + [_on_grid(f, n) for f in fields]
    names = ["x"] + [f"u_t{f.time:.6g}" for f in fields]
    return [write_columns(out / "fig1a_u.txt", names, cols,
                          comments=["solution snapshots u(t, x)"])]


def _fig1b(traj, out):
    fields = _snapshot_fields(traj)
    n = max(f.n for f in fields)
    k = np.arange(1, n // 2 + 1)
    cols = [k]
    for f in fields:
        a = np.full(n // 2, np.nan)
        a[: f.grid.n_half] = np.abs(f.coeffs)
        cols.append(a)
    names = ["k"] + [f"abs_u_k_t{f.time:.6g}" for f in fields]
    return [write_columns(out / "fig1b_spectrum.txt", names, cols,
                          comments=["Fourier amplitudes |u_k|; nan beyond the active grid"])]


def _fig1c(traj, out):
    return [write_columns(out / "fig1c_enstrophy.txt", ["t", "enstrophy", "n_active"],
                          [traj.times(), traj.enstrophy(),
                           [r.n_active for r in traj.records]],
                          comments=["enstrophy E(t)"])]


def _fig1d(traj, out):
    t = [r.t for r in traj.records if r.delta is not None]
    d = [r.delta for r in traj.records if r.delta is not None]
    ok = [int(r.delta_reliable) for r in traj.records if r.delta is not None]
    return [write_columns(out / "fig1d_strip_width.txt", ["t", "delta", "reliable"],
                          [t, d, ok], comments=["analyticity strip width delta(t)"])]


def _t_star_vs_alpha(results, out):
    pairs = sorted(results["t_star_sweep"])
    a, t = zip(*pairs)
    return [write_columns(out / "t_star_vs_alpha.txt", ["alpha", "t_star"], [a, t],
                          comments=["estimated blow-up time against fractional order"])]


def _moments_vs_rho(ens, out):
    paths = []
    rhos = sorted(ens)
    for q in OUTCOME_QUANTITIES:
        rows = []
        for rho in rhos:
            outs = ens[rho]
            vals = _quantity(outs, q)
            if vals.size < 2:
                continue
            m = moments(vals)
            rows.append((rho, m.mu, m.sigma, m.skew, m.kurt, m.m_used, len(outs) - vals.size))
        if rows:
            cols = list(zip(*rows))
            paths.append(write_columns(
                out / f"moments_{q}_vs_rho.txt",
                ["rho", "mu", "sigma", "skew", "kurt", "m_used", "excluded"], cols,
                comments=[f"sample moments of {q} (1/m normalization, sigma = sqrt(var))"],
            ))
    return paths


def _pdfs(ens, out):
    paths = []
    for rho in sorted(ens):
        for q in OUTCOME_QUANTITIES:
            vals = _quantity(ens[rho], q)
            if vals.size < 2:
                continue
            h = histogram_pdf(vals)
            paths.append(write_columns(
                out / f"pdf_{q}_rho{rho:g}.txt",
                ["left", "right", "center", "density"],
                [h.edges[:-1], h.edges[1:], h.centers, h.density],
                comments=[f"histogram density of {q} at rho = {rho:g}",
                          f"samples {vals.size}, mean {vals.mean():.10g}, std {vals.std():.10g}"],
            ))
    return paths


def _jpdfs(ens, out):
    paths = []
    for rho in sorted(ens):
        outs = [o for o in ens[rho] if not o.censored]
        for qx, qy in (("t_star", "e_max"), ("t_max", "e_max")):
            pairs = [(getattr(o, qx), getattr(o, qy)) for o in outs]
            pairs = [p for p in pairs if p[0] is not None and math.isfinite(p[0])
                     and math.isfinite(p[1])]
            if len(pairs) < 2:
                continue
            xs, ys = map(np.array, zip(*pairs))
            j = joint_pdf(xs, ys)
            xc = 0.5 * (j.x_edges[1:] + j.x_edges[:-1])
            yc = 0.5 * (j.y_edges[1:] + j.y_edges[:-1])
            gx, gy = np.meshgrid(xc, yc, indexing="ij")
            paths.append(write_columns(
                out / f"jpdf_{qx}_{qy}_rho{rho:g}.txt", [qx, qy, "density"],
                [gx, gy, j.density],
                comments=[f"joint density of ({qx}, {qy}) at rho = {rho:g}",
                          f"grid {xc.size} x {yc.size}, row-major in {qx}"],
            ))
    return paths


def export_figures_data(results: dict, out_dir, panels=None) -> list[Path]:
    """Write one file per requested panel and return the paths.

    With ``panels=None`` every panel whose inputs are present is written.
    Missing inputs for explicitly requested panels, or an empty input set,
    raise MissingInputsError naming the absent panels.
    """
    avail = _available(results)
    if panels is None:
        panels = [p for p in PANELS if avail[p]]
        if not panels:
            raise MissingInputsError(PANELS)
    else:
        unknown = [p for p in panels if p not in PANELS]
        if unknown:
            raise ConfigurationError(f"unknown panels: {', '.join(unknown)}")
        missing = [p for p in panels if not avail[p]]
        if missing:
            raise MissingInputsError(missing)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj = results.get("trajectory")
    ens = {r: o for r, o in (results.get("ensembles") or {}).items() if len(o) >= 2}
    writers = {
        "fig1a": lambda: _fig1a(traj, out),
        "fig1b": lambda: _fig1b(traj, out),
        "fig1c": lambda: _fig1c(traj, out),
        "fig1d": lambda: _fig1d(traj, out),
        "t_star_vs_alpha": lambda: _t_star_vs_alpha(results, out),
        "moments_vs_rho": lambda: _moments_vs_rho(ens, out),
        "pdfs": lambda: _pdfs(ens, out),
        "jpdfs": lambda: _jpdfs(ens, out),
    }
    paths = []
    for p in panels:
        paths.extend(writers[p]())
    return paths
