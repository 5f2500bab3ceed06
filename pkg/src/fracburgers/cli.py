"""
Command line interface.

    fracburgers deterministic --alpha 0.4 0.6 --snapshots 0.5 1.0
    fracburgers ensemble --alpha 0.4 --rho 1e-4 1e-2 --samples 200 --threads 8
    fracburgers stats --input out/rho_0.01/outcomes.csv
    fracburgers fit-blowup --input out/alpha_0.4/fig1c_enstrophy.txt
    fracburgers export --input out/rho_0.0001 out/rho_0.01

Flags override keys of the optional --config file. Output goes to --out-dir,
else $FRACBURGERS_OUT_DIR, else ./fracburgers_out.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .blowup import WindowPlan, estimate_from_trajectory, fit_start_time, sliding_estimate, thin_series
from .config import load_run_spec, serialize_config
from .deterministic import Termination, run_deterministic
from .ensemble import load_manifest, rho_sweep, supercritical
from .errors import ConfigurationError, FracBurgersError
from .export import export_figures_data
from .stats import STATISTICS, bootstrap_ci, extract_outcome, moments
from .stochastic import run_realization
from .tables import read_columns, read_outcomes, write_columns

log = logging.getLogger("fracburgers")

OUT_DIR_ENV = "FRACBURGERS_OUT_DIR"
DEFAULT_OUT_DIR = "fracburgers_out"


def _int(text: str) -> int:
    """Integer that may be written in scientific notation (1e3)."""
    try:
        f = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not f.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(f)


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _run_flags(p: argparse.ArgumentParser, multi_alpha=False, multi_rho=False):
    g = p.add_argument_group("run parameters (override --config)")
    g.add_argument("--config", type=Path, help="YAML configuration file")
    g.add_argument("--alpha", type=float, nargs="+" if multi_alpha else None)
    g.add_argument("--nu", type=float)
    g.add_argument("--rho", type=float, nargs="+" if multi_rho else None)
    g.add_argument("--n", type=_int, dest="n_init", help="initial grid size N")
    g.add_argument("--n-max", type=_int, dest="n_max")
    g.add_argument("--dt", type=float)
    g.add_argument("--t-end", type=float, dest="t_end")
    g.add_argument("--seed", type=_int)
    g.add_argument("--samples", type=_int)
    g.add_argument("--threads", type=_int)
    _window_flags(p)


def _window_flags(p):
    p.add_argument("--window-len", type=_int, dest="window_len")
    p.add_argument("--window-stride", type=_int, dest="window_stride")


def _overrides(args, mode, **fixed) -> dict:
    keys = ("alpha", "nu", "rho", "n_init", "n_max", "dt", "t_end", "seed", "samples",
            "threads", "window_len", "window_stride")
    out = {k: getattr(args, k, None) for k in keys}
    out.update(fixed)
    out["mode"] = mode
    return out


def _spec(args, mode, **fixed):
    return load_run_spec(args.config, _overrides(args, mode, **fixed))


def _values(v):
    if v is None:
        return [None]
    return v if isinstance(v, list) else [v]


# ---------------------------------------------------------------------------
# subcommands


def cmd_deterministic(args) -> int:
    out = _out_dir(args)
    sweep = []
    status = 0
    for alpha in _values(args.alpha):
        extra = {"alpha": alpha}
        if args.snapshots:
            extra["snapshot_times"] = args.snapshots
        spec = _spec(args, "deterministic", **extra)
        cfg = spec.solver
        traj = run_deterministic(cfg, spec.initial_field())
        sub = out / f"alpha_{cfg.alpha:g}"
        sub.mkdir(parents=True, exist_ok=True)
        (sub / "config.yaml").write_text(serialize_config(spec))
        export_figures_data({"trajectory": traj}, sub)
        t, e = traj.times(), traj.enstrophy()
        i = int(np.argmax(e))
        print(f"alpha={cfg.alpha:g} termination={traj.termination.value} t={t[-1]:.6f} "
              f"N={traj.records[-1].n_active} max E={e[i]:.6g} at t={t[i]:.6f}")
        if traj.termination is Termination.NUMERICAL_FAILURE:
            status = 1
        if supercritical(cfg.alpha) and traj.termination is not Termination.REACHED_T_END:
            for quantity in ("enstrophy", "delta"):
                try:
                    fit = estimate_from_trajectory(traj, spec.plan, quantity)[-1]
                except (FracBurgersError, ValueError) as exc:
                    print(f"  T*_{quantity}: unavailable ({exc})")
                    continue
                flag = " (at search horizon)" if fit.at_horizon else ""
                print(f"  T*_{quantity} = {fit.t_star:.6f}  gamma = {fit.gamma:.4f}{flag}")
                if quantity == "enstrophy":
                    sweep.append((cfg.alpha, fit.t_star))
    if len(sweep) > 1:
        export_figures_data({"t_star_sweep": sweep}, out, panels=["t_star_vs_alpha"])
    return status


def cmd_stochastic(args) -> int:
    spec = _spec(args, "stochastic")
    traj = run_realization(spec.solver, spec.noise, args.sample, spec.initial_field())
    o = extract_outcome(traj, args.sample, supercritical(spec.solver.alpha), spec.plan)
    out = _out_dir(args)
    write_columns(out / f"sample_{args.sample:06d}.txt", ["t", "enstrophy"],
                  [traj.times(), traj.enstrophy()],
                  comments=[f"sample_index {args.sample}", f"termination {traj.termination.value}"])
    print(f"sample={args.sample} termination={traj.termination.value} t_star={o.t_star} "
          f"e_max={o.e_max:.6g} t_max={o.t_max:.6f} censored={int(o.censored)}")
    return 1 if traj.termination is Termination.NUMERICAL_FAILURE else 0


def cmd_ensemble(args) -> int:
    rhos = _values(args.rho)
    spec = _spec(args, "ensemble", rho=rhos[0], retain_series=args.retain_series)
    rhos = [spec.noise.rho] if rhos == [None] else rhos
    out = _out_dir(args)
    results = rho_sweep(spec, rhos, out_dir=out)
    for rho, res in results.items():
        m = res.manifest
        print(f"rho={rho:g} samples={len(res.results)} censored={m['censored']} "
              f"terminations={m['terminations']}")
    ens = {rho: res.outcomes for rho, res in results.items()}
    try:
        export_figures_data({"ensembles": ens}, out / "figures")
    except ConfigurationError as exc:
        log.warning("%s", exc)
    return 1 if any("error" in r.manifest["terminations"] for r in results.values()) else 0


def cmd_fit_blowup(args) -> int:
    cols = read_columns(args.input)
    if "t" not in cols or args.column not in cols:
        raise ConfigurationError(
            f"{args.input} needs columns 't' and {args.column!r}; found {', '.join(cols)}"
        )
    t, y = cols["t"], cols[args.column]
    if args.quantity == "enstrophy" and args.growth > 0:
        keep = t >= fit_start_time(t, y, args.growth)
        t, y = t[keep], y[keep]
    t, y = thin_series(t, y, args.spacing)
    plan = WindowPlan(window_len=args.window_len or 50, stride=args.window_stride or 10)
    fits = sliding_estimate(t, y, plan, quantity=args.quantity)
    for j, f in enumerate(fits):
        print(f"window {j:3d} center={f.window_center:.6f} t_star={f.t_star:.8f} "
              f"gamma={f.gamma:.6f} c={f.c:.6g} objective={f.objective:.3e}"
              + (" at_horizon" if f.at_horizon else ""))
    print(f"t_star = {fits[-1].t_star:.8f}")
    return 0


def cmd_stats(args) -> int:
    rows = []
    for path in args.input:
        outcomes = read_outcomes(path)
        print(f"{path}: {len(outcomes)} samples, "
              f"{sum(o.censored for o in outcomes)} censored")
        for q in ("t_star", "e_max", "t_max"):
            vals = np.array([getattr(o, q) for o in outcomes
                             if not o.censored and getattr(o, q) is not None], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size < 2:
                continue
            m = moments(vals)
            line = [f"  {q:7s} m={m.m_used}"]
            for s in STATISTICS:
                v = m.get(s)
                if math.isnan(v):
                    line.append(f"{s}=nan")
                    continue
                lo, hi = bootstrap_ci(vals, s, args.level, args.bootstrap, args.seed or 0)
                line.append(f"{s}={v:.6g} [{lo:.6g}, {hi:.6g}]")
            print(" ".join(line))
            rows.append((str(path), q, m))
    if args.out_dir or os.environ.get(OUT_DIR_ENV):
        out = _out_dir(args)
        write_columns(out / "stats.txt", ["source", "quantity", "m", "mu", "sigma", "skew", "kurt"],
                      [np.array([r[0] for r in rows], dtype=object),
                       np.array([r[1] for r in rows], dtype=object),
                       [r[2].m_used for r in rows], [r[2].mu for r in rows],
                       [r[2].sigma for r in rows], [r[2].skew for r in rows],
                       [r[2].kurt for r in rows]],
                      comments=["sample moments, 1/m normalization"])
    return 0


def cmd_export(args) -> int:
    ens = {}
    for d in args.input:
        manifest = load_manifest(d)
        ens[float(manifest["config"]["rho"])] = read_outcomes(Path(d) / "outcomes.csv")
    paths = export_figures_data({"ensembles": ens}, _out_dir(args), panels=args.panels)
    for p in paths:
        print(p)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracburgers", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deterministic", help="single runs or an alpha sweep")
    _run_flags(p, multi_alpha=True)
    p.add_argument("--snapshots", type=float, nargs="+", help="snapshot times")
    p.add_argument("--out-dir", type=Path)
    p.set_defaults(func=cmd_deterministic)

    p = sub.add_parser("stochastic", help="one stochastic realization")
    _run_flags(p)
    p.add_argument("--sample", type=_int, default=0, help="sample index")
    p.add_argument("--out-dir", type=Path)
    p.set_defaults(func=cmd_stochastic)

    p = sub.add_parser("ensemble", help="Monte Carlo ensembles over noise amplitudes")
    _run_flags(p, multi_rho=True)
    p.add_argument("--retain-series", type=_int, default=None,
                   help="write enstrophy series for the first K samples")
    p.add_argument("--out-dir", type=Path)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("fit-blowup", help="sliding-window T* fit of a stored series")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--column", default="enstrophy")
    p.add_argument("--quantity", choices=("enstrophy", "delta"), default="enstrophy")
    p.add_argument("--growth", type=float, default=2.0,
                   help="start fitting once the enstrophy reaches this multiple of E(0)")
    p.add_argument("--spacing", type=float, default=1e-3)
    _window_flags(p)
    p.set_defaults(func=cmd_fit_blowup)

    p = sub.add_parser("stats", help="moments and bootstrap intervals of outcome tables")
    p.add_argument("--input", type=Path, nargs="+", required=True)
    p.add_argument("--bootstrap", type=_int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=_int)
    p.add_argument("--out-dir", type=Path)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="figure data from ensemble directories")
    p.add_argument("--input", type=Path, nargs="+", required=True)
    p.add_argument("--panels", nargs="+")
    p.add_argument("--out-dir", type=Path)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FracBurgersError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
