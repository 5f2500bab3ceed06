"""Columnar text files with ``#`` header comments, and the outcomes CSV."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .stats import OutcomeSample

OUTCOME_HEADER = ("sample_index", "t_star", "e_max", "t_max", "censored")


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, str):
        return v.replace(" ", "_")
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_columns(path, names, columns, comments=()) -> Path:
    """Write equal-length columns as whitespace-separated text.

    ``comments`` become ``#`` lines above the column-name line.
    """
    path = Path(path)
    cols = [np.asarray(c).ravel() for c in columns]
    if len(cols) != len(names):
        raise ConfigurationError(f"{len(names)} names for {len(cols)} columns")
    if len({c.size for c in cols}) > 1:
        raise ConfigurationError("columns must have equal length")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("# " + " ".join(names) + "\n")
        for row in zip(*cols):
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
    return path


def read_columns(path) -> dict:
    """Inverse of ``write_columns``: {name: float array}."""
    path = Path(path)
    lines = path.read_text().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    if not header:
        raise ConfigurationError(f"{path}: no column-name line")
    names = header[-1][1:].split()
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.size == 0:
        data = np.empty((0, len(names)))
    if data.shape[1] != len(names):
        raise ConfigurationError(f"{path}: {data.shape[1]} columns, {len(names)} names")
    return {n: data[:, j] for j, n in enumerate(names)}


def write_outcomes(path, outcomes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OUTCOME_HEADER)
        for o in outcomes:
            w.writerow([o.sample_index, _fmt(o.t_star), _fmt(o.e_max), _fmt(o.t_max),
                        int(o.censored)])
    return path


def read_outcomes(path) -> list[OutcomeSample]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != OUTCOME_HEADER:
            raise ConfigurationError(f"{path}: unexpected header {header!r}")
        out = []
        for row in reader:
            t_star = float(row[1])
            out.append(OutcomeSample(
                sample_index=int(row[0]),
                t_star=None if math.isnan(t_star) else t_star,
                e_max=float(row[2]),
                t_max=float(row[3]),
                censored=bool(int(row[4])),
            ))
    return out
