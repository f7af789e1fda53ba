"""Deterministic CSV/JSON emission.

All numbers are formatted with ``repr`` (shortest round-trip), so identical
run configurations produce byte-identical files.  Every file starts with
``#``-prefixed header lines carrying the fully resolved parameter set.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence, TextIO

import numpy as np

from .state_analysis import Distribution, TimeSeries
from .wei_norman import WNTrajectory

__all__ = [
    "format_float",
    "format_complex",
    "write_csv",
    "trajectory_table",
    "distribution_table",
    "timeseries_table",
    "timeseries_jsonable",
    "distribution_jsonable",
    "dump_json",
]


def format_float(x) -> str:
    return repr(float(x))


def format_complex(z) -> str:
    """Render a complex number in the CLI's `a+bi` input format."""
    z = complex(z)
    re, im = repr(z.real), repr(abs(z.imag))
    sign = "-" if z.imag < 0 else "+"
    return f"{re}{sign}{im}i"


def _format_cell(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format_float(x)


def write_csv(
    fh: TextIO,
    header_lines: Sequence[str],
    col_names: Sequence[str],
    rows: Iterable[Sequence],
) -> None:
    for line in header_lines:
        fh.write(f"# {line}\n")
    fh.write(",".join(col_names) + "\n")
    for row in rows:
        fh.write(",".join(_format_cell(x) for x in row) + "\n")


def trajectory_table(traj: WNTrajectory):
    names = ["t"]
    for i in (1, 2, 3, 4):
        names += [f"re_a{i}", f"im_a{i}"]
    names.append("residual_unitarity")
    rows = []
    for t, s, r in zip(traj.times, traj.states, traj.residuals):
        rows.append(
            [t]
            + [x for a in (s.a1, s.a2, s.a3, s.a4) for x in (a.real, a.imag)]
            + [r]
        )
    return names, rows


def distribution_table(dist: Distribution):
    names = ["k", "P_k"]
    rows = [[k, pk] for k, pk in enumerate(dist.probabilities)]
    return names, rows


def timeseries_table(series: TimeSeries):
    """Complex overlap series as columns t, re_F, im_F, abs2_F."""
    values = np.asarray(series.values)
    names = ["t", "re_F", "im_F", "abs2_F"]
    rows = [
        [t, v.real, v.imag, abs(v) ** 2] for t, v in zip(series.times, values)
    ]
    return names, rows


def timeseries_jsonable(series: TimeSeries) -> dict:
    values = np.asarray(series.values)
    return {
        "t": [float(t) for t in series.times],
        "re_F": [float(v.real) for v in values],
        "im_F": [float(v.imag) for v in values],
        "abs2_F": [float(abs(v) ** 2) for v in values],
    }


def distribution_jsonable(dist: Distribution) -> dict:
    return {
        "time": float(dist.time),
        "k": list(range(len(dist.probabilities))),
        "P_k": [float(x) for x in dist.probabilities],
    }


def dump_json(fh: TextIO, payload: dict) -> None:
    json.dump(payload, fh, indent=2, sort_keys=True)
    fh.write("\n")
