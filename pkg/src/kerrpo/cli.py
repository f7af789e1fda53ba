"""Command-line front end.

Subcommands cover the individual observables (``coeffs``, ``pk``,
``autocorr``, ``oracle``, ``revivals``), the side-by-side validation run
(``compare``) and presets (``fig1``, ``fig2``, ``fig3``) that reproduce the
reference parameter sets with zero manual input.  CSV is the primary
output (one observable per file); ``--format json`` bundles a run instead.

Exit codes: 0 success, 2 invalid parameters, 3 convergence or integration
failure, 4 unitarity or norm breach.  ``KERRPO_THREADS`` caps the workers
used for independent sub-runs.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import click
import numpy as np

from . import oracle as oracle_mod
from . import output, state_analysis, wei_norman
from .errors import KerrpoError
from .params import ModelParams
from .state_analysis import Distribution, TimeSeries

DEFAULT_T_MAX = 8.0 * math.pi
DEFAULT_SAMPLES = 2000          # grid intervals over [0, t_max]
AGREEMENT_BOUND = 0.05          # flagged bound on the compare sup difference

FIG1_TIMES = (0.0, 2.0 * math.pi, 6.0 * math.pi)
FIG1_PARAMS = ModelParams(omega0=1.0, kappa=0.05, chi=0.0, z=3 + 3j, alpha0=math.sqrt(18.0))
FIG2_PARAMS = {
    "a": ModelParams(omega0=1.0, kappa=0.05, chi=0.0, z=2.0, alpha0=2.0),
    "b": ModelParams(omega0=1.0, kappa=0.0, chi=0.25, z=2.0, alpha0=2.0),
    "c": ModelParams(omega0=1.0, kappa=0.25, chi=0.25, z=2.0, alpha0=2.0),
}
FIG3_PARAMS = FIG2_PARAMS["c"]


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved inputs of one CLI run."""

    params: ModelParams
    t_max: float = DEFAULT_T_MAX
    sample_dt: float = DEFAULT_T_MAX / DEFAULT_SAMPLES
    ode_tol: float | None = None        # None -> per-module defaults
    series_tol: float | None = None
    conv_tol: float = oracle_mod.DEFAULT_CONV_TOL
    nmax_cap: int = oracle_mod.DEFAULT_BASIS_CAP
    out: Path | None = None
    format: str = "csv"
    mode: str = "autocorr"

    @property
    def wn_tol(self) -> float:
        return self.ode_tol if self.ode_tol is not None else wei_norman.DEFAULT_ODE_TOL

    @property
    def oracle_tol(self) -> float:
        return self.ode_tol if self.ode_tol is not None else oracle_mod.DEFAULT_ODE_TOL

    @property
    def tail_tol(self) -> float:
        return self.series_tol if self.series_tol is not None else state_analysis.DEFAULT_TAIL_TOL

    @property
    def overlap_tol(self) -> float:
        return (
            self.series_tol if self.series_tol is not None else state_analysis.DEFAULT_SERIES_TOL
        )


@dataclass(frozen=True)
class CompareReport:
    """Product-form result against the converged reference on one grid.

    ``oracle_n`` is the smallest truncation stable under doubling; the
    stored oracle curve comes from the doubled run.
    """

    sup_abs2_diff: float
    time_of_max_diff: float
    approx_series: TimeSeries
    oracle_series: TimeSeries
    oracle_n: int
    oracle_norm_drift: float = 0.0
    bound: float = AGREEMENT_BOUND

    @property
    def within_bound(self) -> bool:
        return self.sup_abs2_diff <= self.bound


def parse_complex(text: str) -> complex:
    """Parse `a+bi` / `a-bi` (also plain reals and `bi`)."""
    cleaned = text.strip().replace(" ", "")
    if not cleaned:
        raise ValueError("empty complex literal")
    try:
        return complex(cleaned[:-1] + "j" if cleaned.endswith("i") else cleaned)
    except ValueError:
        raise ValueError(f"invalid complex literal {text!r}") from None


_DEFAULTS = {
    "omega0": 1.0,
    "kappa": 0.0,
    "chi": 0.0,
    "z": "0+0i",
    "alpha0": None,
    "t_max": DEFAULT_T_MAX,
    "dt": None,                # None -> t_max / DEFAULT_SAMPLES
    "ode_tol": None,
    "series_tol": None,
    "conv_tol": oracle_mod.DEFAULT_CONV_TOL,
    "nmax_cap": oracle_mod.DEFAULT_BASIS_CAP,
    "out": None,
    "format": "csv",
}


def parse_config(mode: str, cli_values: dict, config_path: str | None) -> RunConfig:
    """Merge defaults, optional JSON config file and explicit flags.

    Flags override file values; file values override defaults.  Raises
    ``click.UsageError`` (exit code 2) on any invalid or inconsistent
    parameter.
    """
    merged = dict(_DEFAULTS)
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise click.UsageError(f"cannot read config file {config_path}: {exc}")
        unknown = set(file_values) - set(merged)
        if unknown:
            raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    for key, value in cli_values.items():
        if value is not None:
            merged[key] = value

    try:
        z = parse_complex(str(merged["z"]))
        alpha0 = None if merged["alpha0"] is None else parse_complex(str(merged["alpha0"]))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    try:
        params = ModelParams(
            omega0=float(merged["omega0"]),
            kappa=float(merged["kappa"]),
            chi=float(merged["chi"]),
            z=z,
            alpha0=alpha0,
        )
    except (TypeError, ValueError) as exc:
        raise click.UsageError(str(exc))

    t_max = float(merged["t_max"])
    if t_max <= 0:
        raise click.UsageError("t-max must be positive")
    dt = merged["dt"]
    sample_dt = t_max / DEFAULT_SAMPLES if dt is None else float(dt)
    if sample_dt <= 0:
        raise click.UsageError("dt must be positive")
    for name in ("ode_tol", "series_tol"):
        if merged[name] is not None and float(merged[name]) <= 0:
            raise click.UsageError(f"{name.replace('_', '-')} must be positive")
    conv_tol = float(merged["conv_tol"])
    if conv_tol <= 0:
        raise click.UsageError("conv-tol must be positive")
    nmax_cap = int(merged["nmax_cap"])
    if nmax_cap < 16:
        raise click.UsageError("nmax-cap must be at least 16")
    fmt = str(merged["format"])
    if fmt not in ("csv", "json"):
        raise click.UsageError(f"format must be csv or json, got {fmt!r}")

    return RunConfig(
        params=params,
        t_max=t_max,
        sample_dt=sample_dt,
        ode_tol=None if merged["ode_tol"] is None else float(merged["ode_tol"]),
        series_tol=None if merged["series_tol"] is None else float(merged["series_tol"]),
        conv_tol=conv_tol,
        nmax_cap=nmax_cap,
        out=None if merged["out"] is None else Path(merged["out"]),
        format=fmt,
        mode=mode,
    )


def worker_count(n_tasks: int) -> int:
    env = os.environ.get("KERRPO_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise click.UsageError(f"KERRPO_THREADS must be an integer, got {env!r}")
        if cap < 1:
            raise click.UsageError("KERRPO_THREADS must be at least 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(n_tasks, cap))


def _parallel_map(fn, items):
    """Deterministic fan-out: results keep submission order."""
    workers = worker_count(len(items))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# run implementations (importable; the click commands below only do I/O)
# ---------------------------------------------------------------------------


def wn_trajectory(config: RunConfig, t_end: float | None = None,
                  sample_dt: float | None = None) -> wei_norman.WNTrajectory:
    return wei_norman.integrate_wn(
        config.params,
        t_end=config.t_max if t_end is None else t_end,
        sample_dt=config.sample_dt if sample_dt is None else sample_dt,
        tol=config.wn_tol,
    )


def run_pk(config: RunConfig) -> Distribution:
    """Photon-number distribution at t = t_max."""
    traj = wn_trajectory(config, sample_dt=config.t_max)
    return state_analysis.number_distribution(
        config.params, traj.states[-1], config.t_max, tail_tol=config.tail_tol
    )


def run_autocorr(config: RunConfig) -> TimeSeries:
    traj = wn_trajectory(config)
    return state_analysis.autocorrelation_series(
        config.params, traj, series_tol=config.overlap_tol
    )


def run_oracle(config: RunConfig) -> tuple[TimeSeries, oracle_mod.ConvergenceReport]:
    grid = _grid(config)
    report = oracle_mod.run_convergence(
        config.params,
        grid,
        conv_tol=config.conv_tol,
        ode_tol=config.oracle_tol,
        cap=config.nmax_cap,
    )
    series = oracle_mod.oracle_autocorrelation(report.result, config.params)
    return series, report


def run_compare(config: RunConfig) -> "CompareReport":
    """Product-form |F|^2 against the converged reference on one grid."""
    tasks = [
        lambda: run_autocorr(config),
        lambda: run_oracle(config),
    ]
    approx, (oracle_series, report) = _parallel_map(lambda f: f(), tasks)
    a2 = np.abs(np.asarray(approx.values)) ** 2
    o2 = np.abs(np.asarray(oracle_series.values)) ** 2
    diff = np.abs(a2 - o2)
    i = int(np.argmax(diff))
    return CompareReport(
        sup_abs2_diff=float(diff[i]),
        time_of_max_diff=float(approx.times[i]),
        approx_series=approx,
        oracle_series=oracle_series,
        oracle_n=report.n_final,
        oracle_norm_drift=report.result.norm_drift,
    )


def run_fig1(config: RunConfig) -> list[Distribution]:
    """Number distributions at the three preset times."""
    cfg = replace(config, params=FIG1_PARAMS)
    traj = wn_trajectory(cfg, t_end=FIG1_TIMES[-1], sample_dt=math.pi)
    dists = []
    for t in FIG1_TIMES:
        s = traj.state_at(t)
        dists.append(
            state_analysis.number_distribution(cfg.params, s, t, tail_tol=cfg.tail_tol)
        )
    return dists


def run_fig2(config: RunConfig) -> tuple[dict[str, TimeSeries], TimeSeries]:
    """The three autocorrelation panels plus the coherent reference curve."""

    def one_panel(key: str) -> TimeSeries:
        cfg = replace(config, params=FIG2_PARAMS[key])
        return run_autocorr(cfg)

    keys = list(FIG2_PARAMS)
    series = dict(zip(keys, _parallel_map(one_panel, keys)))
    grid = _grid(config)
    ref_params = FIG2_PARAMS["a"]
    reference = TimeSeries(
        grid,
        np.asarray(
            state_analysis.reference_coherent_autocorr(ref_params.z, ref_params.omega0, grid)
        ),
    )
    return series, reference


def run_revivals(config: RunConfig) -> tuple[list[tuple[float, float]], float | None]:
    series = state_analysis.abs2_series(run_autocorr(config))
    peaks = state_analysis.detect_revivals(series, threshold=0.5)
    t_rev = (
        state_analysis.revival_time(config.params) if config.params.chi > 0 else None
    )
    return peaks, t_rev


def _grid(config: RunConfig) -> np.ndarray:
    n = max(1, round(config.t_max / config.sample_dt))
    return np.linspace(0.0, config.t_max, n + 1)


# ---------------------------------------------------------------------------
# output assembly
# ---------------------------------------------------------------------------


def _header(config: RunConfig, extra: list[str] | None = None) -> list[str]:
    p = config.params
    lines = [
        f"kerrpo {config.mode}",
        "params: omega0={} kappa={} chi={} z={} alpha0={}".format(
            output.format_float(p.omega0),
            output.format_float(p.kappa),
            output.format_float(p.chi),
            output.format_complex(p.z),
            output.format_complex(p.alpha0),
        ),
        "grid: t_max={} dt={}".format(
            output.format_float(config.t_max), output.format_float(config.sample_dt)
        ),
        "tolerances: ode_tol_coeffs={} ode_tol_oracle={} series_tol={} tail_tol={} "
        "conv_tol={} nmax_cap={}".format(
            output.format_float(config.wn_tol),
            output.format_float(config.oracle_tol),
            output.format_float(config.overlap_tol),
            output.format_float(config.tail_tol),
            output.format_float(config.conv_tol),
            config.nmax_cap,
        ),
    ]
    if extra:
        lines.extend(extra)
    return lines


def _config_jsonable(config: RunConfig) -> dict:
    p = config.params
    return {
        "mode": config.mode,
        "omega0": p.omega0,
        "kappa": p.kappa,
        "chi": p.chi,
        "z": output.format_complex(p.z),
        "alpha0": output.format_complex(p.alpha0),
        "t_max": config.t_max,
        "dt": config.sample_dt,
        "ode_tol_coeffs": config.wn_tol,
        "ode_tol_oracle": config.oracle_tol,
        "series_tol": config.overlap_tol,
        "tail_tol": config.tail_tol,
        "conv_tol": config.conv_tol,
        "nmax_cap": config.nmax_cap,
    }


def _emit_single(config: RunConfig, table, jsonable: dict, extra_header=None) -> None:
    """Write one observable to --out or stdout."""
    if config.format == "json":
        payload = {"config": _config_jsonable(config), **jsonable}
        if config.out is None:
            output.dump_json(sys.stdout, payload)
        else:
            with open(config.out, "w", encoding="utf-8") as fh:
                output.dump_json(fh, payload)
        return
    names, rows = table
    if config.out is None:
        output.write_csv(sys.stdout, _header(config, extra_header), names, rows)
    else:
        with open(config.out, "w", encoding="utf-8") as fh:
            output.write_csv(fh, _header(config, extra_header), names, rows)


def _out_dir(config: RunConfig) -> Path:
    base = config.out if config.out is not None else Path(".")
    base.mkdir(parents=True, exist_ok=True)
    return base


def _write_csv_file(path: Path, header, table) -> None:
    names, rows = table
    with open(path, "w", encoding="utf-8") as fh:
        output.write_csv(fh, header, names, rows)


# ---------------------------------------------------------------------------
# click commands
# ---------------------------------------------------------------------------


def model_options(fn):
    opts = [
        click.option("--omega0", type=float, default=None, help="Oscillator frequency (> 0)."),
        click.option("--kappa", type=float, default=None, help="Pump modulation amplitude (>= 0)."),
        click.option("--chi", type=float, default=None, help="Kerr coefficient (>= 0)."),
        click.option("--z", type=str, default=None, help="Initial coherent amplitude, e.g. 3+3i."),
        click.option("--alpha0", type=str, default=None,
                     help="Averaging amplitude; defaults to |z|."),
        click.option("--t-max", "t_max", type=float, default=None, help="End of the time grid."),
        click.option("--dt", type=float, default=None, help="Sample spacing of the grid."),
        click.option("--ode-tol", "ode_tol", type=float, default=None,
                     help="Integrator rtol/atol (module defaults when omitted)."),
        click.option("--series-tol", "series_tol", type=float, default=None,
                     help="Series truncation tolerance (module defaults when omitted)."),
        click.option("--conv-tol", "conv_tol", type=float, default=None,
                     help="Truncation convergence bound on |F|^2."),
        click.option("--nmax-cap", "nmax_cap", type=int, default=None,
                     help="Largest basis size tried by the reference propagator."),
        click.option("--out", type=str, default=None,
                     help="Output file (single-observable modes) or directory (multi-file modes)."),
        click.option("--format", "format_", type=click.Choice(["csv", "json"]), default=None,
                     help="Output format."),
        click.option("--config", "config_path", type=str, default=None,
                     help="JSON file with defaults for any of the above keys."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _collect(mode, omega0, kappa, chi, z, alpha0, t_max, dt, ode_tol, series_tol,
             conv_tol, nmax_cap, out, format_, config_path) -> RunConfig:
    return parse_config(
        mode,
        {
            "omega0": omega0,
            "kappa": kappa,
            "chi": chi,
            "z": z,
            "alpha0": alpha0,
            "t_max": t_max,
            "dt": dt,
            "ode_tol": ode_tol,
            "series_tol": series_tol,
            "conv_tol": conv_tol,
            "nmax_cap": nmax_cap,
            "out": out,
            "format": format_,
        },
        config_path,
    )


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except KerrpoError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


@click.group()
@click.version_option(package_name="kerrpo")
def main():
    """Coherent-state dynamics of a pumped parametric oscillator in a Kerr medium."""


@main.command()
@model_options
@handle_errors
def coeffs(**kw):
    """Propagator coefficient trajectory a1..a4 over [0, t-max]."""
    config = _collect("coeffs", **kw)
    traj = wn_trajectory(config)
    jsonable = {
        "t": [float(t) for t in traj.times],
        "a": [
            {f"a{i}": output.format_complex(getattr(s, f"a{i}")) for i in (1, 2, 3, 4)}
            for s in traj.states
        ],
        "residual_unitarity": [float(r) for r in traj.residuals],
    }
    _emit_single(config, output.trajectory_table(traj), jsonable)


@main.command()
@model_options
@handle_errors
def pk(**kw):
    """Photon-number distribution P_k at t = t-max."""
    config = _collect("pk", **kw)
    dist = run_pk(config)
    _emit_single(
        config,
        output.distribution_table(dist),
        {"distribution": output.distribution_jsonable(dist)},
        extra_header=[f"time: {output.format_float(dist.time)}"],
    )


@main.command()
@model_options
@handle_errors
def autocorr(**kw):
    """Autocorrelation overlap F(t) from the product-form propagator."""
    config = _collect("autocorr", **kw)
    series = run_autocorr(config)
    _emit_single(config, output.timeseries_table(series),
                 {"series": output.timeseries_jsonable(series)})


@main.command()
@model_options
@handle_errors
def oracle(**kw):
    """Converged reference F(t) from the exact Fock-basis propagation."""
    config = _collect("oracle", **kw)
    series, report = run_oracle(config)
    if config.format == "json" or config.out is None:
        _emit_single(
            config,
            output.timeseries_table(series),
            {"series": output.timeseries_jsonable(series),
             "convergence": report.to_jsonable()},
            extra_header=[f"oracle_N: {report.n_final}"],
        )
        if config.format == "csv":
            click.echo(f"converged at N={report.n_final}", err=True)
        return
    _write_csv_file(config.out, _header(config, [f"oracle_N: {report.n_final}"]),
                    output.timeseries_table(series))
    conv_path = config.out.with_suffix(config.out.suffix + ".convergence.json")
    with open(conv_path, "w", encoding="utf-8") as fh:
        output.dump_json(fh, report.to_jsonable())
    click.echo(f"converged at N={report.n_final}; wrote {config.out} and {conv_path}")


@main.command()
@model_options
@handle_errors
def revivals(**kw):
    """Detected |F|^2 revival peaks (threshold 0.5) and the revival period."""
    config = _collect("revivals", **kw)
    peaks, t_rev = run_revivals(config)
    extra = [] if t_rev is None else [f"revival_time: {output.format_float(t_rev)}"]
    table = (["t_peak", "height"], [[t, h] for t, h in peaks])
    jsonable = {
        "revival_time": t_rev,
        "peaks": [{"t": t, "height": h} for t, h in peaks],
    }
    _emit_single(config, table, jsonable, extra_header=extra)


def _emit_compare(config: RunConfig, report: CompareReport, prefix: str) -> None:
    report_json = {
        "config": _config_jsonable(config),
        "sup_abs2_diff": report.sup_abs2_diff,
        "time_of_max_diff": report.time_of_max_diff,
        "oracle_N": report.oracle_n,
        "oracle_norm_drift": report.oracle_norm_drift,
        "bound": report.bound,
        "within_bound": report.within_bound,
    }
    if config.format == "json":
        payload = {
            **report_json,
            "approx": output.timeseries_jsonable(report.approx_series),
            "oracle": output.timeseries_jsonable(report.oracle_series),
        }
        if config.out is None:
            output.dump_json(sys.stdout, payload)
        else:
            out = _out_dir(config) / f"{prefix}.json"
            with open(out, "w", encoding="utf-8") as fh:
                output.dump_json(fh, payload)
    else:
        base = _out_dir(config)
        extra = [f"oracle_N: {report.oracle_n}"]
        _write_csv_file(base / f"{prefix}_approx.csv", _header(config),
                        output.timeseries_table(report.approx_series))
        _write_csv_file(base / f"{prefix}_oracle.csv", _header(config, extra),
                        output.timeseries_table(report.oracle_series))
        with open(base / f"{prefix}_report.json", "w", encoding="utf-8") as fh:
            output.dump_json(fh, report_json)
    verdict = "within" if report.within_bound else "EXCEEDS"
    click.echo(
        f"sup |F|^2 difference: {report.sup_abs2_diff:.6g} at t = "
        f"{report.time_of_max_diff:.6g} (oracle N={report.oracle_n}); "
        f"{verdict} bound {report.bound}",
        err=(config.out is None and config.format == "json"),
    )


@main.command()
@model_options
@handle_errors
def compare(**kw):
    """Product-form result against the converged reference, with sup-difference report."""
    config = _collect("compare", **kw)
    _emit_compare(config, run_compare(config), "compare")


@main.command()
@model_options
@handle_errors
def fig1(**kw):
    """Preset: number distributions at t = 0, 2pi, 6pi (chi=0, kappa=0.05, z=3+3i)."""
    config = _collect("fig1", **kw)
    config = replace(config, params=FIG1_PARAMS)
    dists = run_fig1(config)
    labels = ("t0", "t2pi", "t6pi")
    if config.format == "json":
        payload = {
            "config": _config_jsonable(config),
            "distributions": {
                lab: output.distribution_jsonable(d) for lab, d in zip(labels, dists)
            },
        }
        if config.out is None:
            output.dump_json(sys.stdout, payload)
            return
        with open(_out_dir(config) / "fig1.json", "w", encoding="utf-8") as fh:
            output.dump_json(fh, payload)
        return
    base = _out_dir(config)
    for lab, dist in zip(labels, dists):
        _write_csv_file(
            base / f"fig1_{lab}.csv",
            _header(config, [f"time: {output.format_float(dist.time)}"]),
            output.distribution_table(dist),
        )
    click.echo(f"wrote fig1_{{{','.join(labels)}}}.csv in {base}")


@main.command()
@model_options
@handle_errors
def fig2(**kw):
    """Preset: |F(t)|^2 panels (a) kappa=0.05 chi=0, (b) kappa=0 chi=0.25, (c) both 0.25."""
    config = _collect("fig2", **kw)
    panels, reference = run_fig2(config)
    if config.format == "json":
        payload = {
            "config": _config_jsonable(config),
            "panels": {k: output.timeseries_jsonable(v) for k, v in panels.items()},
            "reference": output.timeseries_jsonable(reference),
        }
        if config.out is None:
            output.dump_json(sys.stdout, payload)
            return
        with open(_out_dir(config) / "fig2.json", "w", encoding="utf-8") as fh:
            output.dump_json(fh, payload)
        return
    base = _out_dir(config)
    for key, series in panels.items():
        cfg = replace(config, params=FIG2_PARAMS[key])
        _write_csv_file(base / f"fig2_{key}.csv", _header(cfg),
                        output.timeseries_table(series))
    ref_cfg = replace(config, params=FIG2_PARAMS["a"])
    _write_csv_file(base / "fig2_reference.csv",
                    _header(ref_cfg, ["reference: free coherent state"]),
                    output.timeseries_table(reference))
    click.echo(f"wrote fig2_{{a,b,c,reference}}.csv in {base}")


@main.command()
@model_options
@handle_errors
def fig3(**kw):
    """Preset: compare run at kappa=0.25, chi=0.25, z=2 (agreement figure)."""
    config = _collect("fig3", **kw)
    config = replace(config, params=FIG3_PARAMS)
    _emit_compare(config, run_compare(config), "fig3")


if __name__ == "__main__":
    main()
