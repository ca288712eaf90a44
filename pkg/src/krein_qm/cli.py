"""Batch command-line front end.

Every subcommand writes a CSV (header line, fixed row order, floats with 17
significant digits) to ``--out`` or stdout and a one-line summary to stderr.
Parameters come from defaults, then a JSON ``--config`` file, then flags.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import core
from . import oscillators as lat
from .csvio import write_csv
from .selftest import format_report, run_checks
from .tables import (
    bells_rows,
    contour_rows,
    osc_rows,
    propcheck_rows,
    spectrum2d_rows,
    spectrum4d_rows,
)

__all__ = ["main", "run", "UsageError", "DEFAULTS"]

JOBS_ENV = "KREIN_QM_JOBS"


class UsageError(Exception):
    """Bad command line or configuration; exit code 1."""


class NumericalFailure(Exception):
    """Exit code 2."""


DEFAULTS: dict[str, dict] = {
    "bells": {"p": 0.3, "n": [10, 40, 160], "index": 0},
    "osc": {"theta": [0.25, 0.5, 1.0], "phase_max": 4 * np.pi, "n_phase": 201},
    "nu-contours": {
        "levels": [0.01, 0.1],
        "loe": 1.0,
        "channel": "as",
        "dm2_min": 0.01,
        "dm2_max": 100.0,
        "n_dm2": 200,
        "theta_min": 0.001,
        "theta_max": 1.0,
        "n_theta": 200,
        "spacing": "log",
        "models": ["3m1", "3p1"],
    },
    "spectrum2d": {
        "g_min": 0.0,
        "g_max": 0.4,
        "n_g": 11,
        "x_max": 10.0,
        "n_points": 201,
        "n_levels": 10,
        "k_lin": 0.0,
        "quad": 0.0,
        "lam": 0.0,
        "null_tol": core.DEFAULT_NULL_TOL,
    },
    "spectrum4d": {
        "wp": 1.0,
        "wm": 1.5,
        "g_min": 0.0,
        "g_max": 0.5,
        "n_g": 6,
        "lam_ratio": 0.5,
        "k_max": 10.0,
        "x_max": 7.0,
        "n1": 101,
        "n2": 101,
        "n_levels": 10,
        "null_tol": core.DEFAULT_NULL_TOL,
    },
    "propcheck": {"wp": 1.0, "wm": 2.0, "omega": [0.0, 0.5, 1.5, 3.0, 10.0]},
    "selftest": {"null_tol": core.DEFAULT_NULL_TOL},
}

_LISTS = {"n": int, "theta": float, "levels": float, "omega": float, "models": str}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _str_list(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameters (flags win)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--jobs", type=int, help=f"parallel workers (default: ${JOBS_ENV} or 1)")

    parser = _Parser(prog="krein-qm", description="Indefinite-norm quantum mechanics: batch computations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bells", parents=[common], help="repeated-state bell curves")
    p.add_argument("--p", type=float)
    p.add_argument("--n", type=_int_list, help="comma-separated repeat counts")
    p.add_argument("--index", type=int)

    p = sub.add_parser("osc", parents=[common], help="positive/negative-norm oscillation curves")
    p.add_argument("--theta", type=_float_list)
    p.add_argument("--phase-max", dest="phase_max", type=float, help="largest dE*t")
    p.add_argument("--n-phase", dest="n_phase", type=int)

    p = sub.add_parser("nu-contours", parents=[common], help="3-1 vs 3+1 probability contours")
    p.add_argument("--levels", type=_float_list)
    p.add_argument("--loe", type=float, help="L/E in km/GeV")
    p.add_argument("--channel", help="'as' or 'source,detected' flavours (e, mu, tau)")
    for name in ("dm2_min", "dm2_max", "theta_min", "theta_max"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    p.add_argument("--n-dm2", dest="n_dm2", type=int)
    p.add_argument("--n-theta", dest="n_theta", type=int)
    p.add_argument("--spacing", choices=("log", "linear"))
    p.add_argument("--models", type=_str_list)

    p = sub.add_parser("spectrum2d", parents=[common], help="lattice ghost-oscillator spectrum over g")
    for name in ("g_min", "g_max", "x_max", "k_lin", "quad", "lam", "null_tol"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    for name in ("n_g", "n_points", "n_levels"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=int)

    p = sub.add_parser("spectrum4d", parents=[common], help="Pais-Uhlenbeck lattice spectrum over g")
    for name in ("wp", "wm", "g_min", "g_max", "lam_ratio", "k_max", "x_max", "null_tol"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float)
    for name in ("n_g", "n1", "n2", "n_levels"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=int)

    p = sub.add_parser("propcheck", parents=[common], help="propagator partial-fraction identity")
    p.add_argument("--wp", type=float)
    p.add_argument("--wm", type=float)
    p.add_argument("--omega", type=_float_list)

    p = sub.add_parser("selftest", parents=[common], help="run the embedded acceptance checks")
    p.add_argument("--null-tol", dest="null_tol", type=float)
    return parser


def _coerce(key: str, value, default):
    if key in _LISTS:
        kind = _LISTS[key]
        if isinstance(value, str):
            value = value.split(",")
        if not isinstance(value, list):
            raise UsageError(f"config key {key!r} must be a list")
        try:
            return [kind(v) if kind is not str else str(v).strip() for v in value]
        except (TypeError, ValueError):
            raise UsageError(f"config key {key!r} has a bad entry") from None
    if isinstance(default, bool) or default is None:
        return value
    try:
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"config key {key!r} must be numeric") from None
    return str(value)


def resolve_params(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    params = dict(DEFAULTS[command])
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(cfg) - set(params) - {"jobs", "out"})
        if unknown:
            raise UsageError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
        for key, value in cfg.items():
            if key in ("jobs", "out"):
                if getattr(args, key) is None:
                    setattr(args, key, value)
                continue
            params[key] = _coerce(key, value, DEFAULTS[command][key])
    for key in params:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return params


def resolve_jobs(args) -> int:
    jobs = args.jobs
    if jobs is None:
        env = os.environ.get(JOBS_ENV)
        if env:
            try:
                jobs = int(env)
            except ValueError:
                raise UsageError(f"{JOBS_ENV} must be an integer") from None
    jobs = 1 if jobs is None else jobs
    if not isinstance(jobs, int) or jobs < 1:
        raise UsageError("jobs must be a positive integer")
    return jobs


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot open output: {exc}") from None
    with fh:
        yield fh


def _grid(lo, hi, n, spacing):
    if n < 1:
        raise UsageError("grid sizes must be positive")
    if spacing == "log":
        if lo <= 0:
            raise UsageError("log spacing needs positive bounds")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _channel(text: str):
    if text == "as":
        return "as"
    parts = [x.strip() for x in text.replace("->", ",").split(",")]
    if len(parts) != 2:
        raise UsageError("channel must be 'as' or 'source,detected'")
    return tuple(parts)


def _table(command: str, params: dict, jobs: int):
    """Return ``(header, rows, failure_message)``."""
    if command == "bells":
        return (*bells_rows(params["p"], params["n"], params["index"]), None)
    if command == "osc":
        phases = np.linspace(0.0, params["phase_max"], params["n_phase"])
        return (*osc_rows(params["theta"], phases), None)
    if command == "nu-contours":
        dm2 = _grid(params["dm2_min"], params["dm2_max"], params["n_dm2"], params["spacing"])
        theta = _grid(params["theta_min"], params["theta_max"], params["n_theta"], params["spacing"])
        return (
            *contour_rows(_channel(params["channel"]), params["levels"], dm2, theta, params["loe"], tuple(params["models"])),
            None,
        )
    if command == "spectrum2d":
        g = np.linspace(params["g_min"], params["g_max"], params["n_g"])
        grid = lat.Grid1D.symmetric(params["x_max"], params["n_points"])
        base = lat.PotentialSpec(params["k_lin"], params["quad"], 0.0, params["lam"])
        return (*spectrum2d_rows(g, grid, params["n_levels"], base, params["null_tol"], jobs), None)
    if command == "spectrum4d":
        g = np.linspace(params["g_min"], params["g_max"], params["n_g"])
        spec = lat.PaisUhlenbeckSpec(
            params["wp"],
            params["wm"],
            grid1=lat.Grid1D.symmetric(params["k_max"], params["n1"]),
            grid2=lat.Grid1D.symmetric(params["x_max"], params["n2"]),
        )
        header, rows, failed = spectrum4d_rows(spec, g, params["n_levels"], params["lam_ratio"], params["null_tol"], jobs)
        msg = None
        if failed:
            msg = "; ".join(f"g={p.g:.6g}: {p.error}" for p in failed)
        return header, rows, msg
    if command == "propcheck":
        return (*propcheck_rows(params["omega"], params["wp"], params["wm"]), None)
    raise UsageError(f"unknown command {command!r}")


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        params = resolve_params(args.command, args)
        jobs = resolve_jobs(args)
        if args.command == "selftest":
            results = run_checks(params["null_tol"])
            report = format_report(results)
            with _output(args.out) as fh:
                fh.write(report)
            return 0 if all(r.passed for r in results) else 2
        try:
            header, rows, failure = _table(args.command, params, jobs)
        except core.KreinError as exc:
            raise NumericalFailure(f"{type(exc).__name__}: {exc}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        with _output(args.out) as fh:
            count = write_csv(fh, header, rows)
        print(f"{args.command}: wrote {count} rows to {args.out or 'stdout'}", file=sys.stderr)
        if failure:
            raise NumericalFailure(failure)
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    sys.exit(run(argv))
