"""Command-line front end.

Subcommands:
    spring    closed-form trajectory columns (t,x,v,m,k,omega,energy) as CSV
    simulate  adaptive integration of spring-reduced | spring-general | econ
    fit       log-periodic fit of a CSV time series, JSON report
    check     named invariant suites, pass/fail table

Data goes to standard output (or --output PATH), diagnostics to standard
error.  Exit codes: 0 success, 2 usage/input error, 3 numerical failure,
4 fit failure.  Numbers are written with 17 significant digits and '\\n'
line endings, so identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import checks
from .econ import EconConfig
from .errors import (DomainError, FitError, PreconditionError, QuadratureError,
                     ScheduleError, StepSizeError, WindowError)
from .fitter import ENVELOPES, TimeSeries, fit
from .integrator import (MassStiffnessSchedule, integrate_econ,
                         integrate_spring_general, integrate_spring_reduced)
from .oscillator import SpringConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_FIT = 4

_TOP_LEVEL_KEYS = {"spec_version", "spring", "econ", "fit", "integrate"}
_SECTION_KEYS = {
    "spring": {"m0", "t0", "k0", "x0", "x1"},
    "econ": {"gamma", "lambda", "ell", "ell0", "p_star", "d_star", "theta"},
    "fit": {"theta_min", "theta_max", "envelope", "fit_shift", "t_ref", "n_grid", "column"},
    "integrate": {"kind", "t_start", "t_end", "tol", "initial"},
}

SPRING_DEFAULTS = {"m0": 1.0, "t0": 1.0, "k0": 4.0, "x0": 1.0, "x1": 0.0}
ECON_DEFAULTS = {"gamma": 1.0, "lambda": 1.0, "ell": 1.0, "ell0": 1.0,
                 "p_star": 10.0, "d_star": 5.0, "theta": 2.0}


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    if data.get("spec_version") != 1:
        raise UsageError("config requires \"spec_version\": 1")
    for section, keys in _SECTION_KEYS.items():
        if section in data:
            if not isinstance(data[section], dict):
                raise UsageError(f"config section {section!r} must be an object")
            bad = set(data[section]) - keys
            if bad:
                raise UsageError(f"unknown keys in config section {section!r}: {sorted(bad)}")
    return data


def _merge(defaults, section, overrides):
    """defaults <- config file section <- explicit command-line flags."""
    out = dict(defaults)
    out.update(section)
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


def _spring_from(args, config) -> SpringConfig:
    params = _merge(SPRING_DEFAULTS, config.get("spring", {}),
                    {"m0": args.m0, "t0": args.t0, "k0": args.k0,
                     "x0": args.x0, "x1": args.x1})
    return SpringConfig(**params)


def _econ_from(args, config) -> EconConfig:
    params = _merge(ECON_DEFAULTS, config.get("econ", {}),
                    {"gamma": args.gamma, "lambda": args.lam, "ell": args.ell,
                     "ell0": args.ell0, "p_star": args.p_star,
                     "d_star": args.d_star, "theta": args.theta})
    return EconConfig.from_dict(params)


def _open_output(args):
    if args.output is None:
        return sys.stdout, False
    return open(args.output, "w", encoding="utf-8", newline=""), True


def _write_csv(args, header, rows):
    stream, owned = _open_output(args)
    try:
        stream.write(",".join(header) + "\n")
        for row in rows:
            stream.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if owned:
            stream.close()


def _grid(args):
    t_start = args.t_start if args.t_start is not None else 1.0
    t_end = args.t_end if args.t_end is not None else 100.0
    points = args.points if args.points is not None else 257
    if points < 1:
        raise UsageError("--points must be at least 1")
    if not (t_start > 0.0):
        raise UsageError("--t-start must be positive")
    if points == 1:
        return np.array([t_start])
    if not (t_end > t_start):
        raise UsageError("--t-end must exceed --t-start")
    if args.spacing == "log":
        return np.geomspace(t_start, t_end, points)
    return np.linspace(t_start, t_end, points)


def cmd_spring(args) -> int:
    config = _load_config(args.config)
    spring = _spring_from(args, config)
    grid = _grid(args)
    rows = ((t, spring.position(t), spring.velocity(t), spring.mass_at(t),
             spring.stiffness_at(t), spring.omega_at(t), spring.energy(t))
            for t in grid)
    _write_csv(args, ["t", "x", "v", "m", "k", "omega", "energy"], rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    section = config.get("integrate", {})
    t_start = args.t_start if args.t_start is not None else section.get("t_start")
    t_end = args.t_end if args.t_end is not None else section.get("t_end")
    tol = args.tol if args.tol is not None else section.get("tol", 1e-10)
    initial = args.initial if args.initial is not None else section.get("initial")

    if args.kind == "econ":
        econ = _econ_from(args, config)
        if t_start is None or t_end is None:
            t_start, t_end = 5.5, 9.5
        sol = integrate_econ(econ, initial, t_start, t_end, tol)
        header = ["t", "P", "S"]
    else:
        spring = _spring_from(args, config)
        if t_start is None or t_end is None:
            t_start, t_end = spring.t0, 100.0 * spring.t0
        if initial is None:
            initial = (spring.position(t_start), spring.velocity(t_start))
        if args.kind == "spring-reduced":
            sol = integrate_spring_reduced(spring, initial, t_start, t_end, tol)
        else:
            schedule = MassStiffnessSchedule.from_spring(spring, (t_start, t_end))
            sol = integrate_spring_general(schedule, initial, t_start, t_end, tol)
        header = ["t", "x", "v"]

    rows = ((t, s[0], s[1]) for t, s in zip(sol.times, sol.states))
    _write_csv(args, header, rows)
    return EXIT_OK


def _read_series(args) -> TimeSeries:
    if args.input == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(args.input, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.input!r}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if len(rows) < 2:
        raise UsageError("CSV input needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise UsageError("CSV input needs a time column and a value column")
    if args.column is None:
        col = 1
    else:
        try:
            col = header.index(args.column)
        except ValueError:
            raise UsageError(f"column {args.column!r} not in header {header}") from None
    times = []
    values = []
    for row in rows[1:]:
        if len(row) <= col:
            raise UsageError(f"malformed CSV row: {row!r}")
        try:
            times.append(float(row[0]))
            values.append(float(row[col]))
        except ValueError as exc:
            raise UsageError(f"malformed CSV row: {row!r}") from exc
    try:
        return TimeSeries(times=np.array(times), values=np.array(values),
                          label=header[col])
    except PreconditionError as exc:
        raise UsageError(str(exc)) from exc


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    section = config.get("fit", {})
    if args.column is None and "column" in section:
        args.column = section["column"]
    series = _read_series(args)
    theta_min = args.theta_min if args.theta_min is not None else section.get("theta_min", 0.5)
    theta_max = args.theta_max if args.theta_max is not None else section.get("theta_max", 10.0)
    envelope = args.envelope if args.envelope is not None else section.get("envelope", "constant")
    fit_shift = args.fit_shift or bool(section.get("fit_shift", False))
    t_ref = args.t_ref if args.t_ref is not None else section.get("t_ref")
    n_grid = args.n_grid if args.n_grid is not None else section.get("n_grid", 512)

    result = fit(series, (theta_min, theta_max), envelope=envelope,
                 fit_shift=fit_shift, t_ref=t_ref, n_grid=n_grid)
    report = {
        "theta": result.theta,
        "amp_sin": result.amp_sin,
        "amp_cos": result.amp_cos,
        "offset": result.offset,
        "t_ref": result.t_ref,
        "t_shift": result.t_shift,
        "envelope": result.envelope,
        "rms_residual": result.rms_residual,
    }
    stream, owned = _open_output(args)
    try:
        stream.write(json.dumps(report, indent=2) + "\n")
    finally:
        if owned:
            stream.close()
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        results = checks.run_suite(args.suite)
    except KeyError:
        raise UsageError(
            f"unknown suite {args.suite!r}; choose from {checks.suite_names()}") from None
    stream, owned = _open_output(args)
    try:
        width = max(len(f"{r.suite}.{r.name}") for r in results)
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            stream.write(f"{status}  {f'{r.suite}.{r.name}':<{width}}  {r.detail}\n")
        n_fail = sum(not r.passed for r in results)
        stream.write(f"{len(results) - n_fail}/{len(results)} checks passed\n")
    finally:
        if owned:
            stream.close()
    return EXIT_OK if n_fail == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logspring",
        description="Log-periodic variable-mass spring dynamics and the "
                    "demand/supply price analogue: closed forms, simulation, "
                    "fitting and invariant checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (spec_version 1)")
        p.add_argument("--output", help="write data here instead of standard output")

    def add_spring_params(p):
        p.add_argument("--m0", type=float, help="mass at the reference time")
        p.add_argument("--t0", type=float, help="reference time")
        p.add_argument("--k0", type=float, help="stiffness at the reference time")
        p.add_argument("--x0", type=float, help="sine amplitude")
        p.add_argument("--x1", type=float, help="cosine amplitude")

    def add_econ_params(p):
        p.add_argument("--gamma", type=float, help="price response to the stock flow")
        p.add_argument("--lambda", dest="lam", type=float,
                       help="price response to stock-level deviations")
        p.add_argument("--ell", type=float, help="demand sensitivity of the optimal stock")
        p.add_argument("--ell0", type=float, help="base optimal stock level")
        p.add_argument("--p-star", type=float, help="equilibrium price")
        p.add_argument("--d-star", type=float, help="equilibrium demand (= supply)")
        p.add_argument("--theta", type=float, help="log-periodic angle of the coefficients")

    p = sub.add_parser("spring", help="closed-form trajectory as CSV")
    add_common(p)
    add_spring_params(p)
    p.add_argument("--t-start", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--spacing", choices=["linear", "log"], default="log")
    p.set_defaults(func=cmd_spring)

    p = sub.add_parser("simulate", help="adaptive integration as CSV")
    add_common(p)
    add_spring_params(p)
    add_econ_params(p)
    p.add_argument("kind", choices=["spring-reduced", "spring-general", "econ"])
    p.add_argument("--t-start", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--initial", type=float, nargs=2, metavar=("A", "B"),
                   help="initial state: x v for springs, P S for econ")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="log-periodic fit of a CSV series, JSON report")
    add_common(p)
    p.add_argument("input", help="CSV path, or - for standard input")
    p.add_argument("--column", help="value column name (default: second column)")
    p.add_argument("--theta-min", type=float)
    p.add_argument("--theta-max", type=float)
    p.add_argument("--envelope", choices=list(ENVELOPES))
    p.add_argument("--fit-shift", action="store_true",
                   help="also fit the additive time shift")
    p.add_argument("--t-ref", type=float)
    p.add_argument("--n-grid", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("check", help="run a named invariant suite")
    add_common(p)
    p.add_argument("suite", help="oscillator | econ | tsallis | all")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream consumer closed the pipe; not an error
        devnull = open(os.devnull, "w", encoding="utf-8")
        sys.stdout = devnull
        return EXIT_OK
    except (UsageError, DomainError, PreconditionError, WindowError,
            ScheduleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StepSizeError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FitError as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
