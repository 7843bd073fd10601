"""``omsim`` command line.

Every subcommand reads a JSON parameter file (``--config``; the reference
device when omitted), applies ``--set key=value`` overrides in config units
and writes its data to ``--out``.  ``--out -`` (the default except for
``figure``) sends data to standard output; anything else is a file or a
directory and progress messages go to standard error.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 I/O error.
Errors are reported as one JSON object on a single line of standard error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import effective_mass as em
from . import figures as fig
from . import linear_response as lr
from . import multistability as ms
from . import steady_state as ss
from .errors import NoConvergence, NumericalError, OmsimError, OutputError, ParameterError
from .params import CONFIG_KEYS, from_config, reference_params, to_config

SUBCOMMANDS = ("validate", "steady", "multistab", "effmass", "spectrum", "figure")

# sweep variable -> (parameter attribute, multiply by Omega_m?)
SWEEP_VARS = {
    "pc": ("Pc", False),
    "delta1": ("Delta1", True),
    "delta2": ("Delta2", True),
    "omega": ("Omega", True),
}
ALLOWED_SWEEPS = {
    "multistab": ("pc", "delta1"),
    "effmass": ("delta1", "delta2"),
    "spectrum": ("omega",),
}
DEFAULT_OUT = "out"
DEFAULT_SWEEPS = {"multistab": "pc:0:0.05:500", "spectrum": "omega:0.5:1.5:1024"}


class UsageError(ParameterError):
    def __init__(self, message):
        super().__init__("argv", message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _integer(text, minimum):
    # accepts scientific notation such as 1e3
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x.is_integer() or x < minimum:
        raise argparse.ArgumentTypeError(f"expected an integer >= {minimum}, got {text!r}")
    return int(x)


def _positive_int(text):
    return _integer(text, 1)


def _index(text):
    return _integer(text, 0)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON parameter file (reference device if omitted)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        help="override one config key; repeatable")
    common.add_argument("--out", metavar="DIR|-",
                        help="output file or directory (default ./out), "
                             "'-' for standard output")
    common.add_argument("--format", choices=("csv", "json"),
                        help="output format (default depends on the subcommand)")

    parser = _Parser(prog="omsim", description="Double-cavity optomechanics toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND",
                                parser_class=_Parser)
    sub.required = True

    sub.add_parser("validate", parents=[common],
                   help="check parameters and print the normalised set")
    p = sub.add_parser("steady", parents=[common], help="mean-field steady state")
    p.add_argument("--seed-grid", type=_positive_int, metavar="N",
                   help="search N seeds for every steady state")
    p = sub.add_parser("multistab", parents=[common],
                       help="quintic branches with stability along a sweep")
    p.add_argument("--sweep", metavar="VAR:FROM:TO:POINTS",
                   help="pc [W] or delta1 [Omega_m]; default pc:0:0.05:500")
    p = sub.add_parser("effmass", parents=[common], help="effective mirror masses")
    p.add_argument("--sweep", metavar="VAR:FROM:TO:POINTS",
                   help="delta1 or delta2 [Omega_m]")
    p = sub.add_parser("spectrum", parents=[common], help="probe response spectrum")
    p.add_argument("--sweep", metavar="VAR:FROM:TO:POINTS",
                   help="omega [Omega_m]; default omega:0.5:1.5:1024")
    p.add_argument("--seed-grid", type=_positive_int, metavar="N",
                   help="seeds for the steady-state search with --full-model")
    p.add_argument("--branch", type=_index, default=0, metavar="K",
                   help="steady-state branch index, ascending in x1 (default 0)")
    p.add_argument("--full-model", action="store_true",
                   help="use the unconstrained steady state instead of equal "
                        "effective detunings")
    p = sub.add_parser("figure", parents=[common], help="reproduce a figure preset")
    p.add_argument("figure_id", metavar="ID",
                   help="one of " + ", ".join(fig.FIGURE_IDS))
    p.add_argument("--points", type=_positive_int, metavar="N",
                   help="override the sweep resolution")
    return parser


# --------------------------------------------------------------------------
# inputs

def parse_sweep(text: str, command: str, Omega_m: float) -> fig.Sweep:
    """``var:from:to:points`` in config units to an SI :class:`figures.Sweep`."""
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"sweep must look like var:from:to:points, got {text!r}")
    var = parts[0].lower()
    allowed = ALLOWED_SWEEPS.get(command, ())
    if var not in allowed:
        raise UsageError(f"{command} cannot sweep {var!r}; choose from {list(allowed)}")
    try:
        start, stop = float(parts[1]), float(parts[2])
        points = _positive_int(parts[3])
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad sweep {text!r}: {exc}") from None
    if points < 2:
        raise UsageError("a sweep needs at least 2 points")
    attr, scaled = SWEEP_VARS[var]
    factor = Omega_m if scaled else 1.0
    return fig.Sweep(attr, start * factor, stop * factor, points)


def _read_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ParameterError("config", f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise ParameterError("config", f"{path}: expected a JSON object")
    return cfg


def load_params(config_path, overrides):
    if config_path:
        cfg = _read_config(config_path)
    else:
        cfg = to_config(reference_params())
    for item in overrides:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        if key not in CONFIG_KEYS:
            raise ParameterError(key, f"unknown config key {key!r}")
        try:
            cfg[key] = float(value)
        except ValueError:
            raise ParameterError(key, f"value for {key!r} is not a number: {value!r}") from None
    return from_config(cfg)


# --------------------------------------------------------------------------
# outputs

def _emit(text: str, out, default_name: str):
    if out == "-":
        sys.stdout.write(text)
        return
    path = Path(DEFAULT_OUT if out is None else out)
    if path.suffix.lower() not in (".csv", ".json", ".dat"):
        path = path / default_name
    fig._write(path, text)
    print(f"wrote {path}", file=sys.stderr)


def _table(columns, rows, fmt, extra=None):
    if fmt == "csv":
        return fig.csv_text(columns, rows)
    obj = {"columns": list(columns), "rows": [dict(zip(columns, r)) for r in rows]}
    if extra:
        obj.update(extra)
    return fig.json_text(obj)


def _cmd_validate(params, args):
    # the normalised set is echoed unless a destination is given
    body = {"params": to_config(params), "advisories": list(params.advisories)}
    _emit(fig.json_text(body), args.out or "-", "params.json")


def _cmd_steady(params, args):
    method = "newton"
    if args.seed_grid:
        states = ss.find_steady_states(params, n_seeds=args.seed_grid)
    else:
        # damped Picard only reaches branches where its map contracts
        try:
            states = [ss.solve_fixed_point(params)]
            method = "picard"
        except NoConvergence:
            print("picard iteration from x = 0 did not converge; "
                  "searching 64 seeds with newton", file=sys.stderr)
            states = ss.find_steady_states(params, n_seeds=64)
            if not states:
                raise
    records = [dict(s.as_dict(), method=method) for s in states]
    if (args.format or "json") == "csv":
        cols = tuple(records[0]) if records else ()
        text = fig.csv_text(cols, [tuple(r.values()) for r in records])
    else:
        text = fig.json_text({"states": records,
                              "omega_c_hz": fig.provenance(params)["omega_c_hz"],
                              "advisories": list(params.advisories)})
    _emit(text, args.out, f"steady.{args.format or 'json'}")


def _cmd_multistab(params, args):
    sw = parse_sweep(args.sweep or DEFAULT_SWEEPS["multistab"], "multistab", params.Omega_m)
    sets = ms.sweep_branches(params, sw.variable, sw.start, sw.stop, sw.points)
    failed = [[bs.sweep_value, bs.error] for bs in sets if bs.error]
    for value, err in failed:
        print(f"point {value!r} failed: {err}", file=sys.stderr)
    fmt = args.format or "csv"
    text = _table(fig.BRANCH_COLUMNS, fig.branch_rows(sets), fmt,
                  {"failed_points": failed, "provenance": fig.provenance(params)})
    _emit(text, args.out, f"multistab.{fmt}")


def _cmd_effmass(params, args):
    if args.sweep:
        sw = parse_sweep(args.sweep, "effmass", params.Omega_m)
        rows = fig.mass_rows(params, sw.variable, sw.values())
        fmt = args.format or "csv"
        text = _table(fig.MASS_COLUMNS, rows, fmt, {"provenance": fig.provenance(params)})
        _emit(text, args.out, f"effmass.{fmt}")
        return
    rep = em.report(params)
    fmt = args.format or "json"
    if fmt == "csv":
        row = fig.mass_row(params, params.Delta2 / params.Omega_m)
        text = fig.csv_text(fig.MASS_COLUMNS, [row])
    else:
        body = {
            "M_prime_kg": rep.M_prime,
            "M_doubleprime_kg": rep.M_doubleprime,
            "M_prime_oracle_kg": rep.M_prime_oracle,
            "M_doubleprime_oracle_kg": rep.M_doubleprime_oracle,
            "relative_deviation": rep.deviation,
            "pole": rep.pole,
            "limits": list(rep.limits),
            "coefficients": rep.coefficients.as_dict() if rep.coefficients else None,
            "provenance": fig.provenance(params),
        }
        text = fig.json_text(body)
    _emit(text, args.out, f"effmass.{fmt}")


def _cmd_spectrum(params, args):
    sw = parse_sweep(args.sweep or DEFAULT_SWEEPS["spectrum"], "spectrum", params.Omega_m)
    if args.full_model:
        states = ss.find_steady_states(params, n_seeds=args.seed_grid or 64)
    else:
        states = ms.equal_detuning_states(params)
    if not 0 <= args.branch < len(states):
        raise UsageError(f"branch {args.branch} requested, {len(states)} available")
    pts = lr.spectrum(params, states[args.branch], sw.values(), branch_index=args.branch)
    fmt = args.format or "csv"
    text = _table(fig.SPECTRUM_COLUMNS, fig.spectrum_rows(pts, params.Omega_m), fmt,
                  {"branch_count": len(states), "provenance": fig.provenance(params)})
    _emit(text, args.out, f"spectrum.{fmt}")


def _cmd_figure(params, args):
    if args.config or args.set:
        raise UsageError("figure presets carry their own parameters; "
                         "--config and --set are not accepted")
    result = fig.run_figure(args.figure_id, args.points)
    for f in result.features:
        print(f"{result.preset.figure_id} {f.name}: {f.status} ({f.detail})", file=sys.stderr)
    out = args.out if args.out is not None else DEFAULT_OUT
    if out == "-":
        fmt = args.format or "csv"
        text = (fig.csv_text(result.columns, result.rows) if fmt == "csv"
                else fig.json_text(fig.result_dict(result)))
        sys.stdout.write(text)
        return
    d = fig.write_figure(result, out)
    print(f"wrote {d}", file=sys.stderr)


COMMANDS = {
    "validate": _cmd_validate,
    "steady": _cmd_steady,
    "multistab": _cmd_multistab,
    "effmass": _cmd_effmass,
    "spectrum": _cmd_spectrum,
    "figure": _cmd_figure,
}


def _report(exc: BaseException, code: int) -> int:
    body = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("name", "path", "iterations", "last_residual", "condition", "value"):
        v = getattr(exc, attr, None)
        if v is not None:
            body[attr] = v
    print(json.dumps(fig._jsonable(body), sort_keys=True), file=sys.stderr)
    return code


def run(argv=None) -> int:
    """Run one invocation and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
        params = None if args.command == "figure" else load_params(args.config, args.set)
        COMMANDS[args.command](params, args)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else 0
    except ParameterError as exc:
        return _report(exc, 1)
    except NumericalError as exc:
        return _report(exc, 2)
    except (OutputError, OSError) as exc:
        return _report(exc, 3)
    except OmsimError as exc:
        return _report(exc, 1)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return _report(exc, 2)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
