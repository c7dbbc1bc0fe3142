"""Command-line interface: JSON reports on stdout, a short summary on stderr."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import oracle
from .analysis import AnalysisReport, analyze
from .geometry import sample_curve, write_curve_csv
from .model import Face, ModelError, dump_model, load_model, validate
from .presets import PresetError, preset, preset_names
from .reversal import ReversalError, build_reversed_model
from .reversibility import DEFAULT_TOL, check_conditions
from .stationary import fit_geometric_prefactors, verify_stationary_equations

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2
ORACLE_WINDOW = 25
SIM_WINDOW = 10


class CommandError(Exception):
    pass


def _emit(doc: dict) -> None:
    json.dump(doc, sys.stdout, indent=2, default=_jsonable)
    sys.stdout.write("\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _closed_form(report: AnalysisReport):
    if report.stationary is None:
        raise CommandError(f"no closed form: verdict {report.verdict.value}"
                           + (f" ({report.reason})" if report.reason else ""))
    return report.stationary


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    report = validate(load_model(args.model, strict=False))
    _emit(report.to_dict())
    _say("valid" if report.ok else f"{len(report.violations)} violation(s)")
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_check(args) -> int:
    report = check_conditions(load_model(args.model), args.tol)
    _emit(report.to_dict())
    passed = [n for n in ("a1", "a2", "a3") if getattr(report, n).passed]
    _say(f"passed: {', '.join(passed) or 'none'}")
    return EXIT_OK


def cmd_solve(args) -> int:
    report = analyze(load_model(args.model), args.tol)
    _emit(report.to_dict())
    summary = report.verdict.value
    if report.stationary is not None:
        d = report.stationary
        summary += f": eta = ({d.eta1:.6g}, {d.eta2:.6g}), pi00 = {d.pi00:.6g}"
    _say(summary)
    return report.exit_code


def cmd_reverse(args) -> int:
    model = load_model(args.model)
    report = analyze(model, args.tol)
    dist = _closed_form(report)
    rev = build_reversed_model(model, dist)
    doc = rev.to_document()
    Path(args.output).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    _emit({"reversed_model_path": str(args.output),
           "homogeneity_residual": rev.homogeneity_residual,
           "row_sum_residual": rev.row_sum_residual,
           "self_reversed": rev.is_self_reversed(model)})
    _say(f"wrote {args.output}")
    return EXIT_OK


def cmd_verify(args) -> int:
    model = load_model(args.model)
    report = analyze(model, args.tol)
    truncated = oracle.truncated_stationary(model, args.grid)
    out: dict = {"verdict": report.verdict.value, "grid": args.grid,
                 "oracle_residual": truncated.residual}
    if args.eta is not None:
        dist = fit_geometric_prefactors(model, *args.eta)
        out["rates_source"] = "given"
    elif report.stationary is not None:
        dist = report.stationary
        out["rates_source"] = "closed form"
    else:
        g = truncated.values
        e1, e2 = g[3, 3] / g[2, 3], g[3, 3] / g[3, 2]
        dist = fit_geometric_prefactors(model, float(e1), float(e2))
        out["rates_source"] = "estimated from oracle"
    window = min(ORACLE_WINDOW, args.grid)
    out["stationary"] = dist.to_dict()
    out["balance_residual"] = verify_stationary_equations(model, dist).max_residual
    out["oracle_tv"] = oracle.total_variation(dist, truncated, window)
    out["window"] = window
    if args.steps > 0:
        sim = oracle.simulate(model, args.steps, args.seed, burn_in=args.burn_in, n=args.grid)
        w = min(SIM_WINDOW, args.grid)
        out.update(seed=args.seed, steps=args.steps,
                   simulation_tv=oracle.total_variation(sim, truncated, w),
                   simulation_window=w)
    _emit(out)
    ok = out["oracle_tv"] <= args.tv_tol
    _say(f"closed form vs truncated oracle: TV = {out['oracle_tv']:.3g} ({'ok' if ok else 'FAIL'})")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_curves(args) -> int:
    model = load_model(args.model)
    conditions = check_conditions(model, args.tol)
    constants = conditions.constants
    faces = list(Face) if constants is not None else [Face.INTERIOR]
    grid = np.geomspace(1.0 / args.zmax, args.zmax, args.points)
    grid = np.union1d(grid, [1.0])
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    written = {}
    for face in faces:
        sample = sample_curve(model, constants, face, grid)
        path = outdir / f"curve_{face.value.lower()}.csv"
        write_curve_csv(sample, path)
        written[face.value] = {"path": str(path), "points": len(sample.points),
                               "skipped": sample.skipped}
    _emit({"curves": written})
    _say(f"wrote {len(written)} curve file(s) to {outdir}")
    return EXIT_OK


def cmd_preset(args) -> int:
    model = preset(args.name)
    text = dump_model(model) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        _say(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_table(args) -> int:
    model = load_model(args.model)
    dist = _closed_form(analyze(model, args.tol))
    grid = dist.grid(args.nmax)
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["n1", "n2", "probability"])
        for n1 in range(args.nmax + 1):
            for n2 in range(args.nmax + 1):
                writer.writerow([n1, n2, repr(float(grid[n1, n2]))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structrev",
        description="Structure-reversibility analysis of two-dimensional reflecting random walks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_model(name, help_text, func, tol=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("model", help="model document (JSON)")
        if tol:
            p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                           help="relative ratio / residual tolerance (default %(default)g; "
                                "use 1e-3 for values rounded to four digits)")
        p.set_defaults(func=func)
        return p

    with_model("validate", "check the model invariants and irreducibility", cmd_validate, tol=False)
    with_model("check", "evaluate the structure-reversibility conditions", cmd_check)
    with_model("solve", "full analysis with closed-form stationary distribution", cmd_solve)
    p = with_model("reverse", "write the time-reversed model", cmd_reverse)
    p.add_argument("-o", "--output", required=True)
    p = with_model("verify", "compare the closed form with numerical oracles", cmd_verify)
    p.add_argument("--grid", type=int, default=60, help="truncation size N (default %(default)s)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--steps", type=_positive_int, default=0, help="simulation length (0 skips it)")
    p.add_argument("--burn-in", type=_positive_int, default=0)
    p.add_argument("--eta", type=float, nargs=2, metavar=("ETA1", "ETA2"),
                   help="decay rates for a geometric candidate when the model is not "
                        "structure-reversible")
    p.add_argument("--tv-tol", type=float, default=1e-3)
    p = with_model("curves", "sample the four level-one curves", cmd_curves)
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--zmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=400)
    p = with_model("table", "closed-form probabilities as CSV", cmd_table)
    p.add_argument("--nmax", type=_positive_int, required=True)
    p.add_argument("-o", "--output")
    p = sub.add_parser("preset", help="emit a named model document")
    p.add_argument("name", choices=preset_names())
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModelError, PresetError, ReversalError, CommandError, oracle.OracleError,
            OSError, ValueError) as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)})
        _say(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
