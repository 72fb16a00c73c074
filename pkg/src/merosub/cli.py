"""Command-line front end.

    merosub op eval --alpha A --beta B --z Z [--function PATH | --seed S] [--oracle]
    merosub verify --theorem T [--preset P] --seed S [--out FILE]
    merosub fuzz --theorem T [--preset P] --trials N --seed S [--mutate-conclusion] [--out FILE]
    merosub presets
    merosub curves --preset P --seed S --out DIR [--radius R]

Exit codes: 0 success, 1 counterexample found, 2 usage error, 3 numeric
degeneracy or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .disk import DECISION_TOL, DEFAULT_N, DEFAULT_RADII, DERIVATIVE_FLOOR, OUTER_RADIUS, WINDING_GUARD, DiskGrid
from .errors import DomainError, MerosubError, NumericDegeneracy, ParseError, SpecError, UsageError
from .forms import PRESETS, BaseMode, Preset, get_preset
from .lashin import LashinParams, apply_lashin, lashin_quadrature
from .series import DIVIDE_FLOOR, POWER_BASE_TOL, AnalyticSeries, MeromorphicSeries, circle_values, evaluate, read_series
from .verifier import (
    SHRINK_FACTOR,
    Classification,
    TrialInput,
    _conclusion_dominants,
    check_theorem_id,
    default_preset,
    fuzz_theorem,
    random_sigma_function,
    run_trial,
    EXTENDED_CONSTANT_SCALE,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2, 3

log = logging.getLogger("merosub")


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so run_command owns exit codes."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


# --- argument parsing ------------------------------------------------------------


def _radii(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}") from None


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad complex number {text!r}") from None


def _grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-radii", type=_radii, default=DEFAULT_RADII, help="comma-separated ascending radii, at most 0.95")
    p.add_argument("--grid-n", type=int, default=DEFAULT_N, help="samples per circle (>= 256)")


def _trial_flags(p: argparse.ArgumentParser, seed_required: bool = True) -> None:
    p.add_argument("--theorem", help="theorem id: " + ", ".join(sorted({pr.theorem for pr in PRESETS.values()})))
    p.add_argument("--preset", help="preset name (see `presets`)")
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--order", type=int, default=64)
    p.add_argument("--mode", choices=[m.value for m in BaseMode], default=BaseMode.CONVEX.value)
    p.add_argument("--mutate-conclusion", action="store_true", help="shrink the conclusion dominant toward 1 (negative control)")
    _grid_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="merosub", description="Numeric subordination checks for Lashin's operator.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    op = sub.add_parser("op", help="operator evaluation")
    op_sub = op.add_subparsers(dest="op_command", parser_class=_Parser)
    ev = op_sub.add_parser("eval", help="evaluate P^alpha_beta f at one point")
    ev.add_argument("--alpha", type=float, required=True)
    ev.add_argument("--beta", type=float, required=True)
    ev.add_argument("--z", type=_complex, required=True, help="evaluation point, e.g. 0.3+0.2j")
    src = ev.add_mutually_exclusive_group()
    src.add_argument("--function", type=Path, help="series literal file holding f")
    src.add_argument("--seed", type=int, help="draw f with the seeded generator")
    ev.add_argument("--amplitude", type=float, default=0.1)
    ev.add_argument("--order", type=int, default=64)
    ev.add_argument("--oracle", action="store_true", help="also evaluate the integral by quadrature")

    verify = sub.add_parser("verify", help="one trial at the preset's nominal parameters")
    _trial_flags(verify)
    verify.add_argument("--function", type=Path, help="series literal file holding f (overrides the seeded draw)")
    verify.add_argument("--out", type=Path)
    verify.add_argument("--record-timing", action="store_true", help="store wall time in the report")

    fuzz = sub.add_parser("fuzz", help="seeded trials with jittered parameters")
    _trial_flags(fuzz)
    fuzz.add_argument("--trials", type=int, default=200)
    fuzz.add_argument("--out", type=Path)
    fuzz.add_argument("--record-timing", action="store_true", help="store wall time in the report")

    sub.add_parser("presets", help="list presets as JSON")

    curves = sub.add_parser("curves", help="boundary-image CSV files for one trial")
    _trial_flags(curves)
    curves.add_argument("--function", type=Path)
    curves.add_argument("--radius", type=float, default=OUTER_RADIUS)
    curves.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


# --- reports ----------------------------------------------------------------------


def tolerance_block(grid: DiskGrid) -> dict:
    return {
        "decision_tol": DECISION_TOL,
        "winding_guard": WINDING_GUARD,
        "derivative_floor": DERIVATIVE_FLOOR,
        "divide_floor": DIVIDE_FLOOR,
        "power_base_tol": POWER_BASE_TOL,
        "grid_radii": list(grid.radii),
        "grid_n": grid.n,
        "shrink_factor": SHRINK_FACTOR,
        "extended_constant_scale": EXTENDED_CONSTANT_SCALE,
    }


def reproducible_argv(argv: Sequence[str]) -> list[str]:
    """The command minus its output destination, which does not affect the result."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            out.append(a)
    return out


def report_document(argv: Sequence[str], theorem: Optional[str], preset: Optional[str], kind: str, payload: dict,
                    grid: DiskGrid, wall_time: Optional[float]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": reproducible_argv(argv),
        "theorem": theorem,
        "preset": preset,
        "kind": kind,
        "payload": payload,
        "tolerances": tolerance_block(grid),
        "wall_time": wall_time,
    }


def serialize(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=True) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(doc: dict, path: Path) -> None:
    """Write a report as JSON, atomically (temp file + rename)."""
    _atomic_write(path, serialize(doc))


def curve_rows(series: AnalyticSeries, radius: float, n: int) -> str:
    if radius > OUTER_RADIUS:
        raise DomainError(f"curve radius must be <= {OUTER_RADIUS}")
    theta = 2 * np.pi * np.arange(n) / n
    vals = circle_values(series, radius, n)
    lines = ["theta,re,im"]
    lines += [f"{t!r},{v.real!r},{v.imag!r}" for t, v in zip(theta.tolist(), vals.tolist())]
    return "\n".join(lines) + "\n"


def emit_curves(label: str, series: AnalyticSeries, radius: float, n: int, path: Path) -> None:
    """CSV with the header theta,re,im; label, radius and count go to the caller's index."""
    _atomic_write(path, curve_rows(series, radius, n))


# --- commands ---------------------------------------------------------------------


def _resolve_preset(args) -> Preset:
    if args.theorem is None and args.preset is None:
        raise UsageError("give --theorem or --preset")
    if args.theorem is not None:
        check_theorem_id(args.theorem)
    name = args.preset or default_preset(args.theorem)
    preset = get_preset(name)
    if args.theorem is not None and preset.theorem != args.theorem:
        raise UsageError(f"preset {preset.name} belongs to theorem {preset.theorem}, not {args.theorem}")
    return preset


def _grid(args) -> DiskGrid:
    try:
        return DiskGrid(tuple(args.grid_radii), args.grid_n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _nominal_input(preset: Preset, args) -> TrialInput:
    return TrialInput(
        theorem=preset.theorem,
        f_seed=args.seed,
        params=preset.params,
        family=preset.family,
        family_lower=preset.family_lower,
        amplitude=args.amplitude,
        order=args.order,
        extended=preset.extended_class,
        mode=BaseMode(args.mode),
        mutate=args.mutate_conclusion,
        condition_override=preset.condition_override,
    )


def _load_function(path: Path) -> MeromorphicSeries:
    f = read_series(path)
    if not isinstance(f, MeromorphicSeries):
        raise UsageError(f"{path}: expected a meromorphic series literal")
    return f


def _check_amplitude(args) -> None:
    if not 0 < args.amplitude <= 0.5:
        raise UsageError("--amplitude must lie in (0, 0.5]")
    if args.order < 8:
        raise UsageError("--order must be >= 8")


def cmd_op_eval(args, out) -> int:
    prm = LashinParams(args.alpha, args.beta) if args.alpha > 0 and args.beta > 0 else None
    if prm is None:
        raise UsageError("alpha and beta must be positive")
    if args.function is not None:
        f = _load_function(args.function)
    else:
        _check_amplitude(args)
        f = random_sigma_function(args.seed if args.seed is not None else 0, args.order, args.amplitude)
    value = complex(evaluate(apply_lashin(f, prm), args.z))
    result = {"alpha": args.alpha, "beta": args.beta, "z": [args.z.real, args.z.imag], "value": [value.real, value.imag]}
    if args.oracle:
        oracle = lashin_quadrature(f, prm, args.z)
        result["oracle"] = [oracle.real, oracle.imag]
        result["difference"] = abs(oracle - value)
    out.write(json.dumps(result) + "\n")
    return EXIT_OK


def cmd_verify(args, argv, out, err) -> int:
    preset = _resolve_preset(args)
    grid = _grid(args)
    _check_amplitude(args)
    t = _nominal_input(preset, args)
    start = time.perf_counter()
    f = _load_function(args.function) if args.function is not None else None
    report = run_trial(t, grid, f=f)
    elapsed = time.perf_counter() - start
    payload = report.to_dict() if f is None else _with_literal(report.to_dict(), args.function)
    doc = report_document(argv, preset.theorem, preset.name, "trial", payload, grid, elapsed if args.record_timing else None)
    _deliver(doc, args.out, out)
    note = err if args.out is None else out
    note.write(f"{preset.theorem} {preset.name} seed={args.seed}: {report.classification.value}\n")
    if report.error:
        note.write(f"  recorded error: {report.error}\n")
    return EXIT_COUNTEREXAMPLE if report.classification is Classification.COUNTEREXAMPLE else EXIT_OK


def _with_literal(payload: dict, path: Path) -> dict:
    payload = dict(payload)
    payload["function_file"] = str(path)
    payload["function_literal"] = Path(path).read_text(encoding="utf-8")
    return payload


def cmd_fuzz(args, argv, out, err) -> int:
    preset = _resolve_preset(args)
    grid = _grid(args)
    _check_amplitude(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    summary = fuzz_theorem(preset.theorem, preset, args.trials, args.seed, grid, args.amplitude, args.order,
                           BaseMode(args.mode), args.mutate_conclusion)
    doc = report_document(argv, preset.theorem, preset.name, "fuzz", summary.to_dict(), grid,
                          summary.wall_time if args.record_timing else None)
    _deliver(doc, args.out, out)
    counts = " ".join(f"{k}={v}" for k, v in summary.counts.items())
    (err if args.out is None else out).write(f"{preset.theorem} {preset.name} trials={args.trials} seed={args.seed}: {counts}\n")
    return EXIT_COUNTEREXAMPLE if summary.counterexamples else EXIT_OK


def _deliver(doc: dict, path: Optional[Path], out) -> None:
    if path is None:
        out.write(serialize(doc))
    else:
        try:
            emit_report(doc, path)
        except OSError as exc:
            raise _IOFailure(str(exc)) from exc


class _IOFailure(MerosubError):
    pass


def cmd_presets(out) -> int:
    out.write(json.dumps([p.to_dict() for p in PRESETS.values()], indent=2) + "\n")
    return EXIT_OK


def cmd_curves(args, out) -> int:
    preset = _resolve_preset(args)
    _check_amplitude(args)
    if not 0 < args.radius <= OUTER_RADIUS:
        raise UsageError(f"--radius must lie in (0, {OUTER_RADIUS}]")
    if args.grid_n < 4:
        raise UsageError("--grid-n must be >= 4")
    t = _nominal_input(preset, args)
    f = _load_function(args.function) if args.function is not None else t.function()
    pairs = _conclusion_dominants(t, f, t.params)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        index = []
        for i, (sub, dom) in enumerate(pairs):
            for role, s in (("subordinate", sub), ("dominant", dom)):
                label = f"{role}{i if len(pairs) > 1 else ''}"
                name = f"{label}.csv"
                emit_curves(label, s, args.radius, args.grid_n, args.out / name)
                index.append({"label": label, "file": name, "radius": args.radius, "samples": args.grid_n})
        _atomic_write(args.out / "curves.json", json.dumps({"theorem": preset.theorem, "preset": preset.name, "seed": args.seed, "curves": index}, indent=2) + "\n")
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    out.write(f"wrote {len(index)} curves to {args.out}\n")
    return EXIT_OK


def run_command(argv: Sequence[str], out=None, err=None) -> int:
    """Run one CLI invocation and return its exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=err)
        if args.command == "op":
            if args.op_command != "eval":
                raise UsageError("usage: merosub op eval --alpha A --beta B --z Z")
            return cmd_op_eval(args, out)
        if args.command == "verify":
            return cmd_verify(args, argv, out, err)
        if args.command == "fuzz":
            return cmd_fuzz(args, argv, out, err)
        if args.command == "presets":
            return cmd_presets(out)
        if args.command == "curves":
            return cmd_curves(args, out)
        raise UsageError(parser.format_usage())
    except (UsageError, DomainError, ParseError, SpecError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (NumericDegeneracy, _IOFailure, OSError) as exc:
        err.write(f"aborted: {type(exc).__name__}: {exc}\n")
        return EXIT_DEGENERATE
    except MerosubError as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_DEGENERATE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
