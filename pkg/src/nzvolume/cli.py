"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 bad usage or input,
3 file could not be read or written.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from .equal_volume import FiberQuery, fiber_integer_points, search_collisions
from .files import (
    SpecFormatError,
    collision_summary,
    mpf_text,
    read_manifold,
    write_collision_report,
)
from .nz_volume import NZVolumeError, chart_term_identity_check, filled_volume, theta_truncated
from .precision import DEFAULT_PRECISION
from .presets import PRESET_NAMES, preset
from .quad_form import (
    BinaryQuadraticForm,
    NotPositiveDefiniteError,
    automorphisms,
    lattice_points_in_band,
    lattice_points_on_level,
)
from .slopes import Slope
from .verifier import (
    EmptyLevelError,
    level_set_discrepancy,
    level_set_witness,
    obstruction_nullspace,
    run_invariant_suite,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

CHART_GRID = 10
CHART_MAX_ORDER = 3
CHART_TOLERANCE = mpmath.mpf("1e-12")
DISCREPANCY_FLOOR = mpmath.mpf("1e-3")


class UsageError(Exception):
    pass


# -- argument parsing helpers ----------------------------------------------------------


def _int_list(text: str) -> list[int]:
    """``"2..6"``, ``"1,2,7"`` or a mix such as ``"1..3,7"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty list")
    return out


def _triple(text: str) -> tuple[int, int, int]:
    parts = [int(t) for t in text.split(",")]
    if len(parts) != 3:
        raise ValueError("need three integers A,B,C")
    return tuple(parts)


def _pair(text: str) -> tuple[int, int]:
    parts = [int(t) for t in text.split(",")]
    if len(parts) != 2:
        raise ValueError("need two integers")
    return tuple(parts)


def _arg(kind, name):
    def convert(text):
        try:
            return kind(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise argparse.ArgumentTypeError(f"bad {name} {text!r}: {exc}") from None

    return convert


def _slope(text: str) -> Slope:
    s = Slope.parse(text)
    if s.is_zero:
        raise ValueError("the zero slope has no filling")
    if not s.is_primitive:
        raise ValueError("p and q must be coprime")
    return s


def _tolerance(text: str) -> str:
    x = mpmath.mpf(text)
    if not mpmath.isfinite(x) or x < 0:
        raise ValueError("tolerance must be a finite nonnegative number")
    return text


def _load_manifold(ref: str, prec: int):
    if ref in PRESET_NAMES:
        return preset(ref, prec).manifold
    path = Path(ref)
    if not path.exists():
        raise UsageError(
            f"{ref!r} is neither a preset ({', '.join(PRESET_NAMES)}) nor an existing file"
        )
    return read_manifold(path, prec)


def _form(args) -> BinaryQuadraticForm:
    return BinaryQuadraticForm(*args.form)


# -- commands -------------------------------------------------------------------------


def cmd_eval(args) -> int:
    m = _load_manifold(args.manifold, args.precision)
    if m.base_volume is not None:
        v = filled_volume(m, args.slope, args.terms, args.precision)
        label = "volume"
    else:
        v = theta_truncated(m, args.slope, args.terms, args.precision)
        label = "theta"
    digits = max(15, mpmath.libmp.prec_to_dps(args.precision))
    print(f"{label} {mpf_text(v.value, digits)}")
    print(f"error_radius {mpf_text(v.error_radius, 6)}")
    print(f"terms_used {v.terms_used}")
    return EXIT_OK


def cmd_lattice(args) -> int:
    f = _form(args)
    if args.level is not None:
        pts = lattice_points_on_level(f, args.level)
    else:
        N, M = args.band
        pts = lattice_points_in_band(f, N, M)
    print(len(pts))
    for x, y in pts:
        print(f"{x} {y}")
    return EXIT_OK


def cmd_automorphs(args) -> int:
    autos = automorphisms(_form(args))
    print(len(autos))
    for T in autos:
        print(f"[[{T.a}, {T.b}], [{T.c}, {T.d}]] det={T.det}")
    return EXIT_OK


def cmd_collisions(args) -> int:
    m = _load_manifold(args.manifold, args.precision)
    start = time.perf_counter()
    records = search_collisions(m, args.bound, args.terms, args.tol, args.precision, args.jobs)
    elapsed = time.perf_counter() - start
    try:
        write_collision_report(
            records, args.out, manifold=m, bound=args.bound, terms=args.terms,
            tolerance=args.tol, prec=args.precision, version=__version__,
            wall_time=elapsed, jobs=args.jobs,
        )
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    summary = collision_summary(records)
    print(f"pairs {summary['total']}")
    for name, n in summary["by_classification"].items():
        print(f"  {name} {n}")
    print(f"max_abs_k {summary['max_abs_k']}")
    return EXIT_OK


def cmd_fiber(args) -> int:
    m = _load_manifold(args.manifold, args.precision)
    bound = args.bound if args.bound is not None else args.slope.height()
    query = FiberQuery(args.slope, args.k, bound, args.tol, args.terms)
    pts = fiber_integer_points(m, query, args.precision)
    print(len(pts))
    for s in pts:
        print(f"{s.p} {s.q}")
    return EXIT_OK


def _obstruction_section(args) -> dict:
    reports = []
    for i in args.i:
        for d in args.d:
            reports.append(obstruction_nullspace(i, d).to_dict())
    ok = all(r["nullspace_dimension"] == 0 and r["rank"] == r["rank_second_order"] == 3 for r in reports)
    lines = [
        f"  i={r['i']} d={r['d']} nullspace_dimension={r['nullspace_dimension']} rank={r['rank']}"
        for r in reports
    ]
    return {"suite": "obstruction", "passed": ok, "results": reports, "lines": lines}


def _charts_section(args) -> dict:
    grid = [Fraction(-1) + Fraction(2 * t, CHART_GRID - 1) for t in range(CHART_GRID)]
    worst, where = mpmath.mpf(0), None
    for n in range(CHART_MAX_ORDER + 1):
        for j in range(CHART_MAX_ORDER + 1):
            for xp in grid:
                for yp in grid:
                    if yp == 0:
                        continue
                    err = chart_term_identity_check(n, j, xp, yp, prec=args.precision)
                    if err > worst:
                        worst, where = err, (n, j, str(xp), str(yp))
    ok = worst < CHART_TOLERANCE
    return {
        "suite": "charts",
        "passed": bool(ok),
        "max_error": mpf_text(worst, 6),
        "worst_at": where,
        "lines": [f"  max grid error {mpmath.nstr(worst, 3)} (limit 1e-12)"],
    }


def _discrepancy_section(args) -> dict:
    m = _load_manifold(args.manifold, args.precision)
    value = level_set_discrepancy(m, args.level, args.terms, args.precision)
    lead = level_set_discrepancy(m, args.level, 1, args.precision)
    a, b, _ = level_set_witness(m, args.level, args.terms, args.precision)
    ok = value > DISCREPANCY_FLOOR and lead == 0
    return {
        "suite": "discrepancy",
        "passed": bool(ok),
        "manifold": m.name,
        "level": args.level,
        "terms": args.terms,
        "discrepancy": mpf_text(value, 17),
        "leading_term_discrepancy": mpf_text(lead, 6),
        "witness": [list(a), list(b)],
        "lines": [
            f"  {m.name} level {args.level}: {mpmath.nstr(value, 6)} between {a} and {b}"
            f" (terms={args.terms}); leading term alone: {mpmath.nstr(lead, 3)}"
        ],
    }


def _invariants_section(args) -> dict:
    m = _load_manifold(args.manifold, args.precision)
    rep = run_invariant_suite(m, args.bound, args.terms, prec=args.precision)
    lines = [
        f"  {'ok  ' if c.passed else 'FAIL'} {c.name} ({c.checked})"
        + (f" witness: {c.witness}" if c.witness else "")
        for c in rep.checks
    ]
    out = rep.to_dict()
    out.update(suite="invariants", lines=lines)
    return out


SUITES = {
    "obstruction": _obstruction_section,
    "charts": _charts_section,
    "discrepancy": _discrepancy_section,
    "invariants": _invariants_section,
}


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    sections = [SUITES[name](args) for name in names]
    passed = all(s["passed"] for s in sections)
    report = {
        "version": __version__,
        "passed": passed,
        "suites": [{k: v for k, v in s.items() if k != "lines"} for s in sections],
    }
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for s in sections:
            print(f"{s['suite']}: {'pass' if s['passed'] else 'FAIL'}")
            for line in s["lines"]:
                print(line)
    if args.report:
        try:
            Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if passed else EXIT_FAILED


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nzvolume",
        description="Volumes of Dehn fillings from Neumann-Zagier data, and equal-volume searches.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--precision", type=_arg(int, "precision"), default=DEFAULT_PRECISION,
        help="working precision in bits (default %(default)s)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def manifold_opt(p, required=True):
        p.add_argument(
            "--manifold", required=required, default=None if required else "figure8",
            help=f"preset name ({', '.join(PRESET_NAMES)}) or a JSON spec file",
        )

    p = sub.add_parser("eval", help="truncated volume series at one slope")
    manifold_opt(p)
    p.add_argument("--slope", type=_arg(_slope, "slope"), required=True, help="p/q, coprime")
    p.add_argument("--terms", type=_arg(int, "terms"), default=2)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("lattice", help="integer points on a level or in a band of a form")
    p.add_argument("--form", type=_arg(_triple, "form"), required=True, help="A,B,C")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--level", type=_arg(int, "level"))
    g.add_argument("--band", type=_arg(_pair, "band"), help="N,M for N <= Q < N+M")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("automorphs", help="integral automorphs of a form")
    p.add_argument("--form", type=_arg(_triple, "form"), required=True, help="A,B,C")
    p.set_defaults(func=cmd_automorphs)

    p = sub.add_parser("collisions", help="exhaustive equal-volume search")
    manifold_opt(p)
    p.add_argument("--bound", type=_arg(int, "bound"), required=True)
    p.add_argument("--terms", type=_arg(int, "terms"), default=2)
    p.add_argument("--tol", type=_arg(_tolerance, "tolerance"), default="1e-9")
    p.add_argument("--out", required=True, help="CSV path; metadata goes to <out>.json")
    p.add_argument("--jobs", type=_arg(int, "jobs"), default=1)
    p.set_defaults(func=cmd_collisions)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    p.add_argument("--i", type=_arg(_int_list, "i list"), default=list(range(2, 7)))
    p.add_argument("--d", type=_arg(_int_list, "d list"), default=[1, 2, 3, 4, 7, 12])
    manifold_opt(p, required=False)
    p.add_argument("--level", type=_arg(int, "level"), default=49)
    p.add_argument("--terms", type=_arg(int, "terms"), default=2)
    p.add_argument("--bound", type=_arg(int, "bound"), default=20)
    p.add_argument("--json", action="store_true", help="print the JSON report instead")
    p.add_argument("--report", help="also write the JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fiber", help="integer points of a volume fiber")
    manifold_opt(p)
    p.add_argument("--slope", type=_arg(_slope, "slope"), required=True)
    p.add_argument("--k", type=_arg(int, "k"), default=0)
    p.add_argument("--bound", type=_arg(int, "bound"))
    p.add_argument("--terms", type=_arg(int, "terms"), default=2)
    p.add_argument("--tol", type=_arg(_tolerance, "tolerance"), default="1e-9")
    p.set_defaults(func=cmd_fiber)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.precision < 16:
        parser.error("precision must be at least 16 bits")
    try:
        return args.func(args)
    except (UsageError, NZVolumeError, SpecFormatError, NotPositiveDefiniteError,
            EmptyLevelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
