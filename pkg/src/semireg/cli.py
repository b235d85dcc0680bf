"""Command-line drivers: ``check``, ``curvature``, ``verify`` and ``catalog``.

Exit codes: 0 pass, 1 a check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path
from typing import Sequence

from .cartan import DEFAULT_TOL, ON_LOCUS, OUT_OF_IMAGE, verify_suite
from .catalog import MetricSpec, catalog, catalog_entry
from .config import SpecFormatError, load_spec
from .curvature import RiemannEvaluator, SingularMetricError, classical_riemann, symmetry_check
from .expr import ParseError
from .koszul import (
    NON_DEGENERATE,
    NOT_RADICAL_STATIONARY,
    RADICAL_STATIONARY,
    RADICAL_STATIONARY_NOTE,
    SEMI_REGULAR_PROBE_PASSED,
    KoszulEvaluator,
    radical_stationary_check,
    semi_regular_probe,
)
from .radical import DEFAULT_IMAGE_TOL, DEFAULT_RANK_TOL
from .report import Record, RunReport, fmt_float, fmt_point

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
PROBE_TOL = 1e-6
PROBE_HALF_WIDTH = 1.0

_LOCUS = re.compile(r"^\s*([A-Za-z_]\w*)\s*=\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*$")


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def resolve_spec(arg: str) -> MetricSpec:
    """A catalog name, or else a path to a spec file."""
    try:
        return catalog_entry(arg)
    except KeyError:
        pass
    path = Path(arg)
    if not path.is_file():
        raise InputError(f"{arg!r} is neither a catalog entry nor a readable file")
    try:
        return load_spec(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {arg}: {exc}") from None
    except (SpecFormatError, ParseError, ValueError) as exc:
        raise InputError(str(exc)) from None


def sample_points(spec: MetricSpec, count: int | None, seed: int, explicit: Sequence[str] = ()) -> list[tuple[float, ...]]:
    if explicit:
        pts = []
        for text in explicit:
            try:
                p = tuple(float(x) for x in text.split(","))
            except ValueError:
                raise InputError(f"bad --point {text!r}") from None
            if len(p) != spec.dim:
                raise InputError(f"--point {text!r} has {len(p)} coordinates, expected {spec.dim}")
            pts.append(p)
        return pts
    if count is not None:
        if count < 1:
            raise InputError("--points must be positive")
        if not spec.box:
            raise InputError(f"spec {spec.name!r} declares no box to sample --points from")
        return spec.random_points(count, seed)
    if not spec.points:
        raise InputError(f"spec {spec.name!r} has no sample points; use --points N or --point")
    return list(spec.points)


def _new_report(command: str, spec: MetricSpec, seed: int, tol: float, rank_tol: float) -> RunReport:
    return RunReport(command, spec.name, spec.digest(), seed, tol, rank_tol)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _excused(passed: bool, flags: Sequence[str]) -> bool:
    return not passed and ON_LOCUS in flags and OUT_OF_IMAGE not in flags


# -- check -------------------------------------------------------------------


def locus_coordinate(spec: MetricSpec) -> tuple[int, float] | None:
    """``(coordinate index, value)`` from a hint such as ``u = 0``, else None."""
    m = _LOCUS.match(spec.locus_hint or "")
    if not m or m.group(1) not in spec.coords:
        return None
    return spec.coords.index(m.group(1)), float(m.group(2))


def expectation_met(verdict: str, expect: str) -> bool:
    if not expect or verdict == expect:
        return True
    if expect == RADICAL_STATIONARY:
        # probe-passed and non-degenerate metrics are radical-stationary too
        return verdict in (SEMI_REGULAR_PROBE_PASSED, NON_DEGENERATE)
    return False


def _probe_quadruples(n: int) -> list[tuple[int, int, int, int]]:
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    return [pairs[a] + pairs[b] for a in range(len(pairs)) for b in range(a, len(pairs))]


def cmd_check(
    spec: MetricSpec,
    points: Sequence[Sequence[float]],
    tol: float = DEFAULT_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
    seed: int = 0,
) -> tuple[RunReport, int]:
    ev = KoszulEvaluator(spec.metric, rank_tol)
    rep = _new_report("check", spec, seed, tol, rank_tol)
    cls = radical_stationary_check(ev, points, tol)
    for pc in cls.points:
        flags = [f"rank={pc.rank}", f"worst={pc.worst_pair[0]}:{pc.worst_pair[1]}"]
        if pc.rank < spec.dim:
            flags.append(ON_LOCUS)
        rep.records.append(
            Record("radical_stationary", pc.point, pc.max_residual, 0.0, pc.max_residual, tuple(flags), pc.max_residual <= tol)
        )

    locus = locus_coordinate(spec)
    probes = []
    if locus is not None:
        c, value = locus
        base = next((p for p in cls.points if p.point[c] == value), cls.points[0]).point
        start = list(base)
        end = list(base)
        start[c], end[c] = value - PROBE_HALF_WIDTH, value + PROBE_HALF_WIDTH
        for quad in _probe_quadruples(spec.dim):
            fields = [ev.coordinate_field(k) for k in quad]
            pr = semi_regular_probe(ev, *fields, start, end, tol=PROBE_TOL)
            probes.append(pr)
            mid = tuple(0.5 * (a + b) for a, b in zip(start, end))
            flags = [
                f"pointwise={fmt_float(pr.pointwise)}",
                "limits-agree" if pr.limits_agree else "limits-differ",
                "pointwise-matches-limit" if pr.pointwise_matches_limit else "pointwise-differs-from-limit",
            ]
            if pr.failure:
                flags.append(pr.failure)
            resid = abs(pr.left_limit - pr.right_limit) if pr.converged else math.inf
            rep.records.append(
                Record(f"semi_regular_probe[{','.join(map(str, quad))}]", mid, pr.left_limit, pr.right_limit,
                       resid, tuple(flags), pr.passed)
            )
        cls = cls.with_probes(probes)

    verdict = cls.verdict
    met = expectation_met(verdict, spec.expect)
    code = EXIT_FAIL if verdict == NOT_RADICAL_STATIONARY or not met else EXIT_PASS
    rep.notes.append(RADICAL_STATIONARY_NOTE)
    rep.notes.append("classification holds at the sampled points only")
    if probes:
        rep.notes.append("probe passes are numerical evidence of a smooth extension, not a proof")
    rep.summary = {
        "classification": verdict,
        "expected": spec.expect or "-",
        "matched": "yes" if met else "no",
        "max_residual": cls.max_residual,
    }
    rep.passed = code == EXIT_PASS
    return rep, code


# -- curvature ---------------------------------------------------------------


def cmd_curvature(
    spec: MetricSpec,
    points: Sequence[Sequence[float]],
    tol: float = DEFAULT_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
    seed: int = 0,
) -> tuple[RunReport, int]:
    """Riemann table entries (i<j, k<l) against an independent evaluation.

    At full-rank points the reference is the classical Christoffel-symbol
    curvature; elsewhere it is the field-level formula evaluated from
    coordinate fields, which shares only the metric jets with the table.
    """
    rev = RiemannEvaluator.for_metric(spec.metric, rank_tol)
    ev = rev.koszul
    rep = _new_report("curvature", spec, seed, tol, rank_tol)
    n = spec.dim
    E = [ev.coordinate_field(k) for k in range(n)]
    failures = 0
    for p in points:
        p = spec.chart.check_point(p)
        try:
            t = rev.table(p)
        except ArithmeticError as exc:
            rep.records.append(Record("error", p, math.nan, math.nan, math.nan, (type(exc).__name__,), False))
            failures += 1
            continue
        oracle, source = None, "koszul-fields"
        if not t.on_locus:
            try:
                oracle, source = classical_riemann(spec.metric, p), "classical"
            except SingularMetricError:
                pass
        base_flags = [f"rank={t.rank}", f"oracle={source}"]
        if t.on_locus:
            base_flags.append(ON_LOCUS)
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(n):
                    for l in range(k + 1, n):
                        left = float(t.R[i, j, k, l])
                        if oracle is not None:
                            right = float(oracle[i, j, k, l])
                        else:
                            right = rev.riemann(E[i], E[j], E[k], E[l], p)
                        flags = list(base_flags)
                        if t.residuals[i, j, k, l] > DEFAULT_IMAGE_TOL:
                            flags.append(OUT_OF_IMAGE)
                        rel = _rel(left, right)
                        ok = rel <= tol
                        failures += not ok and not _excused(ok, flags)
                        rep.records.append(Record(f"riemann[{i},{j},{k},{l}]", p, left, right, rel, tuple(flags), ok))
        sym = symmetry_check(t)
        sym_flags = (ON_LOCUS,) if t.on_locus else ()
        for name, value in sym.residuals.items():
            rel = value / sym.scale
            ok = rel <= tol
            failures += not ok and not _excused(ok, sym_flags)
            rep.records.append(Record(f"symmetry.{name}", p, value, 0.0, rel, sym_flags, ok))
    rep.summary = {"on_locus_points": sum(1 for p in points if ev.decomposition(tuple(map(float, p))).degenerate)}
    rep.passed = failures == 0
    return rep, EXIT_PASS if rep.passed else EXIT_FAIL


# -- verify ------------------------------------------------------------------


def cmd_verify(
    spec: MetricSpec,
    points: Sequence[Sequence[float]],
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[RunReport, int]:
    suite = verify_suite(spec.metric, points, seed=seed, tol=tol, rank_tol=rank_tol, frame=spec.frame_fields())
    rep = _new_report("verify", spec, seed, tol, rank_tol)
    for r in suite.records:
        rep.records.append(Record(r.name, r.point, r.left, r.right, r.rel_residual, r.flags, r.passed))
    for p, msg in suite.errors:
        rep.records.append(Record("error", p, math.nan, math.nan, math.nan, (msg,), False))
    for family, value in suite.max_residuals().items():
        rep.notes.append(f"maxresid {family} {fmt_float(value)}")
    flagged = sorted({r.point for r in suite.failures})
    for p in flagged:
        rep.notes.append(f"failed_point {fmt_point(p)}")
    for p in suite.flagged_points():
        rep.notes.append(f"flagged_point {fmt_point(p)}")
    rep.summary = {"excused": len(suite.excused), "errors": len(suite.errors)}
    rep.passed = suite.passed
    return rep, EXIT_PASS if suite.passed else EXIT_FAIL


# -- argument handling -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semireg", description="Koszul-form diagnostics for possibly degenerate metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("spec", help="catalog name or path to a spec file")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative residual tolerance (default 1e-8)")
        p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL, help="relative rank tolerance (default 1e-9)")
        p.add_argument("--seed", type=int, default=0, help="seed for random points and fields")
        p.add_argument("--points", type=int, default=None, metavar="N", help="use N random points in the spec file's box")
        p.add_argument("--point", action="append", default=[], metavar="X,Y,...", help="explicit sample point (repeatable)")
        p.add_argument("--report", type=Path, default=None, metavar="PATH", help="also write the report to PATH")

    for name, help_ in (
        ("check", "classify the metric (radical-stationary / semi-regular probe)"),
        ("curvature", "Riemann tables against an independent evaluation, plus symmetries"),
        ("verify", "run every identity check at every point"),
    ):
        common(sub.add_parser(name, help=help_))
    cat = sub.add_parser("catalog", help="list built-in metrics, or print one as a spec file")
    cat.add_argument("name", nargs="?", default=None)
    return parser


def _emit(report: RunReport, path: Path | None) -> None:
    text = report.render()
    sys.stdout.write(text)
    if path is not None:
        path.write_text(text, encoding="utf-8")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_INPUT

    if args.command == "catalog":
        if args.name is None:
            for s in catalog():
                print(f"{s.name:24s} dim={s.dim} coords={','.join(s.coords)} expect={s.expect or '-'}"
                      + (f" locus: {s.locus_hint}" if s.locus_hint else ""))
            return EXIT_PASS
        try:
            sys.stdout.write(catalog_entry(args.name).canonical_text())
        except KeyError:
            print(f"error: no catalog entry {args.name!r}", file=sys.stderr)
            return EXIT_INPUT
        return EXIT_PASS

    if not (args.tol > 0 and args.rank_tol > 0):
        print("error: tolerances must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        spec = resolve_spec(args.spec)
        points = sample_points(spec, args.points, args.seed, args.point)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "check":
        report, code = cmd_check(spec, points, args.tol, args.rank_tol, args.seed)
    elif args.command == "curvature":
        report, code = cmd_curvature(spec, points, args.tol, args.rank_tol, args.seed)
    else:
        report, code = cmd_verify(spec, points, args.seed, args.tol, args.rank_tol)
    try:
        _emit(report, args.report)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
