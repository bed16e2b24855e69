"""Command-line front end.

Exit codes: 0 for a definitive answer, 1 for usage or input errors, 2 when an
iteration cap was hit.  ``PIVOTLAB_MAX_ITER`` overrides the default cap.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .certificates import Box, aggregate, check_certificate, search_certificate
from .exact_arith import approx, format_rational, parse_rational
from .fixtures import builtin_fixture, canonical_fixture_name, fixture_text
from .generators import klee_minty
from .lp_model import LinearProgram, LpError, parse_lp, serialize_lp, to_standard_form
from .mdp_bridge import (
    InvalidMdpError,
    MdpGraph,
    diff_constraints,
    generate_flow_conservation,
    generate_P,
    parse_mdp,
)
from .pivot_rules import PivotRule, TieBreak
from .simplex import IterationLimitError, Status, phase1, solve, trace_to_jsonl, verify_farkas

ENV_MAX_ITER = "PIVOTLAB_MAX_ITER"
KM_CAP = 16

EXIT_OK, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


# -- sources ------------------------------------------------------------------

_GEN = re.compile(r"(P|flow)\((.+?)(?:,\s*([01]))?\)")


def load_mdp(src: str) -> MdpGraph:
    if canonical_fixture_name(src) == "node-g":
        return builtin_fixture("node-g")
    path = Path(src)
    if not path.is_file():
        raise UsageError(f"no MDP fixture or file named {src!r}")
    return parse_mdp(path.read_text())


def load_lp(src: str) -> LinearProgram:
    """Fixture name, ``klee-minty:<n>``, ``P(<mdp>)``, ``flow(<mdp>[,0|1])``, or an LP file."""
    key = canonical_fixture_name(src)
    if key in ("lp1", "lp2-prefix8"):
        return builtin_fixture(key)
    if key.startswith("klee-minty"):
        _, _, n = key.partition(":")
        if not n.isdigit():
            raise UsageError("use klee-minty:<n> to pick the dimension")
        return klee_minty(_km_dim(int(n)))
    m = _GEN.fullmatch(src.strip())
    if m:
        mdp = load_mdp(m.group(2).strip())
        if m.group(1) == "P":
            if m.group(3) is not None:
                raise UsageError("the P schema has no rhs choice")
            return generate_P(mdp)
        return generate_flow_conservation(mdp, m.group(3) or "0")
    path = Path(src)
    if not path.is_file():
        raise UsageError(f"no LP fixture or file named {src!r}")
    return parse_lp(path.read_text())


def _km_dim(n: int) -> int:
    if not 1 <= n <= KM_CAP:
        raise UsageError(f"Klee-Minty dimension must be in 1..{KM_CAP}")
    return n


def parse_range(text: str) -> list[int]:
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+))?", text)
    if not m:
        raise UsageError(f"bad range {text!r}; expected k or a..b")
    lo = int(m.group(1))
    hi = int(m.group(2) or lo)
    if hi < lo:
        raise UsageError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_box(text: str) -> tuple[Fraction, Fraction | None]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise UsageError(f"bad box {text!r}; expected lo..hi or lo..")
    try:
        return parse_rational(lo), (parse_rational(hi) if hi else None)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad box {text!r}: {exc}") from None


def parse_multipliers(text: str) -> list[Fraction]:
    try:
        return [parse_rational(t.strip()) for t in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad multipliers: {exc}") from None


def _max_iter(args) -> int | None:
    if getattr(args, "max_iter", None) is not None:
        return args.max_iter
    env = os.environ.get(ENV_MAX_ITER)
    if env:
        if not env.isdigit():
            raise UsageError(f"{ENV_MAX_ITER} must be a nonnegative integer")
        return int(env)
    return None


def _num(value: Fraction | None, args) -> str:
    if value is None:
        return "unbounded"
    text = format_rational(value)
    if getattr(args, "approx", False) and value.denominator != 1:
        text += f" (approx {approx(value)})"
    return text


def _emit(args, human: list[str], record: dict) -> None:
    if getattr(args, "json", False):
        print(json.dumps(record))
    else:
        print("\n".join(human))


# -- commands -----------------------------------------------------------------


def cmd_solve(args) -> int:
    lp = load_lp(args.lp)
    res = solve(lp, args.rule, box=args.box, max_iter=_max_iter(args), tiebreak=args.tiebreak)
    if args.trace:
        Path(args.trace).write_text(trace_to_jsonl(res.trace))
    human = [
        f"status: {res.status.value}",
        f"phase1_pivots: {res.phase1_pivots}",
        f"phase2_pivots: {res.phase2_pivots}",
    ]
    record = {
        "status": res.status.value,
        "rule": PivotRule(args.rule).value,
        "phase1_pivots": res.phase1_pivots,
        "phase2_pivots": res.phase2_pivots,
    }
    if res.status is Status.OPTIMAL:
        human.insert(1, f"objective: {_num(res.objective, args)}")
        human += [f"{k} = {_num(v, args)}" for k, v in res.solution.items()]
        record["objective"] = format_rational(res.objective)
        record["solution"] = {k: format_rational(v) for k, v in res.solution.items()}
    elif res.status is Status.INFEASIBLE:
        human.append("farkas: " + ",".join(format_rational(y) for y in res.farkas))
        record["farkas"] = [format_rational(y) for y in res.farkas]
    elif res.status is Status.UNBOUNDED:
        sf = res.standard_form
        ray = {sf.names[j]: format_rational(v) for j, v in enumerate(res.ray) if v}
        human.append("ray: " + " ".join(f"{k}={v}" for k, v in ray.items()))
        record["ray"] = ray
    _emit(args, human, record)
    return EXIT_LIMIT if res.status is Status.ITERATION_LIMIT else EXIT_OK


def cmd_feasible(args) -> int:
    lp = load_lp(args.lp)
    if args.box:
        lo, hi = parse_box(args.box)
        lp = lp.with_bounds({n: (lo, hi) for n in lp.names})
    sf = to_standard_form(lp)
    try:
        p1 = phase1(sf, max_iter=_max_iter(args))
    except IterationLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    if p1.feasible:
        point = sf.project(p1.state.point())
        human = ["verdict: feasible"] + [f"{k} = {_num(v, args)}" for k, v in point.items()]
        record = {"verdict": "feasible", "point": {k: format_rational(v) for k, v in point.items()}}
    else:
        ok = verify_farkas(sf, p1.farkas).valid
        ys = [format_rational(y) for y in p1.farkas]
        human = [
            "verdict: infeasible",
            "farkas rows: " + ",".join(sf.row_names),
            "farkas: " + ",".join(ys),
            f"certificate verified: {'yes' if ok else 'no'}",
        ]
        record = {"verdict": "infeasible", "rows": list(sf.row_names), "farkas": ys, "verified": ok}
    _emit(args, human, record)
    return EXIT_OK


def _certificate_report(args, cert) -> tuple[list[str], dict]:
    verdict = "infeasible" if cert.proves_infeasible else "inconclusive"
    human = [
        "multipliers: " + ",".join(format_rational(y) for y in cert.multipliers),
        f"aggregated: {cert.aggregated.format()}",
        f"supremum: {_num(cert.supremum, args)}",
        f"infimum: {_num(cert.infimum, args)}",
        f"verdict: {verdict}",
    ]
    record = {
        "multipliers": [format_rational(y) for y in cert.multipliers],
        "aggregated": cert.aggregated.format(),
        "rhs": format_rational(cert.aggregated.rhs),
        "supremum": None if cert.supremum is None else format_rational(cert.supremum),
        "infimum": None if cert.infimum is None else format_rational(cert.infimum),
        "verdict": verdict,
    }
    return human, record


def cmd_certify(args) -> int:
    lp = load_lp(args.lp)
    lo, hi = parse_box(args.box)
    box = Box.uniform(lp, lo, hi)
    if args.search:
        try:
            cert = search_certificate(lp, box, max_iter=_max_iter(args))
        except IterationLimitError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_LIMIT
        if cert is None:
            _emit(args, ["verdict: feasible (no certificate exists)"], {"verdict": "feasible"})
            return EXIT_OK
    else:
        if not args.multipliers:
            raise UsageError("certify needs --multipliers or --search")
        cert = check_certificate(lp, parse_multipliers(args.multipliers), box)
    _emit(args, *_certificate_report(args, cert))
    return EXIT_OK


def cmd_aggregate(args) -> int:
    lp = load_lp(args.lp)
    row = aggregate(lp, parse_multipliers(args.multipliers))
    _emit(args, [row.format()], {"aggregated": row.format(), "rhs": format_rational(row.rhs)})
    return EXIT_OK


def cmd_mdp2lp(args) -> int:
    mdp = load_mdp(args.mdp)
    if args.schema == "P":
        if args.rhs is not None:
            raise UsageError("--rhs applies to the flow schema only")
        lp = generate_P(mdp)
    else:
        lp = generate_flow_conservation(mdp, args.rhs or "0")
    sys.stdout.write(serialize_lp(lp))
    return EXIT_OK


def cmd_diff(args) -> int:
    d = diff_constraints(load_lp(args.a), load_lp(args.b))
    if args.json:
        for v in d.vertices:
            print(
                json.dumps(
                    {
                        "vertex": v.name,
                        "missing": {k: format_rational(c) for k, c in v.missing.items()},
                        "extra": {k: format_rational(c) for k, c in v.extra.items()},
                        "mismatched": {k: [format_rational(a), format_rational(b)] for k, (a, b) in v.mismatched.items()},
                        "rhs": [format_rational(v.rhs[0]), format_rational(v.rhs[1])],
                    }
                )
            )
        for k in d.only_in_a:
            print(json.dumps({"vertex": k, "only_in": "a"}))
        for k in d.only_in_b:
            print(json.dumps({"vertex": k, "only_in": "b"}))
    else:
        print("\n".join(d.lines()) if not d.is_empty else "no differences")
    return EXIT_OK


def _bench_cell(cell: tuple[str, int, str, int | None]) -> dict:
    family, n, rule, cap = cell
    res = solve(klee_minty(n), rule, max_iter=cap)
    return {
        "family": family,
        "n": n,
        "rule": rule,
        "status": res.status.value,
        "pivots": res.phase2_pivots,
        "objective": None if res.objective is None else format_rational(res.objective),
    }


def cmd_bench(args) -> int:
    if args.family != "klee-minty":
        raise UsageError(f"unknown family {args.family!r}")
    ns = [_km_dim(n) for n in parse_range(args.n)]
    rules = [PivotRule(r.strip()).value for r in args.rules.split(",")]
    cap = _max_iter(args)
    cells = [(args.family, n, r, cap) for n in ns for r in rules]
    if args.parallel:
        with ProcessPoolExecutor() as pool:
            rows = list(pool.map(_bench_cell, cells))
    else:
        rows = [_bench_cell(c) for c in cells]
    if args.json:
        for row in rows:
            print(json.dumps(row))
    else:
        header = ("family", "n", "rule", "status", "pivots", "objective")
        table = [header] + [tuple(str(r[k]) for k in header) for r in rows]
        widths = [max(len(t[i]) for t in table) for i in range(len(header))]
        for t in table:
            print("  ".join(c.ljust(w) for c, w in zip(t, widths)).rstrip())
    limited = any(r["status"] == Status.ITERATION_LIMIT.value for r in rows)
    return EXIT_LIMIT if limited else EXIT_OK


def cmd_fixture(args) -> int:
    if args.family:
        if args.family != "klee-minty":
            raise UsageError(f"unknown family {args.family!r}")
        if args.n is None:
            raise UsageError("--family klee-minty needs --n")
        sys.stdout.write(serialize_lp(klee_minty(_km_dim(args.n))))
        return EXIT_OK
    if not args.name:
        raise UsageError("name a fixture (lp1, lp2-prefix8, node-g) or use --family")
    try:
        text = fixture_text(args.name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pivotlab", description="Exact-rational simplex and LP certificate toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    rules = [r.value for r in PivotRule]

    def common(p, *, lp=True, approx_flag=True):
        if lp:
            p.add_argument("--lp", required=True, help="fixture, klee-minty:<n>, P(<mdp>), flow(<mdp>,0|1), or file")
        p.add_argument("--json", action="store_true", help="emit JSON records instead of text")
        if approx_flag:
            p.add_argument("--approx", action="store_true", help="append decimal approximations")

    p = sub.add_parser("solve", help="run phase 1 and phase 2")
    common(p)
    p.add_argument("--rule", choices=rules, default="dantzig")
    p.add_argument("--tiebreak", choices=[t.value for t in TieBreak], default="cost")
    p.add_argument("--box", action="store_true", help="cap every variable at 1")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--trace", help="write the pivot trace as JSON lines")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("feasible", help="phase 1 only: a point or a Farkas certificate")
    common(p)
    p.add_argument("--box", help="lo..hi bounds for every variable")
    p.add_argument("--max-iter", type=int)
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("certify", help="aggregation certificate over a box")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--multipliers", help="comma-separated rationals, one per constraint")
    g.add_argument("--search", action="store_true", help="derive multipliers with phase 1")
    p.add_argument("--box", default="0..1", help="lo..hi (default 0..1); lo.. for no upper bound")
    p.add_argument("--max-iter", type=int)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("aggregate", help="print the combined row only")
    common(p, approx_flag=False)
    p.add_argument("--multipliers", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("mdp2lp", help="translate an MDP graph")
    p.add_argument("--mdp", required=True, help="node-g or an MDP file")
    p.add_argument("--schema", choices=["P", "flow"], required=True)
    p.add_argument("--rhs", choices=["0", "1"])
    p.set_defaults(func=cmd_mdp2lp)

    p = sub.add_parser("diff", help="per-vertex constraint diff of a against reference b")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("bench", help="pivot counts per family, size and rule")
    p.add_argument("--family", default="klee-minty")
    p.add_argument("--n", required=True, help="k or a..b")
    p.add_argument("--rules", default="dantzig", help="comma-separated rule ids")
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fixture", help="print fixture text")
    p.add_argument("name", nargs="?")
    p.add_argument("--family")
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, LpError, InvalidMdpError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
