"""Exit criteria.  Each test is one criterion; the summary prints PASS/FAIL per criterion."""

import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from oracles import brute_force, random_program
from pivotlab.certificates import Box, Verdict, aggregate, box_supremum, check_certificate
from pivotlab.exact_arith import format_rational
from pivotlab.fixtures import LP1_CONSTANTS, LP2_CONSTANTS, lp1, lp2_prefix8
from pivotlab.generators import klee_minty
from pivotlab.lp_model import format_constraint, to_standard_form
from pivotlab.mdp_bridge import (
    diff_constraints,
    generate_flow_conservation,
    generate_P,
    node_g_fixture,
    random_mdp,
)
from pivotlab.pivot_rules import PivotRule
from pivotlab.simplex import Status, phase1, solve, trace_to_jsonl, verify_farkas

RULES = [r.value for r in PivotRule]


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


@pytest.mark.criterion(1, "alpha+beta=1 and alpha-beta=gamma exactly, both constant sets (<1 ms)")
def test_constant_identities():
    with Timer() as t:
        ok = all(c["alpha"] + c["beta"] == 1 and c["alpha"] - c["beta"] == c["gamma"] for c in (LP1_CONSTANTS, LP2_CONSTANTS))
    assert ok
    assert LP1_CONSTANTS["gamma"] == Fraction(1, 262144)
    assert LP2_CONSTANTS["gamma"] == Fraction(1, 31381059609)
    assert t.elapsed < 1e-3


def _lp1_all_ones():
    lp = lp1()
    row = aggregate(lp, [1] * 6)
    cert = check_certificate(lp, [1] * 6, Box.uniform(lp, 0, 1))
    return lp, row, cert


@pytest.mark.criterion(2, "LP1 all-ones aggregate is x4+x8+x9+x12=6, supremum 4, infeasible (<10 ms)")
def test_lp1_all_ones_reproduction():
    with Timer() as t:
        lp, row, cert = _lp1_all_ones()
    assert t.elapsed < 10e-3
    assert row.coefficients == {"x4": 1, "x8": 1, "x9": 1, "x12": 1}
    assert row.rhs == 6
    cancelled = set(lp.names) - set(row.coefficients)
    assert cancelled == {"x1", "x2", "x3", "x5", "x6", "x7", "x10", "x11"}
    assert cert.verdict is Verdict.PROVES_INFEASIBLE
    assert cert.supremum == 4


def _lp2_all_ones():
    lp = lp2_prefix8()
    row = aggregate(lp, [1] * 8)
    box = Box.uniform(lp, 0, 1)
    return row, box_supremum(row, box.lower, box.upper), check_certificate(lp, [1] * 8, box)


@pytest.mark.criterion(3, "LP2 prefix all-ones aggregate matches the reference row, supremum 3+4*gamma, infeasible (<10 ms)")
def test_lp2_all_ones_reproduction():
    a, b, g = LP2_CONSTANTS["alpha"], LP2_CONSTANTS["beta"], LP2_CONSTANTS["gamma"]
    expected = [
        ("x1", g), ("x5", g), ("x6", a), ("x7", 1), ("x8", 1), ("x9", a), ("x13", g), ("x17", -b),
        ("x19", -1), ("x20", -1), ("x21", -1), ("x22", -1), ("x29", -1), ("x30", -1), ("x33", -1), ("x34", -1),
    ]
    with Timer() as t:
        row, sup, cert = _lp2_all_ones()
    assert t.elapsed < 10e-3
    assert list(row.coefficients.items()) == expected
    assert row.rhs == 8
    assert sup == 3 + 4 * g
    assert cert.supremum == sup and cert.verdict is Verdict.PROVES_INFEASIBLE


@pytest.mark.criterion(4, "phase-1 Farkas certificates verify on boxed LP1/LP2 prefix; unboxed LP1 point has zero residual (<1 s each)")
def test_cross_validation():
    for fixture in (lp1, lp2_prefix8):
        with Timer() as t:
            sf = to_standard_form(fixture(), box=True)
            res = phase1(sf)
        assert t.elapsed < 1.0
        assert not res.feasible
        assert verify_farkas(sf, res.farkas).valid
    lp = lp1()
    with Timer() as t:
        sf = to_standard_form(lp)
        res = phase1(sf)
    assert t.elapsed < 1.0
    assert res.feasible
    x = res.state.point()
    assert not any(sf.residual(x))
    point = sf.project(x)
    assert all(lp.evaluate(c.expr, point) - c.rhs == 0 for c in lp.constraints)


@pytest.mark.criterion(5, "Klee-Minty n=1..10: dantzig makes 2^n-1 phase-2 pivots, optimum 100^(n-1) (<60 s)")
def test_klee_minty_exponential_path():
    with Timer() as t:
        results = [(n, solve(klee_minty(n), "dantzig")) for n in range(1, 11)]
    assert t.elapsed < 60
    for n, res in results:
        assert res.status is Status.OPTIMAL
        assert res.phase1_pivots == 0
        assert res.phase2_pivots == 2**n - 1
        assert res.objective == 100 ** (n - 1)


@pytest.mark.criterion(6, "Klee-Minty n=1..8: all rules agree; least-entered minimal-count invariant; counts sum to pivots (<60 s)")
def test_rule_agreement():
    with Timer() as t:
        for n in range(1, 9):
            values = {rule: solve(klee_minty(n), rule).objective for rule in RULES}
            assert set(values.values()) == {100 ** (n - 1)}, values
            chosen = []

            def observer(ctx, j, active):
                assert active is PivotRule.LEAST_ENTERED
                assert all(ctx.record[j] <= ctx.record[k] for k in ctx.candidates)
                chosen.append(j)

            res = solve(klee_minty(n), "least-entered", observer=observer)
            assert res.record.total == res.phase2_pivots == len(chosen)
    assert t.elapsed < 60


def _node_g():
    g = node_g_fixture()
    flow = generate_flow_conservation(g, "zero")
    return flow, diff_constraints(generate_P(g), flow)


@pytest.mark.criterion(7, "node g: flow row x(g,F)-x(e1,g)-x(e2,g)-x(b,g)=0; diff vs P shows 3 missing inflows, rhs 1 vs 0 (<10 ms)")
def test_mdp_bridge_node_g():
    with Timer() as t:
        flow, diff = _node_g()
    assert t.elapsed < 10e-3
    con = flow.constraint("g")
    assert flow.named_terms(con.expr) == {"x(g,F)": 1, "x(e1,g)": -1, "x(e2,g)": -1, "x(b,g)": -1}
    assert con.rhs == 0
    at_g = diff["g"]
    assert at_g.missing == {"x(e1,g)": -1, "x(e2,g)": -1, "x(b,g)": -1}
    assert not at_g.extra and not at_g.mismatched
    assert at_g.rhs == (1, 0)


@pytest.mark.criterion(8, "50 random MDP graphs: both generators emit |E0| variables and |V0| constraints (<5 s)")
def test_cardinality_law():
    rng = random.Random(20250810)
    with Timer() as t:
        graphs = [random_mdp(rng, max_decision=7, max_random=4) for _ in range(50)]
        for g in graphs:
            for lp in (generate_P(g), generate_flow_conservation(g, "zero"), generate_flow_conservation(g, "unit")):
                assert len(lp.variables) == len(g.edges)
                assert len(lp.constraints) == len(g.decision)
    assert t.elapsed < 5


@pytest.mark.criterion(9, "200 random programs (<=6 vars/cons): status and optimum match basic-solution enumeration (<120 s)")
def test_oracle_equivalence():
    rng = random.Random(1980)
    with Timer() as t:
        for _ in range(200):
            lp = random_program(rng)
            status, optimum = brute_force(lp)
            for rule in RULES:
                res = solve(lp, rule)
                assert res.status.value == status
                assert res.objective == optimum
    assert t.elapsed < 120


def _report() -> str:
    parts = []
    _, row, cert = _lp1_all_ones()
    parts.append(f"{row.format()} sup={format_rational(cert.supremum)} {cert.verdict.value}")
    row, sup, cert = _lp2_all_ones()
    parts.append(f"{row.format()} sup={format_rational(sup)} {cert.verdict.value}")
    for fixture in (lp1, lp2_prefix8):
        res = solve(fixture(), "least-entered", box=True)
        parts.append(",".join(format_rational(y) for y in res.farkas))
        parts.append(trace_to_jsonl(res.trace))
    for n in range(1, 7):
        for rule in RULES:
            parts.append(trace_to_jsonl(solve(klee_minty(n), rule).trace))
    flow, diff = _node_g()
    parts.append(format_constraint(flow.constraint("g"), flow.names))
    parts.extend(diff.lines())
    return "\n".join(parts)


CLI_RUNS = [
    ["certify", "--lp", "lp1", "--multipliers", "1,1,1,1,1,1", "--box", "0..1", "--json"],
    ["certify", "--lp", "lp2-prefix8", "--search", "--json"],
    ["solve", "--lp", "klee-minty:6", "--rule", "least-entered", "--json"],
    ["solve", "--lp", "lp1", "--box", "--json"],
    ["bench", "--n", "1..5", "--rules", "dantzig,bland,greatest-improvement,least-entered"],
    ["diff", "--a", "P(node-g)", "--b", "flow(node-g,0)", "--json"],
]


def _cli(argv, seed):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    return subprocess.run([sys.executable, "-m", "pivotlab", *argv], capture_output=True, env=env, check=True).stdout


@pytest.mark.criterion(10, "repeated runs give byte-identical traces and reports")
def test_determinism():
    assert _report() == _report()
    for argv in CLI_RUNS:
        assert _cli(argv, 1) == _cli(argv, 2)
