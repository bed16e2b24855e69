import json
import random
from fractions import Fraction

import pytest

from oracles import brute_force, random_program
from pivotlab.fixtures import lp1, lp2_prefix8
from pivotlab.generators import klee_minty
from pivotlab.lp_model import make_program, to_standard_form
from pivotlab.simplex import (
    CycleDetectedError,
    IterationLimitError,
    SimplexState,
    Status,
    phase1,
    phase2,
    ratio_test,
    solve,
    trace_to_jsonl,
    verify_farkas,
)

RULES = ["dantzig", "bland", "greatest-improvement", "least-entered"]

F = Fraction


def chvatal_cycling():
    """Degenerate program on which Dantzig's rule with smallest-index leaving cycles."""
    return make_program(
        "max",
        ["x1", "x2", "x3", "x4"],
        {"x1": 10, "x2": -57, "x3": -9, "x4": -24},
        [
            ("c1", {"x1": F(1, 2), "x2": F(-11, 2), "x3": F(-5, 2), "x4": 9}, "<=", 0),
            ("c2", {"x1": F(1, 2), "x2": F(-3, 2), "x3": F(-1, 2), "x4": 1}, "<=", 0),
            ("c3", {"x1": 1}, "<=", 1),
        ],
    )


def test_phase1_boxed_lp1_is_infeasible():
    sf = to_standard_form(lp1(), box=True)
    res = phase1(sf, check=True)
    assert not res.feasible
    assert verify_farkas(sf, res.farkas)


def test_phase1_lp1_unboxed_point_satisfies_rows():
    lp = lp1()
    sf = to_standard_form(lp)
    res = phase1(sf, check=True)
    assert res.feasible
    point = sf.project(res.state.point())
    for con in lp.constraints:
        assert lp.evaluate(con.expr, point) == con.rhs
    assert all(v >= 0 for v in point.values())


def test_phase1_single_equality():
    lp = make_program("max", ["x"], {}, [("c", {"x": 1}, "=", 1)])
    res = phase1(to_standard_form(lp), check=True)
    assert res.feasible
    assert res.state.point() == [1]


def test_phase1_drops_redundant_rows():
    lp = make_program(
        "max", ["x", "y"], {"x": 1}, [("a", {"x": 1, "y": 1}, "=", 2), ("b", {"x": 2, "y": 2}, "=", 4)]
    )
    res = phase1(to_standard_form(lp), check=True)
    assert res.feasible
    assert len(res.redundant_rows) == 1
    out = phase2(res.state, "dantzig", check=True)
    assert out.status is Status.OPTIMAL and out.objective == 2


def test_phase1_iteration_cap():
    with pytest.raises(IterationLimitError):
        phase1(to_standard_form(lp1()), max_iter=1)


def test_km2_dantzig():
    res = solve(klee_minty(2), "dantzig", check=True)
    assert res.status is Status.OPTIMAL
    assert res.phase1_pivots == 0
    assert res.phase2_pivots == 3
    assert res.objective == 100
    assert brute_force(klee_minty(2)) == ("optimal", 100)


def test_km3_dantzig():
    res = solve(klee_minty(3), "dantzig", check=True)
    assert (res.status, res.phase2_pivots, res.objective) == (Status.OPTIMAL, 7, 10000)


@pytest.mark.parametrize("rule", RULES)
def test_already_optimal(rule):
    lp = make_program("max", ["x"], {"x": -1}, [("c", {"x": 1}, "<=", 5)])
    res = solve(lp, rule)
    assert res.status is Status.OPTIMAL
    assert res.trace == ()
    assert res.objective == 0


def _km2_state() -> SimplexState:
    res = phase1(to_standard_form(klee_minty(2)))
    return res.state


def test_ratio_test_km2():
    state = _km2_state()
    # rows x1 <= 1 and 20 x1 + x2 <= 100: ratios 1 and 5
    assert ratio_test(state, 0) == state.sf.names.index("s~c1")


def test_ratio_test_unbounded():
    lp = make_program("max", ["x", "y"], {"x": 1}, [("c", {"x": -1, "y": 1}, "<=", 1)])
    state = phase1(to_standard_form(lp)).state
    assert ratio_test(state, 0) is None
    res = phase2(state)
    assert res.status is Status.UNBOUNDED
    sf = res.standard_form
    d = res.ray
    assert all(v >= 0 for v in d)
    assert all(sum(a * v for a, v in zip(row, d)) == 0 for row in sf.rows)
    assert sf.internal_objective(d) > 0


def test_ratio_tie_prefers_smallest_basic_id():
    lp = make_program("max", ["x"], {"x": 1}, [("c1", {"x": 2}, "<=", 4), ("c2", {"x": 1}, "<=", 2)])
    sf = to_standard_form(lp)
    # Rows listed with the larger basic id first so row order cannot decide.
    rows = [list(sf.rows[1]) + [sf.rhs[1]], list(sf.rows[0]) + [sf.rhs[0]]]
    state = SimplexState(sf, rows, [2, 1], sf.objective, sf.names, [sf.rows[1], sf.rows[0]], [sf.rhs[1], sf.rhs[0]])
    state.check()
    assert ratio_test(state, 0) == 1


def test_verify_farkas_rejections():
    sf = to_standard_form(lp1(), box=True)
    assert not verify_farkas(sf, [0] * sf.n_rows)
    y = phase1(sf).farkas
    assert verify_farkas(sf, [2 * v for v in y])
    assert not verify_farkas(sf, [-v for v in y])
    with pytest.raises(ValueError):
        verify_farkas(sf, y[:-1])


def test_empty_feasible_set():
    lp = make_program("max", ["x1"], {"x1": 1}, [("c", {"x1": 1}, "=", -1)])
    res = solve(lp)
    assert res.status is Status.INFEASIBLE
    assert verify_farkas(res.standard_form, res.farkas)


@pytest.mark.parametrize("rule", RULES)
def test_boxed_fixtures_infeasible_for_every_rule(rule):
    for fixture in (lp1, lp2_prefix8):
        res = solve(fixture(), rule, box=True, check=True)
        assert res.status is Status.INFEASIBLE
        assert verify_farkas(res.standard_form, res.farkas)


def test_trivial_violated_row():
    lp = make_program("max", ["x"], {"x": 1}, [("c", {}, "=", 1)])
    res = solve(lp)
    assert res.status is Status.INFEASIBLE
    assert verify_farkas(res.standard_form, res.farkas)


def test_cycle_guard():
    with pytest.raises(CycleDetectedError):
        solve(chvatal_cycling(), "dantzig", cycle_guard=False)
    res = solve(chvatal_cycling(), "dantzig", check=True)
    assert res.status is Status.OPTIMAL
    assert res.objective == 1
    assert res.cycle_fallbacks == 1
    assert {ev.rule for ev in res.trace} == {"dantzig", "bland"}


def test_bland_does_not_cycle():
    res = solve(chvatal_cycling(), "bland", cycle_guard=False, check=True)
    assert res.status is Status.OPTIMAL and res.objective == 1
    assert res.cycle_fallbacks == 0


@pytest.mark.parametrize("rule", RULES)
def test_every_rule_terminates_on_cycling_instance(rule):
    res = solve(chvatal_cycling(), rule, check=True)
    assert res.status is Status.OPTIMAL and res.objective == 1


def test_phase2_iteration_limit():
    res = solve(klee_minty(4), "dantzig", max_iter=3)
    assert res.status is Status.ITERATION_LIMIT
    assert res.phase2_pivots == 3


def test_degenerate_flag_matches_objective():
    res = solve(chvatal_cycling(), "dantzig")
    prev = None
    for ev in res.trace:
        if ev.phase == 2:
            if prev is not None:
                assert ev.degenerate == (ev.objective_after == prev)
            prev = ev.objective_after
    assert any(ev.degenerate for ev in res.trace)


@pytest.mark.parametrize("rule", RULES)
def test_objective_monotone(rule):
    for n in range(1, 6):
        values = [ev.objective_after for ev in solve(klee_minty(n), rule).trace if ev.phase == 2]
        assert all(b > a for a, b in zip([0] + values, values))


def test_trace_jsonl_fields():
    res = solve(klee_minty(2), "dantzig")
    lines = trace_to_jsonl(res.trace).splitlines()
    first = json.loads(lines[0])
    assert first == {
        "iteration": 1,
        "phase": 2,
        "entering": "x1",
        "leaving": "s~c1",
        "objective": "10",
        "degenerate": False,
        "rule": "dantzig",
    }
    assert json.loads(lines[-1])["objective"] == "100"


def test_minimize_sense():
    lp = make_program("min", ["x", "y"], {"x": 2, "y": 3}, [("c", {"x": 1, "y": 1}, ">=", 4)])
    res = solve(lp, check=True)
    assert res.status is Status.OPTIMAL
    assert res.objective == 8
    assert res.solution == {"x": 4, "y": 0}


@pytest.mark.parametrize("seed", range(60))
def test_matches_brute_force(seed):
    lp = random_program(random.Random(seed))
    status, optimum = brute_force(lp)
    for rule in RULES:
        res = solve(lp, rule, check=True)
        assert res.status.value == status, rule
        if status == "optimal":
            assert res.objective == optimum
            assert lp.is_feasible(res.solution)
            assert lp.objective_value(res.solution) == optimum
        elif status == "infeasible":
            assert verify_farkas(res.standard_form, res.farkas)
