"""Dense-tableau primal simplex over exact rationals.

Phase 1 finds a basic feasible solution or a Farkas certificate; phase 2
optimizes under a pluggable entering rule.  Every pivot is recorded.

A repeated basis signature inside a run of non-improving pivots means the
requested rule is cycling; the engine then enters by Bland's rule until the
objective strictly improves, after which the requested rule resumes.
"""

from __future__ import annotations

import enum
import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .exact_arith import ONE, ZERO, format_rational
from .lp_model import ColumnKind, LinearProgram, StandardFormLP, to_standard_form
from .pivot_rules import OccurrenceRecord, PivotRule, RuleContext, TieBreak, note_entering, select_entering


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class IterationLimitError(RuntimeError):
    pass


class CycleDetectedError(RuntimeError):
    pass


def default_iteration_cap(n_cols: int) -> int:
    return 10 * 2**n_cols


@dataclass(frozen=True)
class PivotEvent:
    iteration: int
    phase: int
    entering: int
    leaving: int
    entering_name: str
    leaving_name: str
    objective_after: Fraction
    degenerate: bool
    rule: str

    def to_record(self) -> dict:
        return {
            "iteration": self.iteration,
            "phase": self.phase,
            "entering": self.entering_name,
            "leaving": self.leaving_name,
            "objective": format_rational(self.objective_after),
            "degenerate": self.degenerate,
            "rule": self.rule,
        }


def trace_to_jsonl(trace: Sequence[PivotEvent]) -> str:
    return "".join(json.dumps(ev.to_record()) + "\n" for ev in trace)


class SimplexState:
    """Tableau ``B^-1 [A | b]`` with its reduced-cost row.

    ``reduced[j]`` is ``c_j - c_B B^-1 A_j``; the basis is optimal for the
    maximization once no eligible column has a positive entry.
    """

    def __init__(
        self,
        sf: StandardFormLP,
        rows: list[list[Fraction]],
        basis: list[int],
        cost: Sequence[Fraction],
        names: Sequence[str],
        base_rows: Sequence[Sequence[Fraction]],
        base_rhs: Sequence[Fraction],
    ):
        self.sf = sf
        self.rows = rows
        self.basis = basis
        self.cost = list(cost)
        self.names = list(names)
        self.base_rows = base_rows
        self.base_rhs = base_rhs
        self.iteration = 0
        self.reduced, self.value = self._price()

    @property
    def n_cols(self) -> int:
        return len(self.cost)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def _price(self) -> tuple[list[Fraction], Fraction]:
        d = list(self.cost)
        value = ZERO
        for row, b in zip(self.rows, self.basis):
            cb = self.cost[b]
            if cb:
                for j, a in enumerate(row[:-1]):
                    if a:
                        d[j] -= cb * a
                value += cb * row[-1]
        return d, value

    def pivot(self, r: int, j: int) -> None:
        prow = self.rows[r]
        piv = prow[j]
        if piv != 1:
            prow = [a / piv for a in prow]
            self.rows[r] = prow
        nz = [(k, a) for k, a in enumerate(prow) if a]
        for i, row in enumerate(self.rows):
            if i != r and row[j]:
                f = row[j]
                for k, a in nz:
                    row[k] -= f * a
        f = self.reduced[j]
        if f:
            for k, a in nz:
                if k < self.n_cols:
                    self.reduced[k] -= f * a
            self.value += f * prow[-1]
        self.basis[r] = j
        self.iteration += 1

    def point(self) -> list[Fraction]:
        x = [ZERO] * self.n_cols
        for row, b in zip(self.rows, self.basis):
            x[b] = row[-1]
        return x

    def check(self) -> None:
        """Assert the tableau invariants; used by the test suite after each pivot."""
        for i, row in enumerate(self.rows):
            if row[-1] < 0:
                raise AssertionError(f"row {i} lost primal feasibility")
            for k, b in enumerate(self.basis):
                if row[b] != (ONE if k == i else ZERO):
                    raise AssertionError(f"basic column {self.names[b]} is not a unit column")
        x = self.point()
        for row, b in zip(self.base_rows, self.base_rhs):
            if sum((a * v for a, v in zip(row, x) if a), ZERO) != b:
                raise AssertionError("basic solution leaves a nonzero residual")
        if self._price() != (self.reduced, self.value):
            raise AssertionError("reduced-cost row drifted from its definition")


def _ratio_row(state: SimplexState, j: int) -> int | None:
    best: int | None = None
    best_ratio = ZERO
    for i, row in enumerate(state.rows):
        a = row[j]
        if a > 0:
            ratio = row[-1] / a
            if (
                best is None
                or ratio < best_ratio
                or (ratio == best_ratio and state.basis[i] < state.basis[best])
            ):
                best, best_ratio = i, ratio
    return best


def ratio_test(state: SimplexState, entering: int) -> int | None:
    """Leaving variable id for ``entering``, or ``None`` when the column is unbounded.

    Ties on the minimum ratio go to the smallest basic-variable id.
    """
    r = _ratio_row(state, entering)
    return None if r is None else state.basis[r]


Observer = Callable[[RuleContext, int, PivotRule], None]


@dataclass
class _RunOutcome:
    status: Status
    trace: list[PivotEvent]
    record: OccurrenceRecord
    fallbacks: int
    unbounded_column: int | None = None


def _iterate(
    state: SimplexState,
    *,
    phase: int,
    rule: PivotRule,
    tiebreak: TieBreak,
    eligible: Sequence[int],
    max_iter: int,
    cycle_guard: bool,
    check: bool,
    observer: Observer | None,
    report: Callable[[Fraction], Fraction],
    count_entries: bool,
) -> _RunOutcome:
    trace: list[PivotEvent] = []
    record = OccurrenceRecord()
    visited = {frozenset(state.basis)}
    fallback = False
    fallbacks = 0
    pivots = 0
    while True:
        basic = set(state.basis)
        cands = tuple(j for j in eligible if j not in basic and state.reduced[j] > 0)
        if not cands:
            return _RunOutcome(Status.OPTIMAL, trace, record, fallbacks)
        if pivots >= max_iter:
            return _RunOutcome(Status.ITERATION_LIMIT, trace, record, fallbacks)
        active = PivotRule.BLAND if fallback else rule
        improvement = None
        if active is PivotRule.GREATEST_IMPROVEMENT:
            improvement = {}
            for j in cands:
                r = _ratio_row(state, j)
                improvement[j] = None if r is None else state.reduced[j] * state.rows[r][-1] / state.rows[r][j]
        ctx = RuleContext({j: state.reduced[j] for j in cands}, cands, record, improvement)
        j = select_entering(active, ctx, tiebreak)
        r = _ratio_row(state, j)
        if r is None:
            return _RunOutcome(Status.UNBOUNDED, trace, record, fallbacks, unbounded_column=j)
        if observer is not None:
            observer(ctx, j, active)
        before = state.value
        leaving = state.basis[r]
        state.pivot(r, j)
        pivots += 1
        if count_entries:
            record = note_entering(record, j)
        if check:
            state.check()
        trace.append(
            PivotEvent(
                iteration=state.iteration,
                phase=phase,
                entering=j,
                leaving=leaving,
                entering_name=state.names[j],
                leaving_name=state.names[leaving],
                objective_after=report(state.value),
                degenerate=state.value == before,
                rule=active.value,
            )
        )
        sig = frozenset(state.basis)
        if state.value > before:
            visited = {sig}
            fallback = False
        elif sig in visited:
            if not cycle_guard:
                raise CycleDetectedError(f"basis revisited at iteration {state.iteration} under {active.value}")
            if not fallback:
                fallbacks += 1
            fallback = True
        else:
            visited.add(sig)


@dataclass
class Phase1Result:
    state: SimplexState | None
    farkas: tuple[Fraction, ...] | None
    trace: list[PivotEvent]
    redundant_rows: tuple[int, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.state is not None


def phase1(
    sf: StandardFormLP,
    *,
    rule: PivotRule = PivotRule.DANTZIG,
    max_iter: int | None = None,
    check: bool = False,
) -> Phase1Result:
    """Find a feasible basis for ``sf`` or prove there is none.

    Rows are sign-normalized to a nonnegative right-hand side.  A row whose
    slack column is already a unit column starts with that slack basic; every
    other row gets an artificial, appended after all standard-form columns.
    On an infeasible system the multipliers come from the duals of the
    auxiliary problem and are expressed against the rows of ``sf`` as given.
    """
    m, n = sf.n_rows, sf.n_cols
    signs = [-ONE if b < 0 else ONE for b in sf.rhs]
    norm_rows = [[s * a for a in row] for s, row in zip(signs, sf.rows)]
    norm_rhs = [s * b for s, b in zip(signs, sf.rhs)]

    start_col: list[int] = []
    artificials: list[int] = []
    for i in range(m):
        col = next(
            (
                j
                for j, origin in enumerate(sf.origins)
                if origin.kind is not ColumnKind.VARIABLE and norm_rows[i][j] == 1
            ),
            None,
        )
        if col is None:
            col = n + len(artificials)
            artificials.append(i)
        start_col.append(col)
    width = n + len(artificials)
    names = list(sf.names) + [f"a~{sf.row_names[i]}" for i in artificials]

    base_rows = []
    for i in range(m):
        row = norm_rows[i] + [ZERO] * len(artificials)
        if start_col[i] >= n:
            row[start_col[i]] = ONE
        base_rows.append(row)
    rows = [list(r) + [b] for r, b in zip(base_rows, norm_rhs)]
    cost = [ZERO] * n + [-ONE] * len(artificials)

    state = SimplexState(sf, rows, list(start_col), cost, names, base_rows, norm_rhs)
    if check:
        state.check()
    cap = default_iteration_cap(width) if max_iter is None else max_iter
    run = _iterate(
        state,
        phase=1,
        rule=rule,
        tiebreak=TieBreak.COST,
        eligible=range(n),
        max_iter=cap,
        cycle_guard=True,
        check=check,
        observer=None,
        report=lambda v: v,
        count_entries=False,
    )
    if run.status is Status.ITERATION_LIMIT:
        raise IterationLimitError(f"phase 1 exceeded {cap} pivots")
    trace = run.trace

    if state.value < 0:
        duals = [cost[c] - state.reduced[c] for c in start_col]
        farkas = tuple(-s * y for s, y in zip(signs, duals))
        return Phase1Result(None, farkas, trace)

    # Degenerate artificials still basic at level zero: pivot them out, or
    # drop the row when it is a combination of the others.
    redundant: list[int] = []
    for r in range(m):
        if state.basis[r] < n:
            continue
        j = next((k for k in range(n) if state.rows[r][k] != 0), None)
        if j is None:
            redundant.append(r)
            continue
        leaving = state.basis[r]
        state.pivot(r, j)
        trace.append(
            PivotEvent(state.iteration, 1, j, leaving, names[j], names[leaving], state.value, True, "drive-out")
        )
    keep = [r for r in range(m) if r not in redundant]
    p2_rows = [state.rows[r][:n] + [state.rows[r][-1]] for r in keep]
    p2 = SimplexState(
        sf,
        p2_rows,
        [state.basis[r] for r in keep],
        sf.objective,
        sf.names,
        [sf.rows[r] for r in keep],
        [sf.rhs[r] for r in keep],
    )
    p2.iteration = state.iteration
    if check:
        p2.check()
    return Phase1Result(p2, None, trace, tuple(redundant))


@dataclass
class SolveResult:
    status: Status
    standard_form: StandardFormLP
    trace: tuple[PivotEvent, ...] = ()
    solution: dict[str, Fraction] | None = None
    objective: Fraction | None = None
    farkas: tuple[Fraction, ...] | None = None
    ray: tuple[Fraction, ...] | None = None
    record: OccurrenceRecord = field(default_factory=OccurrenceRecord)
    cycle_fallbacks: int = 0
    point: tuple[Fraction, ...] | None = None

    @property
    def phase1_pivots(self) -> int:
        return sum(1 for ev in self.trace if ev.phase == 1)

    @property
    def phase2_pivots(self) -> int:
        return sum(1 for ev in self.trace if ev.phase == 2)


def phase2(
    state: SimplexState,
    rule: PivotRule | str = PivotRule.DANTZIG,
    *,
    max_iter: int | None = None,
    tiebreak: TieBreak | str = TieBreak.COST,
    cycle_guard: bool = True,
    check: bool = False,
    observer: Observer | None = None,
) -> SolveResult:
    sf = state.sf
    cap = default_iteration_cap(sf.n_cols) if max_iter is None else max_iter
    run = _iterate(
        state,
        phase=2,
        rule=PivotRule(rule),
        tiebreak=TieBreak(tiebreak),
        eligible=range(sf.n_cols),
        max_iter=cap,
        cycle_guard=cycle_guard,
        check=check,
        observer=observer,
        report=lambda v: sf.to_source_objective(v),
        count_entries=True,
    )
    x = state.point()
    result = SolveResult(
        status=run.status,
        standard_form=sf,
        trace=tuple(run.trace),
        record=run.record,
        cycle_fallbacks=run.fallbacks,
        point=tuple(x),
    )
    if run.status is Status.OPTIMAL:
        result.solution = sf.project(x)
        result.objective = sf.to_source_objective(state.value)
    elif run.status is Status.UNBOUNDED:
        j = run.unbounded_column
        ray = [ZERO] * sf.n_cols
        ray[j] = ONE
        for row, b in zip(state.rows, state.basis):
            ray[b] = -row[j]
        result.ray = tuple(ray)
    return result


@dataclass(frozen=True)
class FarkasVerdict:
    valid: bool
    y_a: tuple[Fraction, ...]
    y_b: Fraction
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def verify_farkas(sf: StandardFormLP, y: Sequence[Fraction]) -> FarkasVerdict:
    """Check ``y.A <= 0`` and ``y.b > 0``, which rules out ``Ax = b, x >= 0``."""
    if len(y) != sf.n_rows:
        raise ValueError(f"certificate has {len(y)} entries for {sf.n_rows} rows")
    y_a = tuple(
        sum((yi * row[j] for yi, row in zip(y, sf.rows) if yi and row[j]), ZERO) for j in range(sf.n_cols)
    )
    y_b = sum((yi * b for yi, b in zip(y, sf.rhs)), ZERO)
    bad = [sf.names[j] for j, v in enumerate(y_a) if v > 0]
    if bad:
        return FarkasVerdict(False, y_a, y_b, f"y.A positive at {', '.join(bad)}")
    if y_b <= 0:
        return FarkasVerdict(False, y_a, y_b, "y.b is not positive")
    return FarkasVerdict(True, y_a, y_b)


def solve(
    lp: LinearProgram,
    rule: PivotRule | str = PivotRule.DANTZIG,
    *,
    box: bool = False,
    max_iter: int | None = None,
    tiebreak: TieBreak | str = TieBreak.COST,
    cycle_guard: bool = True,
    check: bool = False,
    observer: Observer | None = None,
) -> SolveResult:
    """Standard form, phase 1, phase 2; the trace covers both phases (``PivotEvent.phase``)."""
    sf = to_standard_form(lp, box=box)
    try:
        p1 = phase1(sf, max_iter=max_iter, check=check)
    except IterationLimitError:
        return SolveResult(Status.ITERATION_LIMIT, sf)
    if not p1.feasible:
        return SolveResult(Status.INFEASIBLE, sf, trace=tuple(p1.trace), farkas=p1.farkas)
    result = phase2(
        p1.state,
        rule,
        max_iter=max_iter,
        tiebreak=tiebreak,
        cycle_guard=cycle_guard,
        check=check,
        observer=observer,
    )
    result.trace = tuple(p1.trace) + result.trace
    return result
