"""Entering-variable selection.

Rules are pure functions of a :class:`RuleContext`.  Reduced costs are always
oriented so that a positive value means the objective improves (the engine
maximizes internally).
"""

from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType


class PivotRule(enum.Enum):
    DANTZIG = "dantzig"
    BLAND = "bland"
    GREATEST_IMPROVEMENT = "greatest-improvement"
    LEAST_ENTERED = "least-entered"


class TieBreak(enum.Enum):
    COST = "cost"  # largest reduced cost, then smallest id
    INDEX = "index"  # smallest id


@dataclass(frozen=True)
class OccurrenceRecord:
    """How many times each variable has entered the basis during phase 2.

    Missing ids have count zero.
    """

    counts: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("occurrence counts must be nonnegative")
        object.__setattr__(self, "counts", MappingProxyType(dict(self.counts)))

    def __getitem__(self, var: int) -> int:
        return self.counts.get(var, 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OccurrenceRecord):
            return NotImplemented
        return {k: v for k, v in self.counts.items() if v} == {k: v for k, v in other.counts.items() if v}


def note_entering(record: OccurrenceRecord, entering: int) -> OccurrenceRecord:
    if entering < 0:
        raise ValueError(f"invalid variable id {entering}")
    counts = dict(record.counts)
    counts[entering] = counts.get(entering, 0) + 1
    return OccurrenceRecord(counts)


@dataclass(frozen=True)
class RuleContext:
    """Everything a rule may look at when choosing the entering column.

    ``improvement`` maps each candidate to reduced cost times ratio-test step;
    ``None`` there means the step is unbounded.  The engine only fills it in
    for rules that need it.
    """

    reduced_costs: Mapping[int, Fraction]
    candidates: tuple[int, ...]
    record: OccurrenceRecord = field(default_factory=OccurrenceRecord)
    improvement: Mapping[int, Fraction | None] | None = None

    def __post_init__(self) -> None:
        for var in self.candidates:
            if self.reduced_costs[var] <= 0:
                raise ValueError(f"candidate {var} does not have an improving reduced cost")


def _cost_then_index(ctx: RuleContext, pool) -> int:
    return min(pool, key=lambda j: (-ctx.reduced_costs[j], j))


def select_entering(
    rule: PivotRule | str,
    ctx: RuleContext,
    tiebreak: TieBreak | str = TieBreak.COST,
) -> int | None:
    rule = PivotRule(rule)
    tiebreak = TieBreak(tiebreak)
    if not ctx.candidates:
        return None
    cands = ctx.candidates
    if rule is PivotRule.DANTZIG:
        return _cost_then_index(ctx, cands)
    if rule is PivotRule.BLAND:
        return min(cands)
    if rule is PivotRule.GREATEST_IMPROVEMENT:
        if ctx.improvement is None:
            raise ValueError("greatest-improvement needs per-candidate improvement estimates")
        unbounded = [j for j in cands if ctx.improvement[j] is None]
        if unbounded:
            return min(unbounded)
        best = max(ctx.improvement[j] for j in cands)
        return _cost_then_index(ctx, [j for j in cands if ctx.improvement[j] == best])
    # least-entered
    fewest = min(ctx.record[j] for j in cands)
    pool = [j for j in cands if ctx.record[j] == fewest]
    if tiebreak is TieBreak.INDEX:
        return min(pool)
    return _cost_then_index(ctx, pool)
