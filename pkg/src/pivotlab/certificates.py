"""Aggregation certificates for equality systems under box bounds.

Adding up equality rows with multipliers ``y`` gives one valid equation
``sum_j c_j x_j = r``.  If the largest value the left side can take over the
box is below ``r`` (or the smallest is above it) no point of the box satisfies
the system.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .exact_arith import ZERO, as_rational, format_rational
from .lp_model import LinearExpression, LinearProgram, Relation, format_expression, to_standard_form
from .simplex import phase1


class UnboundedBoxError(ValueError):
    """The box leaves the aggregated left-hand side unbounded in the requested direction."""


class Verdict(enum.Enum):
    PROVES_INFEASIBLE = "proves_infeasible"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AggregatedRow:
    coefficients: Mapping[str, Fraction]
    rhs: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", {k: v for k, v in self.coefficients.items() if v != 0})

    def format(self) -> str:
        names = list(self.coefficients)
        expr = LinearExpression(enumerate(self.coefficients.values()))
        return f"{format_expression(expr, names)} = {format_rational(self.rhs)}"

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class Box:
    """Per-variable bounds; ``None`` means unbounded on that side."""

    lower: Mapping[str, Fraction | None]
    upper: Mapping[str, Fraction | None]

    @classmethod
    def uniform(cls, lp: LinearProgram, lo: Fraction | int | None, hi: Fraction | int | None) -> Box:
        lo = None if lo is None else as_rational(lo)
        hi = None if hi is None else as_rational(hi)
        return cls({n: lo for n in lp.names}, {n: hi for n in lp.names})


@dataclass(frozen=True)
class BoxInfeasibilityCertificate:
    multipliers: tuple[Fraction, ...]
    aggregated: AggregatedRow
    supremum: Fraction | None  # None: unbounded above
    infimum: Fraction | None  # None: unbounded below
    verdict: Verdict

    @property
    def proves_infeasible(self) -> bool:
        return self.verdict is Verdict.PROVES_INFEASIBLE


def aggregate(lp: LinearProgram, multipliers: Sequence[Fraction | int]) -> AggregatedRow:
    if len(multipliers) != len(lp.constraints):
        raise ValueError(f"{len(multipliers)} multipliers for {len(lp.constraints)} constraints")
    inequalities = [c.name for c in lp.constraints if c.relation is not Relation.EQ]
    if inequalities:
        raise ValueError(f"aggregation needs equality constraints; {', '.join(inequalities)} are not")
    acc = [ZERO] * len(lp.variables)
    rhs = ZERO
    for y, con in zip(multipliers, lp.constraints):
        y = as_rational(y)
        if not y:
            continue
        for var, coef in con.expr.items():
            acc[var] += y * coef
        rhs += y * con.rhs
    return AggregatedRow({v.name: acc[v.id] for v in lp.variables}, rhs)


def _bound_sum(row: AggregatedRow, lower, upper, *, maximize: bool) -> Fraction:
    total = ZERO
    for name, coef in row.coefficients.items():
        lo, hi = lower.get(name), upper.get(name)
        if lo is not None and hi is not None and lo > hi:
            raise ValueError(f"empty box for {name}: {format_rational(lo)} > {format_rational(hi)}")
        use_upper = (coef > 0) == maximize
        bound = hi if use_upper else lo
        if bound is None:
            side = "upper" if use_upper else "lower"
            raise UnboundedBoxError(f"{name} has coefficient {format_rational(coef)} and no {side} bound")
        total += coef * bound
    return total


def box_supremum(row: AggregatedRow, lower: Mapping[str, Fraction | None], upper: Mapping[str, Fraction | None]) -> Fraction:
    return _bound_sum(row, lower, upper, maximize=True)


def box_infimum(row: AggregatedRow, lower: Mapping[str, Fraction | None], upper: Mapping[str, Fraction | None]) -> Fraction:
    return _bound_sum(row, lower, upper, maximize=False)


def check_certificate(lp: LinearProgram, multipliers: Sequence[Fraction | int], box: Box) -> BoxInfeasibilityCertificate:
    row = aggregate(lp, multipliers)
    try:
        sup = box_supremum(row, box.lower, box.upper)
    except UnboundedBoxError:
        sup = None
    try:
        inf = box_infimum(row, box.lower, box.upper)
    except UnboundedBoxError:
        inf = None
    infeasible = (sup is not None and sup < row.rhs) or (inf is not None and inf > row.rhs)
    return BoxInfeasibilityCertificate(
        tuple(as_rational(y) for y in multipliers),
        row,
        sup,
        inf,
        Verdict.PROVES_INFEASIBLE if infeasible else Verdict.INCONCLUSIVE,
    )


def _integral(ys: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Positive rescaling to coprime integers; the cone property keeps validity."""
    nonzero = [y for y in ys if y]
    if not nonzero:
        return tuple(ys)
    lcm = math.lcm(*(y.denominator for y in nonzero))
    ints = [int(y * lcm) for y in ys]
    g = math.gcd(*ints)
    return tuple(Fraction(v, g) for v in ints)


def search_certificate(lp: LinearProgram, box: Box, *, max_iter: int | None = None) -> BoxInfeasibilityCertificate | None:
    """Phase 1 on the system restricted to ``box``; ``None`` when it is feasible.

    The returned multipliers are the Farkas multipliers of the equality rows,
    rescaled to integers, and have already passed :func:`check_certificate`.
    """
    aggregate(lp, [0] * len(lp.constraints))  # rejects inequalities early
    bounds = {}
    for name in lp.names:
        lo, hi = box.lower.get(name), box.upper.get(name)
        if lo is None:
            raise UnboundedBoxError(f"{name}: certificate search needs a finite lower bound")
        bounds[name] = (lo, hi)
    sf = to_standard_form(lp.with_bounds(bounds))
    result = phase1(sf, max_iter=max_iter)
    if result.feasible:
        return None
    ys = _integral(result.farkas[: len(lp.constraints)])
    cert = check_certificate(lp, ys, box)
    if not cert.proves_infeasible:
        raise AssertionError("phase-1 multipliers failed the aggregation check")
    return cert
