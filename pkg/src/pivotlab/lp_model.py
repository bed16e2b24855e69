"""Linear programs: data model, the line-oriented text format, standard form.

The text format::

    # comment
    var <name> [>= <rational>] [<= <rational>]
    max|min <rational> <name> [ (+|-) <rational> <name> ]*
    <label>: <rational> <name> [ (+|-) <rational> <name> ]* (=|<=|>=) <rational>

A coefficient of 1 may be omitted and an empty expression is written ``0``.
Variables are matched by name and numbered in declaration order.
"""

from __future__ import annotations

import enum
import logging
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .exact_arith import (
    ONE,
    ZERO,
    RationalSyntaxError,
    as_rational,
    format_rational,
    parse_rational,
)

log = logging.getLogger(__name__)

NAME_PATTERN = r"[A-Za-z_][A-Za-z0-9_.,()\[\]']*"
_NAME = re.compile(NAME_PATTERN)
_COEF = re.compile(r"[0-9]+(?:/[0-9]+)?")
_RELATION = re.compile(r"<=|>=|=")


class LpError(ValueError):
    """Base class for malformed programs and documents."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class LpSyntaxError(LpError):
    pass


class UndeclaredVariableError(LpError):
    pass


class DuplicateNameError(LpError):
    pass


class InconsistentBoundsError(LpError):
    pass


class Sense(enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"


class Relation(enum.Enum):
    EQ = "="
    LE = "<="
    GE = ">="


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    lower: Fraction = ZERO
    upper: Fraction | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", as_rational(self.lower))
        if self.upper is not None:
            object.__setattr__(self, "upper", as_rational(self.upper))
            if self.lower > self.upper:
                raise InconsistentBoundsError(
                    f"variable {self.name}: lower bound {format_rational(self.lower)} "
                    f"exceeds upper bound {format_rational(self.upper)}"
                )


class LinearExpression:
    """Sparse map from variable id to a nonzero coefficient.

    Term order is kept (it is how expressions are printed) but does not take
    part in equality.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, Fraction] | Iterable[tuple[int, Fraction]] = ()):
        acc: dict[int, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for var, coef in items:
            acc[var] = acc.get(var, ZERO) + as_rational(coef)
        self._terms = {v: c for v, c in acc.items() if c != 0}

    def __getitem__(self, var: int) -> Fraction:
        return self._terms.get(var, ZERO)

    def __contains__(self, var: object) -> bool:
        return var in self._terms

    def __iter__(self) -> Iterator[int]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def items(self):
        return self._terms.items()

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearExpression):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{v}: {format_rational(c)}" for v, c in self._terms.items())
        return f"LinearExpression({{{body}}})"


@dataclass(frozen=True)
class Constraint:
    name: str
    expr: LinearExpression
    relation: Relation
    rhs: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "rhs", as_rational(self.rhs))

    @property
    def is_trivial(self) -> bool:
        """True for a row with no terms, e.g. ``0 = 1``."""
        return len(self.expr) == 0

    def trivially_holds(self) -> bool:
        lhs = ZERO
        if self.relation is Relation.EQ:
            return lhs == self.rhs
        if self.relation is Relation.LE:
            return lhs <= self.rhs
        return lhs >= self.rhs


@dataclass(frozen=True)
class LinearProgram:
    sense: Sense
    objective: LinearExpression
    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...] = ()
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        index: dict[str, int] = {}
        for pos, var in enumerate(self.variables):
            if var.id != pos:
                raise LpError(f"variable {var.name} has id {var.id}, expected {pos}")
            if var.name in index:
                raise DuplicateNameError(f"duplicate variable name {var.name!r}")
            index[var.name] = pos
        object.__setattr__(self, "_index", index)
        n = len(self.variables)
        labels: set[str] = set()
        for con in self.constraints:
            if con.name in labels:
                raise DuplicateNameError(f"duplicate constraint label {con.name!r}")
            labels.add(con.name)
            for var in con.expr:
                if not 0 <= var < n:
                    raise UndeclaredVariableError(f"constraint {con.name} uses undeclared variable id {var}")
        for var in self.objective:
            if not 0 <= var < n:
                raise UndeclaredVariableError(f"objective uses undeclared variable id {var}")

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UndeclaredVariableError(f"undeclared variable {name!r}") from None

    def variable(self, name: str) -> Variable:
        return self.variables[self.index(name)]

    def constraint(self, name: str) -> Constraint:
        for con in self.constraints:
            if con.name == name:
                return con
        raise KeyError(name)

    def expression(self, terms: Mapping[str, int | Fraction]) -> LinearExpression:
        return LinearExpression((self.index(k), as_rational(v)) for k, v in terms.items())

    def named_terms(self, expr: LinearExpression) -> dict[str, Fraction]:
        return {self.variables[v].name: c for v, c in expr.items()}

    def trivial_constraints(self) -> list[Constraint]:
        return [c for c in self.constraints if c.is_trivial]

    def with_bounds(self, bounds: Mapping[str, tuple[Fraction | None, Fraction | None]]) -> LinearProgram:
        """Copy with per-variable (lower, upper) replaced; names absent from ``bounds`` keep theirs."""
        new_vars = []
        for var in self.variables:
            if var.name in bounds:
                lo, hi = bounds[var.name]
                var = Variable(var.id, var.name, ZERO if lo is None else lo, hi)
            new_vars.append(var)
        return LinearProgram(self.sense, self.objective, tuple(new_vars), self.constraints)

    def evaluate(self, expr: LinearExpression, point: Mapping[str, Fraction]) -> Fraction:
        return sum((c * point[self.variables[v].name] for v, c in expr.items()), ZERO)

    def is_feasible(self, point: Mapping[str, Fraction]) -> bool:
        for var in self.variables:
            x = point[var.name]
            if x < var.lower or (var.upper is not None and x > var.upper):
                return False
        for con in self.constraints:
            lhs = self.evaluate(con.expr, point)
            if con.relation is Relation.EQ and lhs != con.rhs:
                return False
            if con.relation is Relation.LE and lhs > con.rhs:
                return False
            if con.relation is Relation.GE and lhs < con.rhs:
                return False
        return True

    def objective_value(self, point: Mapping[str, Fraction]) -> Fraction:
        return self.evaluate(self.objective, point)


def make_program(
    sense: Sense | str,
    variables: Sequence[str | tuple],
    objective: Mapping[str, int | Fraction],
    constraints: Iterable[tuple[str, Mapping[str, int | Fraction], Relation | str, int | Fraction]] = (),
) -> LinearProgram:
    """Build a program from names.

    ``variables`` holds names or ``(name, lower, upper)`` tuples; each
    constraint is ``(label, {name: coef}, relation, rhs)``.
    """
    sense = sense if isinstance(sense, Sense) else Sense(sense)
    decls = []
    for pos, spec in enumerate(variables):
        if isinstance(spec, str):
            decls.append(Variable(pos, spec))
        else:
            name, lo, hi = spec
            decls.append(Variable(pos, name, ZERO if lo is None else lo, hi))
    shell = LinearProgram(sense, LinearExpression(), tuple(decls))
    cons = tuple(
        Constraint(label, shell.expression(terms), rel if isinstance(rel, Relation) else Relation(rel), as_rational(rhs))
        for label, terms, rel, rhs in constraints
    )
    return LinearProgram(sense, shell.expression(objective), tuple(decls), cons)


# -- text format --------------------------------------------------------------


def format_expression(expr: LinearExpression, names: Sequence[str]) -> str:
    parts: list[str] = []
    for var, coef in expr.items():
        name = names[var]
        mag = abs(coef)
        body = name if mag == 1 else f"{format_rational(mag)} {name}"
        if not parts:
            parts.append(body if coef > 0 else f"-{body}")
        else:
            parts.append(("+ " if coef > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def format_constraint(con: Constraint, names: Sequence[str]) -> str:
    return f"{con.name}: {format_expression(con.expr, names)} {con.relation.value} {format_rational(con.rhs)}"


def _format_var(var: Variable) -> str:
    text = f"var {var.name}"
    if var.lower != 0:
        text += f" >= {format_rational(var.lower)}"
    if var.upper is not None:
        text += f" <= {format_rational(var.upper)}"
    return text


def serialize_lp(lp: LinearProgram) -> str:
    names = lp.names
    lines = [_format_var(v) for v in lp.variables]
    lines.append(f"{lp.sense.value} {format_expression(lp.objective, names)}")
    lines.extend(format_constraint(c, names) for c in lp.constraints)
    return "\n".join(lines) + "\n"


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def normalize_lp_text(text: str) -> str:
    """Drop comments and blank lines and collapse runs of spaces."""
    out = []
    for raw in text.splitlines():
        line = " ".join(_strip_comment(raw).split())
        if line:
            out.append(line)
    return "\n".join(out) + "\n"


def _parse_literal(text: str, lineno: int, col: int) -> Fraction:
    try:
        return parse_rational(text)
    except (RationalSyntaxError, ZeroDivisionError) as exc:
        raise LpSyntaxError(str(exc), lineno, col) from None


def _parse_expression(
    text: str, offset: int, lineno: int, index: Mapping[str, int]
) -> LinearExpression:
    terms: list[tuple[int, Fraction]] = []
    pos = 0
    first = True
    lone_constant = False

    def skip_ws(p: int) -> int:
        while p < len(text) and text[p].isspace():
            p += 1
        return p

    while True:
        pos = skip_ws(pos)
        if pos >= len(text):
            break
        if lone_constant:
            raise LpSyntaxError("nothing may follow a constant expression", lineno, offset + pos + 1)
        sign = ONE
        if text[pos] in "+-":
            sign = -ONE if text[pos] == "-" else ONE
            pos = skip_ws(pos + 1)
        elif not first:
            raise LpSyntaxError("expected '+' or '-'", lineno, offset + pos + 1)
        coef = ONE
        m = _COEF.match(text, pos)
        if m:
            coef = _parse_literal(m.group(), lineno, offset + pos + 1)
            pos = skip_ws(m.end())
        n = _NAME.match(text, pos)
        if not n:
            if m and first and coef == 0 and skip_ws(pos) >= len(text):
                lone_constant = True
                first = False
                continue
            raise LpSyntaxError("expected variable name", lineno, offset + pos + 1)
        name = n.group()
        if name not in index:
            raise UndeclaredVariableError(f"undeclared variable {name!r}", lineno, offset + pos + 1)
        terms.append((index[name], sign * coef))
        pos = n.end()
        first = False
    if first:
        raise LpSyntaxError("empty expression", lineno, offset + 1)
    return LinearExpression(terms)


def parse_lp(text: str) -> LinearProgram:
    lines = [(no, _strip_comment(raw)) for no, raw in enumerate(text.splitlines(), start=1)]
    lines = [(no, line) for no, line in lines if line.strip()]

    variables: list[Variable] = []
    index: dict[str, int] = {}
    for no, line in lines:
        tokens = line.split()
        if tokens[0] != "var":
            continue
        col = line.index("var") + 1
        if len(tokens) < 2:
            raise LpSyntaxError("missing variable name", no, col)
        name = tokens[1]
        if not _NAME.fullmatch(name):
            raise LpSyntaxError(f"invalid variable name {name!r}", no, line.index(name, col) + 1)
        if name in index:
            raise DuplicateNameError(f"duplicate variable name {name!r}", no, line.index(name, col) + 1)
        lower, upper = ZERO, None
        rest = tokens[2:]
        seen: set[str] = set()
        while rest:
            if len(rest) < 2 or rest[0] not in (">=", "<="):
                raise LpSyntaxError(f"expected '>= r' or '<= r', got {' '.join(rest)!r}", no)
            op, lit = rest[0], rest[1]
            if op in seen:
                raise LpSyntaxError(f"repeated bound {op}", no)
            seen.add(op)
            value = _parse_literal(lit, no, line.rfind(lit) + 1)
            if op == ">=":
                lower = value
            else:
                upper = value
            rest = rest[2:]
        try:
            var = Variable(len(variables), name, lower, upper)
        except InconsistentBoundsError as exc:
            raise InconsistentBoundsError(exc.message, no) from None
        index[name] = var.id
        variables.append(var)

    if not variables:
        raise LpError("program declares no variables")

    objective: tuple[Sense, LinearExpression] | None = None
    constraints: list[Constraint] = []
    labels: set[str] = set()
    for no, line in lines:
        head = line.split()[0]
        if head == "var":
            continue
        if head in ("max", "min"):
            if objective is not None:
                raise LpSyntaxError("second objective line", no, 1)
            start = line.index(head) + len(head)
            objective = (Sense(head), _parse_expression(line[start:], start, no, index))
            continue
        label, colon, body = line.partition(":")
        label = label.strip()
        if not colon:
            raise LpSyntaxError(f"unrecognized line {line.strip()!r}", no, 1)
        if not _NAME.fullmatch(label):
            raise LpSyntaxError(f"invalid constraint label {label!r}", no, 1)
        if label in labels:
            raise DuplicateNameError(f"duplicate constraint label {label!r}", no, 1)
        labels.add(label)
        base = len(line) - len(body)
        rel = _RELATION.search(body)
        if rel is None:
            raise LpSyntaxError("missing relation (=, <=, >=)", no, len(line))
        expr = _parse_expression(body[: rel.start()], base, no, index)
        rhs_text = body[rel.end():].strip()
        rhs = _parse_literal(rhs_text, no, base + rel.end() + 1)
        con = Constraint(label, expr, Relation(rel.group()), rhs)
        if con.is_trivial:
            log.warning(
                "line %d: constraint %s has no terms and is trivially %s",
                no, label, "satisfied" if con.trivially_holds() else "violated",
            )
        constraints.append(con)

    if objective is None:
        raise LpSyntaxError("missing objective line (max|min ...)")
    sense, obj = objective
    return LinearProgram(sense, obj, tuple(variables), tuple(constraints))


# -- standard form ------------------------------------------------------------


class ColumnKind(enum.Enum):
    VARIABLE = "var"
    SLACK = "slack"
    BOUND = "bound"


@dataclass(frozen=True)
class ColumnOrigin:
    kind: ColumnKind
    ref: int  # variable id for VARIABLE/BOUND, constraint index for SLACK


@dataclass(frozen=True)
class StandardFormLP:
    """``max c.x  s.t.  A x = b, x >= 0`` plus the way back to the source program.

    Structural column ``j`` holds ``x_j - lower_j``.  ``objective`` is always
    oriented for maximization; for a minimization source it is negated, and
    ``objective_constant`` collects the lower-bound shift.
    """

    source: LinearProgram
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    objective: tuple[Fraction, ...]
    objective_constant: Fraction
    names: tuple[str, ...]
    origins: tuple[ColumnOrigin, ...]
    row_names: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.names)

    @property
    def n_structural(self) -> int:
        return len(self.source.variables)

    def column(self, j: int) -> list[Fraction]:
        return [row[j] for row in self.rows]

    def residual(self, x: Sequence[Fraction]) -> list[Fraction]:
        return [sum((a * v for a, v in zip(row, x) if a), ZERO) - b for row, b in zip(self.rows, self.rhs)]

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        return all(v >= 0 for v in x) and not any(self.residual(x))

    def internal_objective(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x) if c), ZERO)

    def to_source_objective(self, internal: Fraction) -> Fraction:
        value = internal + self.objective_constant
        return value if self.source.sense is Sense.MAXIMIZE else -value

    def project(self, x: Sequence[Fraction]) -> dict[str, Fraction]:
        """Standard-form point -> values of the source variables."""
        return {v.name: x[v.id] + v.lower for v in self.source.variables}

    def lift(self, point: Mapping[str, Fraction]) -> list[Fraction]:
        """Source point -> standard-form point (slacks filled in)."""
        lp = self.source
        x: list[Fraction] = []
        for origin in self.origins:
            if origin.kind is ColumnKind.VARIABLE:
                var = lp.variables[origin.ref]
                x.append(point[var.name] - var.lower)
            elif origin.kind is ColumnKind.SLACK:
                con = lp.constraints[origin.ref]
                lhs = lp.evaluate(con.expr, point)
                x.append(con.rhs - lhs if con.relation is Relation.LE else lhs - con.rhs)
            else:
                var = lp.variables[origin.ref]
                assert var.upper is not None
                x.append(var.upper - point[var.name])
        return x


def apply_unit_box(lp: LinearProgram, upper: Fraction = ONE) -> LinearProgram:
    """Give every variable without an upper bound the bound ``upper``."""
    bounds = {v.name: (v.lower, upper) for v in lp.variables if v.upper is None}
    return lp.with_bounds(bounds)


def to_standard_form(lp: LinearProgram, box: bool = False, default_upper: Fraction = ONE) -> StandardFormLP:
    if box:
        lp = apply_unit_box(lp, as_rational(default_upper))
    n = len(lp.variables)
    lowers = [v.lower for v in lp.variables]

    names = list(lp.names)
    origins = [ColumnOrigin(ColumnKind.VARIABLE, j) for j in range(n)]
    slack_of: dict[int, int] = {}
    for i, con in enumerate(lp.constraints):
        if con.relation is not Relation.EQ:
            slack_of[i] = len(names)
            names.append(f"s~{con.name}")
            origins.append(ColumnOrigin(ColumnKind.SLACK, i))
    bounded = [v for v in lp.variables if v.upper is not None]
    bound_col: dict[int, int] = {}
    for var in bounded:
        bound_col[var.id] = len(names)
        names.append(f"u~{var.name}")
        origins.append(ColumnOrigin(ColumnKind.BOUND, var.id))
    width = len(names)

    rows: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []
    row_names: list[str] = []
    for i, con in enumerate(lp.constraints):
        row = [ZERO] * width
        shift = ZERO
        for var, coef in con.expr.items():
            row[var] = coef
            shift += coef * lowers[var]
        if i in slack_of:
            row[slack_of[i]] = ONE if con.relation is Relation.LE else -ONE
        rows.append(tuple(row))
        rhs.append(con.rhs - shift)
        row_names.append(con.name)
    for var in bounded:
        row = [ZERO] * width
        row[var.id] = ONE
        row[bound_col[var.id]] = ONE
        rows.append(tuple(row))
        rhs.append(var.upper - var.lower)
        row_names.append(f"ub~{var.name}")

    sign = ONE if lp.sense is Sense.MAXIMIZE else -ONE
    objective = [ZERO] * width
    constant = ZERO
    for var, coef in lp.objective.items():
        objective[var] = sign * coef
        constant += sign * coef * lowers[var]

    return StandardFormLP(
        source=lp,
        rows=tuple(rows),
        rhs=tuple(rhs),
        objective=tuple(objective),
        objective_constant=constant,
        names=tuple(names),
        origins=tuple(origins),
        row_names=tuple(row_names),
    )
