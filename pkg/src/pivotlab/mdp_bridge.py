"""MDP graphs and their translation into linear programs.

Two translations are provided, each with one variable ``x(u,v)`` per decision
edge and one constraint per decision vertex (labelled by the vertex):

* :func:`generate_P` reproduces schema (P) term for term:
  ``sum_{(u,v)} x(u,v) - sum_{(v,w) in E0, (w,u) in ER} p(w,u) x(v,w) = 1``.
  It has no decision-to-decision inflow and a right-hand side of 1, and is
  kept that way on purpose so its gaps show up in :func:`diff_constraints`.
* :func:`generate_flow_conservation` is outflow minus every inflow (decision
  and randomization) equal to 0 or 1.

Text format::

    decision <name>...
    random <name>...
    sink <name>...
    edge <from> <to> reward <rational>
    redge <from> <to> prob <rational>
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exact_arith import ONE, ZERO, RationalSyntaxError, format_rational, parse_rational
from .lp_model import (
    Constraint,
    LinearExpression,
    LinearProgram,
    LpSyntaxError,
    Relation,
    Sense,
    Variable,
    _NAME,
)


class InvalidMdpError(ValueError):
    pass


@dataclass(frozen=True)
class DecisionEdge:
    source: str
    target: str
    reward: Fraction = ZERO


@dataclass(frozen=True)
class RandomEdge:
    source: str
    target: str
    prob: Fraction


@dataclass(frozen=True)
class MdpGraph:
    decision: tuple[str, ...]
    random: tuple[str, ...] = ()
    sinks: tuple[str, ...] = ()
    edges: tuple[DecisionEdge, ...] = ()
    redges: tuple[RandomEdge, ...] = ()

    def __post_init__(self) -> None:
        for name in ("decision", "random", "sinks", "edges", "redges"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        groups = {"decision": self.decision, "random": self.random, "sink": self.sinks}
        seen: dict[str, str] = {}
        for kind, names in groups.items():
            for name in names:
                if name in seen:
                    raise InvalidMdpError(f"vertex {name!r} declared as both {seen[name]} and {kind}")
                seen[name] = kind
        pairs = set()
        for e in self.edges:
            if seen.get(e.source) != "decision":
                raise InvalidMdpError(f"decision edge {e.source}->{e.target} must start at a decision vertex")
            if e.target not in seen:
                raise InvalidMdpError(f"decision edge {e.source}->{e.target} ends at an undeclared vertex")
            if (e.source, e.target) in pairs:
                raise InvalidMdpError(f"duplicate decision edge {e.source}->{e.target}")
            pairs.add((e.source, e.target))
        totals = {w: ZERO for w in self.random}
        rpairs = set()
        for e in self.redges:
            if seen.get(e.source) != "random":
                raise InvalidMdpError(f"randomization edge {e.source}->{e.target} must start at a randomization vertex")
            kind = seen.get(e.target)
            if kind is None:
                raise InvalidMdpError(f"randomization edge {e.source}->{e.target} ends at an undeclared vertex")
            if kind == "random":
                raise InvalidMdpError(f"randomization-to-randomization edge {e.source}->{e.target} is not supported")
            if not ZERO <= e.prob <= ONE:
                raise InvalidMdpError(f"probability {format_rational(e.prob)} on {e.source}->{e.target} outside [0, 1]")
            if (e.source, e.target) in rpairs:
                raise InvalidMdpError(f"duplicate randomization edge {e.source}->{e.target}")
            rpairs.add((e.source, e.target))
            totals[e.source] += e.prob
        for w, total in totals.items():
            if total != 1:
                raise InvalidMdpError(f"probabilities out of {w} sum to {format_rational(total)}, not 1")


def edge_variable(source: str, target: str) -> str:
    return f"x({source},{target})"


def node_g_fixture() -> MdpGraph:
    """The node-g fragment: ``e1``, ``e2`` and ``b`` each feed ``g``, which exits to ``F``.

    Treating ``e1``, ``e2`` and ``b`` as decision vertices is an assumption.  Rewards are not
    known and are 0.
    """
    z = ZERO
    return MdpGraph(
        decision=("e1", "e2", "b", "g"),
        sinks=("F",),
        edges=(
            DecisionEdge("e1", "g", z),
            DecisionEdge("e2", "g", z),
            DecisionEdge("b", "g", z),
            DecisionEdge("g", "F", z),
        ),
    )


def _shell(mdp: MdpGraph) -> tuple[list[Variable], dict[tuple[str, str], int], LinearExpression]:
    variables = [Variable(i, edge_variable(e.source, e.target)) for i, e in enumerate(mdp.edges)]
    ids = {(e.source, e.target): i for i, e in enumerate(mdp.edges)}
    objective = LinearExpression((i, e.reward) for i, e in enumerate(mdp.edges))
    return variables, ids, objective


def _randomization_inflow(mdp: MdpGraph, u: str, ids) -> list[tuple[int, Fraction]]:
    """Terms ``p(w,u) * x(v,w)`` for decision edges ``(v,w)`` into a randomization vertex ``w`` with ``(w,u)`` in ER."""
    into_u = {e.source: e.prob for e in mdp.redges if e.target == u}
    return [(ids[(e.source, e.target)], into_u[e.target]) for e in mdp.edges if e.target in into_u]


def _outflow(mdp: MdpGraph, u: str, ids) -> list[tuple[int, Fraction]]:
    return [(ids[(e.source, e.target)], ONE) for e in mdp.edges if e.source == u]


def generate_P(mdp: MdpGraph) -> LinearProgram:
    mdp.validate()
    variables, ids, objective = _shell(mdp)
    cons = []
    for u in mdp.decision:
        terms = _outflow(mdp, u, ids) + [(j, -p) for j, p in _randomization_inflow(mdp, u, ids)]
        cons.append(Constraint(u, LinearExpression(terms), Relation.EQ, ONE))
    return LinearProgram(Sense.MAXIMIZE, objective, tuple(variables), tuple(cons))


def generate_flow_conservation(mdp: MdpGraph, rhs_mode: str | int = "zero") -> LinearProgram:
    rhs = {"zero": ZERO, "0": ZERO, 0: ZERO, "unit": ONE, "1": ONE, 1: ONE}.get(rhs_mode)
    if rhs is None:
        raise ValueError(f"rhs_mode must be zero or unit, got {rhs_mode!r}")
    mdp.validate()
    variables, ids, objective = _shell(mdp)
    cons = []
    for u in mdp.decision:
        terms = _outflow(mdp, u, ids)
        terms += [(ids[(e.source, u)], -ONE) for e in mdp.edges if e.target == u]
        terms += [(j, -p) for j, p in _randomization_inflow(mdp, u, ids)]
        cons.append(Constraint(u, LinearExpression(terms), Relation.EQ, rhs))
    return LinearProgram(Sense.MAXIMIZE, objective, tuple(variables), tuple(cons))


# -- structural diff ---------------------------------------------------------


@dataclass(frozen=True)
class VertexDiff:
    """Differences at one constraint label.

    ``missing`` holds terms the reference system ``b`` has and ``a`` lacks;
    ``extra`` the terms only ``a`` has; ``mismatched`` maps a shared variable
    to its (a, b) coefficients.
    """

    name: str
    missing: dict[str, Fraction] = field(default_factory=dict)
    extra: dict[str, Fraction] = field(default_factory=dict)
    mismatched: dict[str, tuple[Fraction, Fraction]] = field(default_factory=dict)
    rhs: tuple[Fraction, Fraction] = (ZERO, ZERO)
    relation: tuple[Relation, Relation] = (Relation.EQ, Relation.EQ)

    @property
    def rhs_differs(self) -> bool:
        return self.rhs[0] != self.rhs[1]

    @property
    def is_empty(self) -> bool:
        return not (self.missing or self.extra or self.mismatched or self.rhs_differs or self.relation[0] != self.relation[1])


@dataclass(frozen=True)
class ConstraintDiff:
    vertices: tuple[VertexDiff, ...]
    only_in_a: tuple[str, ...] = ()
    only_in_b: tuple[str, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.vertices and not self.only_in_a and not self.only_in_b

    def __getitem__(self, name: str) -> VertexDiff:
        for v in self.vertices:
            if v.name == name:
                return v
        raise KeyError(name)

    def lines(self) -> list[str]:
        def term(name: str, coef: Fraction) -> str:
            return f"{'+' if coef > 0 else '-'}{'' if abs(coef) == 1 else format_rational(abs(coef)) + ' '}{name}"

        out = []
        for v in self.vertices:
            if v.missing:
                out.append(f"{v.name}: missing " + " ".join(term(k, c) for k, c in v.missing.items()))
            if v.extra:
                out.append(f"{v.name}: extra " + " ".join(term(k, c) for k, c in v.extra.items()))
            for k, (ca, cb) in v.mismatched.items():
                out.append(f"{v.name}: coefficient of {k} {format_rational(ca)} vs {format_rational(cb)}")
            if v.relation[0] != v.relation[1]:
                out.append(f"{v.name}: relation {v.relation[0].value} vs {v.relation[1].value}")
            if v.rhs_differs:
                out.append(f"{v.name}: rhs {format_rational(v.rhs[0])} vs {format_rational(v.rhs[1])}")
        out.extend(f"{k}: only in a" for k in self.only_in_a)
        out.extend(f"{k}: only in b" for k in self.only_in_b)
        return out


def diff_constraints(a: LinearProgram, b: LinearProgram) -> ConstraintDiff:
    """Compare ``a`` against the reference ``b`` constraint by constraint (matched by label)."""
    b_by_name = {c.name: c for c in b.constraints}
    a_names = {c.name for c in a.constraints}
    out = []
    for ca in a.constraints:
        cb = b_by_name.get(ca.name)
        if cb is None:
            continue
        ta, tb = a.named_terms(ca.expr), b.named_terms(cb.expr)
        vd = VertexDiff(
            ca.name,
            missing={k: v for k, v in tb.items() if k not in ta},
            extra={k: v for k, v in ta.items() if k not in tb},
            mismatched={k: (ta[k], tb[k]) for k in ta if k in tb and ta[k] != tb[k]},
            rhs=(ca.rhs, cb.rhs),
            relation=(ca.relation, cb.relation),
        )
        if not vd.is_empty:
            out.append(vd)
    return ConstraintDiff(
        tuple(out),
        only_in_a=tuple(c.name for c in a.constraints if c.name not in b_by_name),
        only_in_b=tuple(c.name for c in b.constraints if c.name not in a_names),
    )


# -- text format --------------------------------------------------------------


def _err(msg: str, line: int) -> LpSyntaxError:
    return LpSyntaxError(msg, line)


def parse_mdp(text: str) -> MdpGraph:
    decision: list[str] = []
    random: list[str] = []
    sinks: list[str] = []
    edges: list[DecisionEdge] = []
    redges: list[RandomEdge] = []
    lists = {"decision": decision, "random": random, "sink": sinks}
    for no, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        head, rest = tokens[0], tokens[1:]
        if head in lists:
            if not rest:
                raise _err(f"'{head}' needs at least one vertex name", no)
            for name in rest:
                if not _NAME.fullmatch(name):
                    raise _err(f"invalid vertex name {name!r}", no)
            lists[head].extend(rest)
        elif head in ("edge", "redge"):
            keyword = "reward" if head == "edge" else "prob"
            if len(rest) != 4 or rest[2] != keyword:
                raise _err(f"expected '{head} <from> <to> {keyword} <rational>'", no)
            try:
                value = parse_rational(rest[3])
            except (RationalSyntaxError, ZeroDivisionError) as exc:
                raise _err(str(exc), no) from None
            if head == "edge":
                edges.append(DecisionEdge(rest[0], rest[1], value))
            else:
                redges.append(RandomEdge(rest[0], rest[1], value))
        else:
            raise _err(f"unknown directive {head!r}", no)
    return MdpGraph(tuple(decision), tuple(random), tuple(sinks), tuple(edges), tuple(redges))


def serialize_mdp(mdp: MdpGraph) -> str:
    lines = []
    for head, names in (("decision", mdp.decision), ("random", mdp.random), ("sink", mdp.sinks)):
        if names:
            lines.append(f"{head} {' '.join(names)}")
    lines += [f"edge {e.source} {e.target} reward {format_rational(e.reward)}" for e in mdp.edges]
    lines += [f"redge {e.source} {e.target} prob {format_rational(e.prob)}" for e in mdp.redges]
    return "\n".join(lines) + "\n"


def random_mdp(rng, *, max_decision: int = 5, max_random: int = 3, p_edge: float = 0.4) -> MdpGraph:
    """A random valid graph for property checks; ``rng`` is a ``random.Random``."""
    nd = rng.randint(1, max_decision)
    nr = rng.randint(0, max_random)
    decision = [f"d{i}" for i in range(nd)]
    random_v = [f"w{i}" for i in range(nr)]
    sinks = ["F"]
    edges: list[DecisionEdge] = []
    for u in decision:
        targets = [t for t in decision + random_v + sinks if rng.random() < p_edge]
        for t in targets:
            edges.append(DecisionEdge(u, t, Fraction(rng.randint(-5, 5), rng.randint(1, 4))))
    redges: list[RandomEdge] = []
    for w in random_v:
        targets = rng.sample(decision + sinks, rng.randint(1, len(decision) + 1))
        weights = [rng.randint(1, 5) for _ in targets]
        total = sum(weights)
        redges.extend(RandomEdge(w, t, Fraction(k, total)) for t, k in zip(targets, weights))
    return MdpGraph(tuple(decision), tuple(random_v), tuple(sinks), tuple(edges), tuple(redges))

