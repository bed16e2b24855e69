"""Exact-rational simplex laboratory: pivot rules, infeasibility certificates, MDP-to-LP audits."""

from .certificates import (
    AggregatedRow,
    Box,
    BoxInfeasibilityCertificate,
    Verdict,
    aggregate,
    box_infimum,
    box_supremum,
    check_certificate,
    search_certificate,
)
from .exact_arith import Ordering, Rational, arith, compare, format_rational, parse_rational
from .fixtures import LP1_CONSTANTS, LP2_CONSTANTS, builtin_fixture
from .generators import KleeMintyParams, klee_minty
from .lp_model import (
    Constraint,
    LinearExpression,
    LinearProgram,
    Relation,
    Sense,
    StandardFormLP,
    Variable,
    make_program,
    parse_lp,
    serialize_lp,
    to_standard_form,
)
from .mdp_bridge import (
    ConstraintDiff,
    MdpGraph,
    diff_constraints,
    generate_flow_conservation,
    generate_P,
    node_g_fixture,
)
from .pivot_rules import OccurrenceRecord, PivotRule, RuleContext, TieBreak, note_entering, select_entering
from .simplex import (
    PivotEvent,
    SimplexState,
    SolveResult,
    Status,
    phase1,
    phase2,
    ratio_test,
    solve,
    verify_farkas,
)

__version__ = "0.1.0"
