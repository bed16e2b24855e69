"""Embedded instances: LP1, the first eight rows of LP2, and the node-g fragment.

LP2 is only known through its first eight constraints, so the fixture
carries exactly those rows over ``x1..x36`` with a zero objective.
"""

from __future__ import annotations

from fractions import Fraction

from .lp_model import LinearProgram, parse_lp

LP1_CONSTANTS = {
    "alpha": Fraction(262145, 524288),
    "beta": Fraction(262143, 524288),
    "gamma": Fraction(1, 262144),
}

LP2_CONSTANTS = {
    "alpha": Fraction(15690529805, 31381059609),
    "beta": Fraction(15690529804, 31381059609),
    "gamma": Fraction(1, 31381059609),
}


def _check_constants(consts: dict[str, Fraction]) -> None:
    a, b, g = consts["alpha"], consts["beta"], consts["gamma"]
    if a + b != 1 or a - b != g:
        raise AssertionError(f"fixture constants violate alpha+beta=1, alpha-beta=gamma: {consts}")


_check_constants(LP1_CONSTANTS)
_check_constants(LP2_CONSTANTS)

LP1_TEXT = """\
# alpha = 262145/524288, beta = 262143/524288, gamma = 1/262144
var x1
var x2
var x3
var x4
var x5
var x6
var x7
var x8
var x9
var x10
var x11
var x12
max -1024 x3 - 1024 x7 + 65536 x9 - 1024 x10 + 256 x11 + 69888 x12
c1: 262145/524288 x1 + x2 - 262143/524288 x3 - 262143/524288 x5 - 262143/524288 x7 - 262143/524288 x10 = 1
c2: -x2 + x3 + x4 = 1
c3: -262143/524288 x1 - 262143/524288 x3 + 262145/524288 x5 + x6 - 262143/524288 x7 - 262143/524288 x10 = 1
c4: -x6 + x7 + x8 = 1
c5: x9 + x10 - x11 = 1
c6: -1/262144 x1 - 1/262144 x3 - 1/262144 x5 - 1/262144 x7 - 1/262144 x10 + x11 + x12 = 1
"""

_A2, _B2 = "15690529805/31381059609", "15690529804/31381059609"

LP2_PREFIX8_TEXT = (
    "# first eight constraints only; x18, x23..x28, x31, x32, x35, x36 do not occur in them\n"
    + "".join(f"var x{i}\n" for i in range(1, 37))
    + "max 0\n"
    + f"c1: {_A2} x1 + x2 - {_B2} x5 - {_B2} x13 = 1\n"
    + "c2: -x2 + x3 + x4 = 1\n"
    + "c3: -x3 + x5 + x6 - x11 - x15 - x19 - x21 - x29 - x33 = 1\n"
    + "c4: -x4 + x7 + x8 - x12 - x16 - x20 - x22 - x30 - x34 = 1\n"
    + f"c5: -{_B2} x6 + {_A2} x9 + x10 - {_B2} x17 = 1\n"
    + "c6: -x10 + x11 + x12 = 1\n"
    + f"c7: -{_B2} x1 - {_B2} x5 + {_A2} x13 + x14 = 1\n"
    + "c8: -x14 + x15 + x16 = 1\n"
)

NODE_G_TEXT = """\
# A four-vertex fragment whose flow equation at g is fully known.  e1, e2 and
# b are taken to be decision vertices; rewards are unknown and set to 0.
decision e1 e2 b g
sink F
edge e1 g reward 0
edge e2 g reward 0
edge b g reward 0
edge g F reward 0
"""

FIXTURE_NAMES = ("lp1", "lp2-prefix8", "node-g", "klee-minty")


def canonical_fixture_name(name: str) -> str:
    return name.strip().lower().replace("_", "-")


def builtin_fixture(name: str):
    """``lp1`` and ``lp2-prefix8`` give a LinearProgram, ``node-g`` an MdpGraph.

    Underscores are accepted in place of hyphens.
    """
    key = canonical_fixture_name(name)
    if key == "lp1":
        return parse_lp(LP1_TEXT)
    if key == "lp2-prefix8":
        return parse_lp(LP2_PREFIX8_TEXT)
    if key == "node-g":
        from .mdp_bridge import node_g_fixture

        return node_g_fixture()
    raise KeyError(f"unknown fixture {name!r}; known: lp1, lp2-prefix8, node-g")


def fixture_text(name: str) -> str:
    key = canonical_fixture_name(name)
    texts = {"lp1": LP1_TEXT, "lp2-prefix8": LP2_PREFIX8_TEXT, "node-g": NODE_G_TEXT}
    if key not in texts:
        raise KeyError(f"unknown fixture {name!r}")
    return texts[key]


def lp1() -> LinearProgram:
    return builtin_fixture("lp1")


def lp2_prefix8() -> LinearProgram:
    return builtin_fixture("lp2-prefix8")
