"""Klee-Minty cubes.

``max sum_j 10^(n-j) x_j`` subject to
``2 * sum_{j<i} 10^(i-j) x_j + x_i <= 100^(i-1)`` for ``i = 1..n`` and
``x >= 0``.  From the all-slack basis Dantzig's rule visits all ``2^n``
vertices, i.e. makes ``2^n - 1`` pivots, before reaching ``x_n = 100^(n-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lp_model import LinearProgram, Sense, make_program


@dataclass(frozen=True)
class KleeMintyParams:
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"Klee-Minty dimension must be >= 1, got {self.n}")


def klee_minty(params: KleeMintyParams | int) -> LinearProgram:
    n = params.n if isinstance(params, KleeMintyParams) else KleeMintyParams(params).n
    names = [f"x{j}" for j in range(1, n + 1)]
    objective = {f"x{j}": 10 ** (n - j) for j in range(1, n + 1)}
    constraints = []
    for i in range(1, n + 1):
        terms = {f"x{j}": 2 * 10 ** (i - j) for j in range(1, i)}
        terms[f"x{i}"] = 1
        constraints.append((f"c{i}", terms, "<=", 100 ** (i - 1)))
    return make_program(Sense.MAXIMIZE, names, objective, constraints)


def klee_minty_optimum(n: int) -> int:
    return 100 ** (n - 1)
