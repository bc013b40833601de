"""Independent brute-force oracles used to validate the exact engines.

Nothing here imports the solvers under test; the code is deliberately naive.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import lcm

import numpy as np


# -- cliques -----------------------------------------------------------------------------

def clique_oracle(adj: list[int], weights: list[Fraction]) -> Fraction:
    """Maximum clique weight by sweeping all 2^n vertex subsets.

    Subset ``S`` with top bit ``b`` is a clique iff ``S - {b}`` is one and ``b`` is
    adjacent to every member of ``S - {b}``.  Weights are scaled to integers.
    """
    n = len(adj)
    if n == 0:
        return Fraction(0)
    den = lcm(*(Fraction(w).denominator for w in weights))
    iw = [int(Fraction(w) * den) for w in weights]
    size = 1 << n
    ok = np.zeros(size, dtype=bool)
    val = np.zeros(size, dtype=np.int64)
    ok[0] = True
    for b in range(n):
        lo = 1 << b
        lower = np.arange(lo, dtype=np.int64)
        missing = (lo - 1) & ~adj[b]
        ok[lo:2 * lo] = ok[:lo] & ((lower & missing) == 0)
        val[lo:2 * lo] = val[:lo] + iw[b]
    return Fraction(int(val[ok].max()), den)


def is_clique(adj: list[int], members) -> bool:
    return all(adj[a] >> b & 1 for a, b in combinations(members, 2))


def random_graph(rng: np.random.Generator, n: int, density: float) -> list[int]:
    adj = [0] * n
    for a, b in combinations(range(n), 2):
        if rng.random() < density:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
    return adj


# -- linear programs ---------------------------------------------------------------------

def _solve_square(M: list[list[Fraction]], rhs: list[Fraction]):
    """Unique solution of a square system, or ``None`` when singular."""
    n = len(M)
    aug = [list(row) + [r] for row, r in zip(M, rhs)]
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if p is None:
            return None
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [v / piv for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [aug[i][n] for i in range(n)]


def _vertex_max(c, rows, rhs):
    n = len(c)
    best = None
    for S in combinations(range(len(rows)), n):
        x = _solve_square([rows[i] for i in S], [rhs[i] for i in S])
        if x is None:
            continue
        if all(sum(a * v for a, v in zip(row, x)) <= r for row, r in zip(rows, rhs)):
            val = sum(a * v for a, v in zip(c, x))
            if best is None or val > best:
                best = val
    return best


def lp_vertex_oracle(c, A, b) -> tuple[str, Fraction | None]:
    """``max c@x  s.t.  A@x <= b, x >= 0`` by enumerating every basic solution.

    The feasible set is pointed, so it is empty iff it has no vertex.  It is
    unbounded along ``c`` iff the normalized recession cone has a vertex with
    positive objective.
    """
    n = len(c)
    c = [Fraction(v) for v in c]
    rows = [[Fraction(v) for v in row] for row in A]
    rhs = [Fraction(v) for v in b]
    for j in range(n):
        rows.append([Fraction(-int(i == j)) for i in range(n)])
        rhs.append(Fraction(0))
    best = _vertex_max(c, rows, rhs)
    if best is None:
        return "Infeasible", None
    rec_rows = [list(r) for r in rows] + [[Fraction(1)] * n]
    rec_rhs = [Fraction(0)] * len(rows) + [Fraction(1)]
    if _vertex_max(c, rec_rows, rec_rhs) > 0:
        return "Unbounded", None
    return "Optimal", best


# -- behaviors ---------------------------------------------------------------------------

def random_distribution(rng: np.random.Generator, k: int, den: int = 12) -> list[Fraction]:
    """Random rational point of the probability simplex with denominator ``den``."""
    cuts = sorted(int(v) for v in rng.integers(0, den + 1, size=k - 1))
    edges = [0, *cuts, den]
    return [Fraction(edges[i + 1] - edges[i], den) for i in range(k)]


def deterministic_table(inputs, outputs, strategy) -> list[Fraction]:
    table = []
    for x in product(*(range(n) for n in inputs)):
        for y in product(*(range(m) for m in outputs)):
            table.append(Fraction(int(all(strategy[i][x[i]] == y[i] for i in range(len(x))))))
    return table


def pr_table(d: int = 2) -> list[Fraction]:
    """Generalized PR box on two binary inputs and ``d`` outputs: ``b - a = x*y mod d``."""
    table = []
    for x in product(range(2), range(2)):
        for y in product(range(d), range(d)):
            table.append(Fraction(int((y[1] - y[0]) % d == (x[0] * x[1]) % d), d))
    return table


def mix(tables: list[list[Fraction]], weights: list[Fraction]) -> list[Fraction]:
    return [sum((w * t[i] for w, t in zip(weights, tables)), Fraction(0))
            for i in range(len(tables[0]))]


def marginals_agree(table, inputs, outputs) -> bool:
    """Brute-force no-signalling test for two parties."""
    (na, nb), (ma, mb) = inputs, outputs

    def p(a, b, x, y):
        return table[(x * nb + y) * ma * mb + a * mb + b]

    for x in range(na):
        for a in range(ma):
            vals = {sum(p(a, b, x, y) for b in range(mb)) for y in range(nb)}
            if len(vals) > 1:
                return False
    for y in range(nb):
        for b in range(mb):
            vals = {sum(p(a, b, x, y) for a in range(ma)) for x in range(na)}
            if len(vals) > 1:
                return False
    return True
