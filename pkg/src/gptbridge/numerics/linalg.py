"""Gaussian elimination over any exact (or certified) ordered field."""

from __future__ import annotations

from fractions import Fraction

from .scalars import sign


def _copy(rows):
    return [list(r) for r in rows]


def row_echelon(rows):
    """Reduced row echelon form. Returns ``(matrix, pivot_columns)``."""
    m = _copy(rows)
    if not m:
        return m, []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(m)):
            if sign(m[i][c]) != 0:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c] if not isinstance(m[r][c], int) else Fraction(1, m[r][c])
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and sign(m[i][c]) != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows) -> int:
    if not rows:
        return 0
    return len(row_echelon(rows)[1])


def nullspace(rows, ncols: int | None = None):
    """Basis of ``{x : rows @ x = 0}`` as a list of vectors."""
    if not rows:
        n = ncols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    n = len(rows[0])
    m, pivots = row_echelon(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -m[r][f]
        basis.append(v)
    return basis


def solve(matrix, rhs):
    """One solution of ``matrix @ x = rhs`` or ``None`` if the system is inconsistent."""
    n = len(matrix[0]) if matrix else 0
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    m, pivots = row_echelon(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for r, p in enumerate(pivots):
        x[p] = m[r][n]
    return x
