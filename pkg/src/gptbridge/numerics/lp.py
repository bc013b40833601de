"""Exact two-phase simplex with Bland's rule.

The solver is generic over the exact fields ``Fraction`` and ``QuadraticScalar``;
every decision goes through :func:`~gptbridge.numerics.scalars.sign`.  Problems
with ``IntervalScalar`` entries are solved exactly on the interval midpoints with
a small relaxation, see :func:`_relaxed_midpoint_solve`; pivoting in interval
arithmetic widens the enclosures by many orders of magnitude over a few dozen
pivots, and unrelaxed midpoints turn exact ties into spurious infeasibility.

Problem form::

    maximize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                x[j] >= 0   for j not in ``free``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .scalars import IndeterminateError, IntervalScalar, QuadraticScalar, sign


class LpDimensionError(ValueError):
    pass


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _exact(v):
    if isinstance(v, bool):
        raise TypeError("booleans are not LP coefficients")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        raise TypeError("float coefficients are not allowed in the exact solver")
    return v


def _as_vector(row):
    return tuple(_exact(v) for v in row)


def _as_matrix(rows):
    return tuple(_as_vector(r) for r in rows)


@dataclass(frozen=True)
class LinearProgram:
    n_vars: int
    objective: tuple | None = None
    A_eq: tuple = ()
    b_eq: tuple = ()
    A_ub: tuple = ()
    b_ub: tuple = ()
    free: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "A_eq", _as_matrix(self.A_eq))
        object.__setattr__(self, "A_ub", _as_matrix(self.A_ub))
        object.__setattr__(self, "b_eq", _as_vector(self.b_eq))
        object.__setattr__(self, "b_ub", _as_vector(self.b_ub))
        object.__setattr__(self, "free", frozenset(self.free))
        if self.objective is not None:
            object.__setattr__(self, "objective", _as_vector(self.objective))
            if len(self.objective) != self.n_vars:
                raise LpDimensionError(
                    f"objective has {len(self.objective)} entries, expected {self.n_vars}")
        for name, A, b in (("eq", self.A_eq, self.b_eq), ("ub", self.A_ub, self.b_ub)):
            if len(A) != len(b):
                raise LpDimensionError(f"A_{name} has {len(A)} rows but b_{name} has {len(b)}")
            for i, row in enumerate(A):
                if len(row) != self.n_vars:
                    raise LpDimensionError(
                        f"A_{name} row {i} has {len(row)} entries, expected {self.n_vars}")
        if any(not (0 <= j < self.n_vars) for j in self.free):
            raise LpDimensionError("free variable index out of range")

    def is_feasible_point(self, x) -> bool:
        """Exact re-substitution check."""
        if len(x) != self.n_vars:
            return False
        for j, v in enumerate(x):
            if j not in self.free and sign(v) < 0:
                return False
        for row, b in zip(self.A_eq, self.b_eq):
            if sign(sum((a * v for a, v in zip(row, x)), Fraction(0)) - b) != 0:
                return False
        for row, b in zip(self.A_ub, self.b_ub):
            if sign(sum((a * v for a, v in zip(row, x)), Fraction(0)) - b) > 0:
                return False
        return True

    def value(self, x):
        if self.objective is None:
            return Fraction(0)
        return sum((c * v for c, v in zip(self.objective, x)), Fraction(0))


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers proving infeasibility.

    With ``y_ub >= 0`` the combination ``y_eq @ A_eq + y_ub @ A_ub`` is ``>= 0`` on
    sign-constrained variables and ``== 0`` on free ones, while
    ``y_eq @ b_eq + y_ub @ b_ub < 0``.
    """

    y_eq: tuple
    y_ub: tuple

    def verify(self, lp: LinearProgram) -> bool:
        if len(self.y_eq) != len(lp.A_eq) or len(self.y_ub) != len(lp.A_ub):
            return False
        if any(sign(y) < 0 for y in self.y_ub):
            return False
        for j in range(lp.n_vars):
            c = sum((y * row[j] for y, row in zip(self.y_eq, lp.A_eq)), Fraction(0))
            c += sum((y * row[j] for y, row in zip(self.y_ub, lp.A_ub)), Fraction(0))
            s = sign(c)
            if j in lp.free and s != 0:
                return False
            if s < 0:
                return False
        rhs = sum((y * b for y, b in zip(self.y_eq, lp.b_eq)), Fraction(0))
        rhs += sum((y * b for y, b in zip(self.y_ub, lp.b_ub)), Fraction(0))
        return sign(rhs) < 0


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    optimum: object = None
    witness: tuple | None = None
    certificate: FarkasCertificate | None = None
    ray: tuple | None = None

    @property
    def feasible(self) -> bool:
        return self.status != LpStatus.INFEASIBLE


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.T = [list(r) + [b] for r, b in zip(rows, rhs)]
        self.basis = list(basis)
        self.obj = None

    @property
    def ncols(self):
        return len(self.T[0]) - 1 if self.T else 0

    def set_cost(self, cost):
        n = self.ncols
        obj = list(cost) + [Fraction(0)]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if sign(cb) != 0:
                row = self.T[i]
                for j in range(n + 1):
                    if sign(row[j]) != 0:
                        obj[j] = obj[j] - cb * row[j]
        self.cost = list(cost)
        self.obj = obj

    def pivot(self, r, c):
        row = self.T[r]
        p = row[c]
        row = [v / p if sign(v) != 0 else v for v in row]
        self.T[r] = row
        for i, other in enumerate(self.T):
            if i != r:
                f = other[c]
                if sign(f) != 0:
                    self.T[i] = [a - f * b if sign(b) != 0 else a for a, b in zip(other, row)]
        f = self.obj[c]
        if sign(f) != 0:
            self.obj = [a - f * b if sign(b) != 0 else a for a, b in zip(self.obj, row)]
        self.basis[r] = c

    def run(self, allowed: int):
        """Maximize; returns ``None`` at optimum or the entering column if unbounded."""
        while True:
            enter = None
            for j in range(allowed):
                if sign(self.obj[j]) > 0:
                    enter = j
                    break
            if enter is None:
                return None
            leave = None
            best = None
            for i, row in enumerate(self.T):
                if sign(row[enter]) > 0:
                    ratio = row[-1] / row[enter]
                    if best is None:
                        leave, best = i, ratio
                        continue
                    s = sign(ratio - best)
                    if s < 0 or (s == 0 and self.basis[i] < self.basis[leave]):
                        leave, best = i, ratio
            if leave is None:
                return enter
            self.pivot(leave, enter)

    @property
    def value(self):
        return -self.obj[-1]


def lp_solve(lp: LinearProgram) -> LpResult:
    if not _has_intervals(lp):
        return _simplex(lp)
    return _relaxed_midpoint_solve(lp)


def _entries(lp: LinearProgram):
    yield from lp.objective or ()
    for rows, rhs in ((lp.A_eq, lp.b_eq), (lp.A_ub, lp.b_ub)):
        for row in rows:
            yield from row
        yield from rhs


def _has_intervals(lp: LinearProgram) -> bool:
    return any(isinstance(v, IntervalScalar) for v in _entries(lp))


def _midpoint(v, prec: int):
    if isinstance(v, IntervalScalar):
        return v.mid
    if isinstance(v, QuadraticScalar) and not v.is_rational:
        return v.to_interval(prec).mid
    return v


def _relaxed_midpoint_solve(lp: LinearProgram) -> LpResult:
    """Exact simplex on the midpoints with every constraint loosened by ``eps``.

    ``eps = 2^-(p/2 + 8)`` sits below the zero tolerance of interval signs, so a
    witness of the loosened problem re-verifies on the interval data, while an
    infeasibility certificate carries a margin of ``eps`` and is exact for the
    midpoint data.  Systems infeasible by less than ``eps`` count as feasible.
    """
    prec = min(v.precision for v in _entries(lp) if isinstance(v, IntervalScalar))
    eps = Fraction(1, 1 << (prec - prec // 2 + 8))

    def vec(r):
        return tuple(_midpoint(v, prec) for v in r)

    def loose(row, b) -> bool:
        return any(isinstance(v, IntervalScalar) for v in (*row, b))

    A_eq = [vec(r) for r in lp.A_eq]
    b_eq = vec(lp.b_eq)
    A_ub = [vec(r) for r in lp.A_ub]
    b_ub = vec(lp.b_ub)
    # rows with exact data stay exact; the others become bands of width eps
    tight = [i for i, (r, b) in enumerate(zip(lp.A_eq, lp.b_eq)) if not loose(r, b)]
    banded = [i for i in range(len(A_eq)) if i not in tight]
    slack = [eps if loose(r, b) else 0 for r, b in zip(lp.A_ub, lp.b_ub)]
    rows = A_ub + [A_eq[i] for i in banded] + [tuple(-a for a in A_eq[i]) for i in banded]
    rhs = [b + e for b, e in zip(b_ub, slack)] + [b_eq[i] + eps for i in banded] + \
        [-b_eq[i] + eps for i in banded]
    objective = None if lp.objective is None else vec(lp.objective)
    relaxed = LinearProgram(lp.n_vars, objective, [A_eq[i] for i in tight], [b_eq[i] for i in tight],
                            rows, rhs, lp.free)
    res = _simplex(relaxed)
    if res.status == LpStatus.INFEASIBLE:
        y, z = res.certificate.y_ub, res.certificate.y_eq
        m_ub, k = len(A_ub), len(banded)
        y_eq = [Fraction(0)] * len(A_eq)
        for t, i in enumerate(tight):
            y_eq[i] = z[t]
        for t, i in enumerate(banded):
            y_eq[i] = y[m_ub + t] - y[m_ub + k + t]
        cert = FarkasCertificate(tuple(y_eq), tuple(y[:m_ub]))
        midpoint = LinearProgram(lp.n_vars, None, A_eq, b_eq, A_ub, b_ub, lp.free)
        if not cert.verify(midpoint):
            raise RuntimeError("internal error: midpoint Farkas certificate failed verification")
        return LpResult(LpStatus.INFEASIBLE, certificate=cert)
    if res.status == LpStatus.UNBOUNDED:
        d = res.ray
        if not (all(sign(_dot(r, d)) == 0 for r in lp.A_eq)
                and all(sign(_dot(r, d)) <= 0 for r in lp.A_ub)
                and sign(_dot(lp.objective, d)) > 0):
            raise IndeterminateError("unbounded ray is not certified at this precision")
        return res
    if not lp.is_feasible_point(res.witness):
        raise IndeterminateError("feasible point is not certified at this precision")
    return LpResult(LpStatus.OPTIMAL, optimum=lp.value(res.witness), witness=res.witness)


def _dot(row, x):
    return sum((a * v for a, v in zip(row, x)), Fraction(0))


def _simplex(lp: LinearProgram) -> LpResult:
    """Solve ``lp`` exactly; deterministic for identical input."""
    zero = Fraction(0)
    one = Fraction(1)
    colmap = [(j, 1) for j in range(lp.n_vars)]
    colmap += [(j, -1) for j in sorted(lp.free)]
    n_struct = len(colmap)
    m_eq, m_ub = len(lp.A_eq), len(lp.A_ub)
    m = m_eq + m_ub
    n_total = n_struct + m_ub

    rows, rhs, row_sign = [], [], []
    for i in range(m):
        if i < m_eq:
            src, b = lp.A_eq[i], lp.b_eq[i]
            slack = [zero] * m_ub
        else:
            src, b = lp.A_ub[i - m_eq], lp.b_ub[i - m_eq]
            slack = [zero] * m_ub
            slack[i - m_eq] = one
        row = [src[j] * s for j, s in colmap] + slack
        s = -1 if sign(b) < 0 else 1
        if s < 0:
            row = [-v for v in row]
            b = -b
        rows.append(row + [one if k == i else zero for k in range(m)])
        rhs.append(b)
        row_sign.append(s)

    tab = _Tableau(rows, rhs, [n_total + i for i in range(m)])
    if m:
        tab.set_cost([zero] * n_total + [-one] * m)
        tab.run(n_total + m)
        if sign(tab.value) < 0:
            y_std = [-one - tab.obj[n_total + i] for i in range(m)]
            y = [row_sign[i] * y_std[i] for i in range(m)]
            cert = FarkasCertificate(tuple(y[:m_eq]), tuple(y[m_eq:]))
            if not cert.verify(lp):
                raise RuntimeError("internal error: Farkas certificate failed verification")
            return LpResult(LpStatus.INFEASIBLE, certificate=cert)
        # drive remaining artificials out of the basis; drop redundant rows
        i = 0
        while i < len(tab.T):
            if tab.basis[i] >= n_total:
                col = next((j for j in range(n_total) if sign(tab.T[i][j]) != 0), None)
                if col is None:
                    del tab.T[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, col)
            i += 1
        tab.T = [row[:n_total] + [row[-1]] for row in tab.T]

    cost = [zero] * n_total
    if lp.objective is not None:
        for k, (j, s) in enumerate(colmap):
            cost[k] = lp.objective[j] * s
    if tab.T:
        tab.set_cost(cost)
    else:
        tab.obj = cost + [zero]
    enter = tab.run(n_total)

    def to_original(xs):
        x = [zero] * lp.n_vars
        for k, (j, s) in enumerate(colmap):
            if sign(xs[k]) != 0:
                x[j] = x[j] + xs[k] * s
        return tuple(x)

    if enter is not None:
        d = [zero] * n_total
        d[enter] = one
        for i, b in enumerate(tab.basis):
            d[b] = -tab.T[i][enter]
        return LpResult(LpStatus.UNBOUNDED, ray=to_original(d))

    xs = [zero] * n_total
    for i, b in enumerate(tab.basis):
        xs[b] = tab.T[i][-1]
    x = to_original(xs)
    if not lp.is_feasible_point(x):
        raise RuntimeError("internal error: simplex witness failed re-substitution")
    return LpResult(LpStatus.OPTIMAL, optimum=lp.value(x), witness=x)


def lp_feasible(lp: LinearProgram):
    """``(True, witness)`` if the constraints are satisfiable, else ``(False, certificate)``."""
    probe = LinearProgram(lp.n_vars, None, lp.A_eq, lp.b_eq, lp.A_ub, lp.b_ub, lp.free)
    res = lp_solve(probe)
    if res.status == LpStatus.INFEASIBLE:
        return False, res.certificate
    return True, res.witness


class LpBuilder:
    """Incremental construction of a :class:`LinearProgram` with named variable blocks."""

    def __init__(self):
        self.n = 0
        self.free = set()
        self.eq_rows, self.eq_rhs = [], []
        self.ub_rows, self.ub_rhs = [], []

    def add_vars(self, count: int, free: bool = False) -> list[int]:
        idx = list(range(self.n, self.n + count))
        self.n += count
        if free:
            self.free.update(idx)
        return idx

    def add_eq(self, coeffs: dict, rhs):
        self.eq_rows.append(dict(coeffs))
        self.eq_rhs.append(rhs)

    def add_le(self, coeffs: dict, rhs):
        self.ub_rows.append(dict(coeffs))
        self.ub_rhs.append(rhs)

    def add_ge(self, coeffs: dict, rhs):
        self.add_le({k: -v for k, v in coeffs.items()}, -rhs)

    def _dense(self, rows):
        out = []
        for r in rows:
            row = [Fraction(0)] * self.n
            for k, v in r.items():
                row[k] = row[k] + v
            out.append(row)
        return out

    def build(self, objective: dict | None = None) -> LinearProgram:
        obj = None
        if objective is not None:
            obj = [Fraction(0)] * self.n
            for k, v in objective.items():
                obj[k] = v
        return LinearProgram(self.n, obj, self._dense(self.eq_rows), self.eq_rhs,
                             self._dense(self.ub_rows), self.ub_rhs, frozenset(self.free))
