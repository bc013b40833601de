"""Constructors for the concrete models: classical simplices, the square bit,
regular polygons, the PR box, CHSH and the pentagon contextuality scenario.

Polygon vertices are indexed from 0 and square-bit vertices from 1, so that the
cyclic ``y ⊕ k`` arithmetic matches the usual presentation of each model.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np

from .contextual import Hypergraph, ProbabilityWeight
from .gpt import GptSystem, pair
from .nonlocality import Behavior, NonlocalGame, deterministic_behavior, payoff
from .numerics.scalars import (
    DEFAULT_PRECISION,
    IntervalScalar,
    QuadraticScalar,
    interval_trig_pi,
    sign,
)
from .verdict import Verdict

F = Fraction

# exact cos(pi/n) for the polygons whose coordinates live in a quadratic field
_EXACT_COS = {
    3: (F(1, 2), 1),
    4: (QuadraticScalar(0, F(1, 2), 2), 2),
    5: (QuadraticScalar(F(1, 4), F(1, 4), 5), 5),
    6: (QuadraticScalar(0, F(1, 2), 3), 3),
}
EXACT_BY_DEFAULT = frozenset({3, 4, 6})


def classical_system(n: int) -> GptSystem:
    """The n-outcome simplex: basis vectors as pure states, basis covectors plus the unit as effects."""
    if n < 2:
        raise ValueError("a classical system needs n >= 2")
    basis = [tuple(F(int(i == j)) for j in range(n)) for i in range(n)]
    unit = (F(1),) * n
    return GptSystem(
        f"classical({n})", n, basis, basis + [unit], unit, 1, None,
        tuple(f"e{i + 1}" for i in range(n)),
        tuple(f"d{i + 1}" for i in range(n)) + ("u",),
    )


def square_bit() -> GptSystem:
    """Square state space with r**2 = sqrt(2) folded into the state coordinates.

    States ``(sqrt2 cos(pi y/2), sqrt2 sin(pi y/2), 1)`` and pure effects
    ``(cos((2y-1)pi/4), sin((2y-1)pi/4), 1) / 2`` for ``y = 1..4``.  The pairing
    agrees with the unscaled coordinates ``r cos``/``r sin`` with ``r = 2**(1/4)``.
    """
    r2 = QuadraticScalar.sqrt(2)
    h = QuadraticScalar(0, F(1, 2), 2)  # sqrt(2)/2
    cos_q = [F(1), F(0), F(-1), F(0)]  # cos(pi y / 2) for y = 0..3
    sin_q = [F(0), F(1), F(0), F(-1)]
    states = [(r2 * cos_q[y % 4], r2 * sin_q[y % 4], F(1)) for y in range(1, 5)]
    # (2y-1)pi/4 for y=1..4 -> pi/4, 3pi/4, 5pi/4, 7pi/4
    diag = [(h, h), (-h, h), (-h, -h), (h, -h)]
    effects = [(c * F(1, 2), s * F(1, 2), F(1, 2)) for c, s in diag]
    unit = (F(0), F(0), F(1))
    return GptSystem(
        "squarebit", 3, states, effects + [unit], unit, 2, None,
        tuple(f"phi{y}" for y in range(1, 5)),
        tuple(f"a{y}" for y in range(1, 5)) + ("u",),
    )


def _chebyshev_table(c1, count: int):
    """``cos(j t)`` and ``sin(j t)/sin(t)`` for ``j = 0..count-1`` from ``c1 = cos(t)``."""
    cos_j = [F(1), c1]
    u_j = [F(0), F(1)]  # U_{j-1}(c1)
    for _ in range(2, count):
        cos_j.append(2 * c1 * cos_j[-1] - cos_j[-2])
        u_j.append(2 * c1 * u_j[-1] - u_j[-2])
    return cos_j[:count], u_j[:count]


def polygon_system(n: int, precision: int = DEFAULT_PRECISION, exact: bool | None = None) -> GptSystem:
    """Regular polygon with ``n`` vertices under the no-restriction hypothesis.

    Coordinates store ``r_n**2 = 1/cos(pi/n)`` inside the state vectors, so pure
    states are ``(r2 cos(2 pi y/n), r2 sin(2 pi y/n) b, 1)`` and pure effects are
    ``(cos, sin / b, 1) / 2`` at angle ``(2y-1) pi/n`` (even n) or
    ``(cos, sin / b, 1) / (r2 + 1)`` at angle ``2 y pi/n`` (odd n).  The factor
    ``b`` cancels in every pairing; exact fields use ``b = 1/sin(pi/n)`` so that
    all entries stay in Q(cos(pi/n)), interval coordinates use ``b = 1``.

    ``exact=None`` picks exact arithmetic for n in {3, 4, 6}; ``exact=True`` is
    also available for n = 5 (Q(sqrt 5)).
    """
    if n < 3:
        raise ValueError("a polygon needs n >= 3")
    if exact is None:
        exact = n in EXACT_BY_DEFAULT
    if exact and n not in _EXACT_COS:
        raise ValueError(f"no exact quadratic-field coordinates for n = {n}")
    m = 2 * n  # angles are j*pi/n with j taken mod 2n

    if exact:
        c1, k = _EXACT_COS[n]
        cos_j, u_j = _chebyshev_table(c1, m)
        s1_sq = 1 - c1 * c1

        def cs(j):
            j %= m
            # (cos, sin * b, sin / b) with b = 1/sin(pi/n)
            return cos_j[j], u_j[j], s1_sq * u_j[j]

        r2 = 1 / c1
        prec = None
    else:
        k = 1
        prec = precision

        def cs(j):
            c, s = interval_trig_pi(j % m, n, precision)
            return c, s, s

        c1, _ = interval_trig_pi(1, n, precision)
        r2 = 1 / c1

    states = []
    for y in range(n):
        c, s_b, _ = cs(2 * y)
        states.append((r2 * c, r2 * s_b, F(1)))
    effects = []
    for y in range(n):
        if n % 2 == 0:
            c, _, s_over_b = cs(2 * y - 1)
            scale = F(1, 2)
        else:
            c, _, s_over_b = cs(2 * y)
            scale = 1 / (r2 + 1)
        effects.append((c * scale, s_over_b * scale, scale))
    unit = (F(0), F(0), F(1))
    return GptSystem(
        f"polygon({n})", 3, states, effects + [unit], unit, k, prec,
        tuple(f"phi{y}" for y in range(n)),
        tuple(f"a{y}" for y in range(n)) + ("u",),
    )


def odd_polygon_inequality(n: int, precision: int = DEFAULT_PRECISION) -> Verdict:
    """SO failure of the odd polygons, checked two ways.

    ``raw``: ``2 cos(3 pi/2n) cos(pi/2n) > 2 cos(3 pi/2n)**2`` in interval arithmetic.
    ``pairing``: ``s = (a_y|phi_{y-1}) + (a_{y+(n+1)/2}|phi_{y-1}) > 1`` read off the
    polygon system at ``y = 0``.  Both must agree; ``n = 3`` is accepted and gives
    ``s = 1``.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("the inequality is stated for odd n >= 3")
    c1, _ = interval_trig_pi(1, 2 * n, precision)  # cos(pi/2n)
    c3, _ = interval_trig_pi(3, 2 * n, precision)  # cos(3pi/2n)
    lhs = 2 * c3 * c1
    rhs = 2 * c3 * c3
    raw_margin = lhs - rhs
    sys = polygon_system(n, precision)
    phi = sys.state((-1) % n)
    j = (n + 1) // 2
    s = pair(sys.effect(0), phi) + pair(sys.effect(j % n), phi)
    pair_margin = s - 1
    raw_holds = sign(raw_margin) > 0
    pair_holds = sign(pair_margin) > 0
    if raw_holds != pair_holds:
        raise ArithmeticError(f"n = {n}: raw inequality and pairing sum disagree")
    return Verdict(
        raw_holds,
        {"s": s, "raw_margin": raw_margin, "pairing_margin": pair_margin,
         "effects": ("a0", f"a{j % n}"), "state": f"phi{(-1) % n}"},
        sys.certainty,
        precision=sys.precision,
        detail=f"s = {s}",
    )


# -- behaviors and games -----------------------------------------------------------------

def pr_box() -> Behavior:
    """``p(y1, y2 | x1, x2) = 1/2`` iff ``y1 xor y2 = x1 x2``."""
    return Behavior.from_function(
        (2, 2), (2, 2), lambda y, x: F(1, 2) if (y[0] ^ y[1]) == (x[0] & x[1]) else F(0))


def chsh_game() -> NonlocalGame:
    return NonlocalGame.from_functions(
        (2, 2), (2, 2), lambda x: F(1, 4),
        lambda x, y: F(int((y[0] ^ y[1]) == (x[0] & x[1]))))


def local_deterministic_behaviors(inputs=(2, 2), outputs=(2, 2)):
    """All local deterministic boxes of a scenario."""
    per_party = [list(product(range(m), repeat=n)) for n, m in zip(inputs, outputs)]
    for strategy in product(*per_party):
        yield deterministic_behavior(inputs, outputs, strategy)


def best_local_chsh():
    g = chsh_game()
    return max(payoff(g, b) for b in local_deterministic_behaviors())


def _polarizer(theta: float):
    """Two-outcome projective measurement of ``cos(2t) Z + sin(2t) X``, outcome 0 = +1."""
    from .quantum import Povm

    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    obs = np.cos(2 * theta) * Z + np.sin(2 * theta) * X
    plus = (np.eye(2) + obs) / 2
    return Povm((plus, np.eye(2) - plus))


TSIRELSON_ANGLES = {"alice": (0.0, np.pi / 4), "bob": (np.pi / 8, -np.pi / 8)}


def singlet():
    from .quantum import DensityMatrix

    return DensityMatrix.pure(np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2))


def tsirelson_behavior() -> Behavior:
    """Singlet with Alice at angles 0, pi/4 and Bob at pi/8, -pi/8.

    Bob's outcome labels are swapped so that the singlet's anticorrelation turns
    into the correlation CHSH rewards; every entry is ``(1 +- 1/sqrt 2)/4``.
    """
    from .quantum import Povm, behavior_from_quantum

    alice = [_polarizer(t) for t in TSIRELSON_ANGLES["alice"]]
    bob = [Povm(tuple(reversed(_polarizer(t).elements))) for t in TSIRELSON_ANGLES["bob"]]
    return behavior_from_quantum(singlet(), [alice, bob])


# -- contextuality scenarios -------------------------------------------------------------

def pentagon_hypergraph() -> Hypergraph:
    """Five vertices, hyperedges ``{i, i+1 mod 5}``; the exclusivity graph is C5."""
    vs = tuple(str(i) for i in range(5))
    return Hypergraph(vs, tuple((vs[i], vs[(i + 1) % 5]) for i in range(5)))


def pentagon_half_weight() -> ProbabilityWeight:
    h = pentagon_hypergraph()
    return ProbabilityWeight(h, {v: F(1, 2) for v in h.vertices})


def kcbs_vectors() -> np.ndarray:
    """Pentagram unit vectors in R^3 with ``<v_j, v_{j+1}> = 0`` and overlap ``1/sqrt 5`` with e_0."""
    cos2 = 1 / np.sqrt(5)
    c, s = np.sqrt(cos2), np.sqrt(1 - cos2)
    return np.array([[c, s * np.cos(4 * np.pi * j / 5), s * np.sin(4 * np.pi * j / 5)]
                     for j in range(5)])


def kcbs_scenario():
    """Pentagram projectors completed to qutrit measurements.

    Each hyperedge is ``{j, j+1, c_j}`` with ``c_j`` the projector onto the
    remaining direction.  Returns ``(hypergraph, assignment, symmetric state)``.
    """
    from .quantum import DensityMatrix

    v = kcbs_vectors()
    proj = {str(j): np.outer(v[j], v[j]).astype(complex) for j in range(5)}
    edges = []
    for j in range(5):
        a, b = str(j), str((j + 1) % 5)
        proj[f"c{j}"] = np.eye(3) - proj[a] - proj[b]
        edges.append((a, b, f"c{j}"))
    vertices = tuple(str(j) for j in range(5)) + tuple(f"c{j}" for j in range(5))
    return Hypergraph(vertices, tuple(edges)), proj, DensityMatrix.pure([1, 0, 0])


def kcbs_weight() -> ProbabilityWeight:
    from .quantum import pq_weight

    h, proj, rho = kcbs_scenario()
    return pq_weight(h, proj, rho)


SYSTEMS = {
    "classical": classical_system,
    "squarebit": square_bit,
    "polygon": polygon_system,
}
BEHAVIORS = {
    "prbox": pr_box,
    "tsirelson": tsirelson_behavior,
}
