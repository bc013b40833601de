"""Weighted graphs, exact maximum-weight clique and the disjunctive graph product.

Adjacency is stored as one Python ``int`` bitmask per vertex, so neighbourhood
intersections in the clique search are single big-integer ``&`` operations.
"""

from __future__ import annotations

import os
from functools import cmp_to_key
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .numerics.scalars import certainty_of, sign

DEFAULT_VERTEX_CAP = 10**6
DEFAULT_MAX_LEVEL = 3
CAP_ENV_VAR = "GPTBRIDGE_MAX_VERTICES"


class ResourceCapExceeded(RuntimeError):
    pass


class SearchBudgetExceeded(ResourceCapExceeded):
    pass


class GraphError(ValueError):
    pass


def resolve_vertex_cap(cap: int | None = None) -> int:
    """Explicit argument, else the environment override, else the default."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(CAP_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError:
            raise GraphError(f"{CAP_ENV_VAR} must be an integer, got {env!r}") from None
    return DEFAULT_VERTEX_CAP


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class WeightedGraph:
    labels: tuple
    weights: tuple
    adjacency: tuple  # bitmask of neighbours per vertex

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "adjacency", tuple(int(a) for a in self.adjacency))
        n = len(self.labels)
        if len(self.weights) != n or len(self.adjacency) != n:
            raise GraphError("labels, weights and adjacency must have equal length")
        full = (1 << n) - 1
        for i, a in enumerate(self.adjacency):
            if a >> i & 1:
                raise GraphError(f"self-loop at vertex {i}")
            if a & ~full:
                raise GraphError(f"vertex {i} has neighbours out of range")
            for j in _bits(a):
                if not self.adjacency[j] >> i & 1:
                    raise GraphError(f"adjacency not symmetric between {i} and {j}")
        for i, w in enumerate(self.weights):
            if sign(w) < 0:
                raise GraphError(f"negative weight at vertex {i}")

    @classmethod
    def from_edges(cls, labels: Sequence, weights: Sequence, edges) -> "WeightedGraph":
        adj = [0] * len(labels)
        for i, j in edges:
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(tuple(labels), tuple(weights), tuple(adj))

    @classmethod
    def from_predicate(cls, labels: Sequence, weights: Sequence,
                       adjacent: Callable[[Any, Any], bool]) -> "WeightedGraph":
        n = len(labels)
        adj = [0] * n
        for i in range(n):
            for j in range(i + 1, n):
                if adjacent(labels[i], labels[j]):
                    adj[i] |= 1 << j
                    adj[j] |= 1 << i
        return cls(tuple(labels), tuple(weights), tuple(adj))

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self):
        return self.n

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i] >> j & 1)

    def neighbors(self, i: int) -> list[int]:
        return list(_bits(self.adjacency[i]))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in _bits(self.adjacency[i]) if i < j]

    def adjacency_matrix(self) -> list[list[bool]]:
        return [[self.has_edge(i, j) for j in range(self.n)] for i in range(self.n)]

    def is_clique(self, vertices: Sequence[int]) -> bool:
        vs = list(vertices)
        return all(self.has_edge(a, b) for k, a in enumerate(vs) for b in vs[k + 1:])

    def weight_of(self, vertices: Sequence[int]):
        return sum((self.weights[v] for v in vertices), Fraction(0))

    def induced(self, keep: Sequence[int]) -> "WeightedGraph":
        keep = list(keep)
        pos = {v: k for k, v in enumerate(keep)}
        adj = []
        for v in keep:
            m = 0
            for u in _bits(self.adjacency[v]):
                if u in pos:
                    m |= 1 << pos[u]
            adj.append(m)
        return WeightedGraph(tuple(self.labels[v] for v in keep),
                             tuple(self.weights[v] for v in keep), tuple(adj))

    def with_weights(self, weights: Sequence) -> "WeightedGraph":
        return WeightedGraph(self.labels, tuple(weights), self.adjacency)

    def relabel(self, fn: Callable) -> "WeightedGraph":
        return WeightedGraph(tuple(fn(l) for l in self.labels), self.weights, self.adjacency)


@dataclass(frozen=True)
class CliqueResult:
    value: Any
    witness: tuple  # vertex indices of the original graph
    labels: tuple
    exact: bool = True
    pruned_zero: int = 0
    nodes: int = 0
    certainty: Any = field(default=None)
    engine: str = "branch-and-bound"
    upper_bound: Any = None


ENGINES = ("auto", "branch-and-bound", "milp")
FLOAT_NODE_BUDGET = 20_000
MILP_REL_GAP = 1e-12


def _float_weights(weights) -> bool:
    """True when some weight is a machine float and none carries exact or interval data."""
    floaty = False
    for w in weights:
        if isinstance(w, float) or type(w).__module__ == "numpy":
            floaty = True
        elif not isinstance(w, (int, Fraction)):
            return False
    return floaty


def max_weight_clique(g: WeightedGraph, early_stop=None, node_limit: int | None = None,
                      engine: str = "auto") -> CliqueResult:
    """Maximum-weight clique.

    ``"branch-and-bound"`` is exact for every scalar type.  ``"milp"`` hands the
    problem to the HiGHS solver and is only accepted for floating-point weights.
    ``"auto"`` runs branch and bound, and for floating-point weights switches to
    the MILP engine once ``FLOAT_NODE_BUDGET`` search nodes are spent.
    ``node_limit`` bounds the branch-and-bound search; exceeding it raises
    :class:`SearchBudgetExceeded`.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")
    floaty = _float_weights(g.weights)
    if engine == "milp":
        if not floaty:
            raise ValueError("the MILP engine only accepts floating-point weights")
        return _milp_clique(g)
    if engine == "auto" and floaty:
        budget = FLOAT_NODE_BUDGET if node_limit is None else min(node_limit, FLOAT_NODE_BUDGET)
        try:
            return _bb_clique(g, early_stop, budget)
        except SearchBudgetExceeded:
            return _milp_clique(g)
    return _bb_clique(g, early_stop, node_limit)


def _compressed(g: WeightedGraph):
    """Drop zero-weight vertices and reindex by non-increasing weight."""
    keep = [v for v in range(g.n) if sign(g.weights[v]) != 0]
    keep.sort(key=cmp_to_key(lambda a, b: sign(g.weights[b] - g.weights[a]) or (a - b)))
    pos = {v: k for k, v in enumerate(keep)}
    adj = []
    for v in keep:
        m = 0
        for u in _bits(g.adjacency[v]):
            k = pos.get(u)
            if k is not None:
                m |= 1 << k
        adj.append(m)
    return keep, [g.weights[v] for v in keep], adj


def _independent_cover(adj: list[int]) -> list[int]:
    """Independent sets covering every non-adjacent pair, grown greedily."""
    n = len(adj)
    full = (1 << n) - 1
    todo = [full & ~adj[v] & ~(1 << v) for v in range(n)]
    rows = []
    for v in range(n):
        while todo[v]:
            u = (todo[v] & -todo[v]).bit_length() - 1
            members = (1 << v) | (1 << u)
            cand = full & ~adj[v] & ~adj[u] & ~members
            # prefer vertices that still have uncovered pairs with the set
            for x in sorted(_bits(cand), key=lambda x: -bin(todo[x] & members).count("1")):
                if cand >> x & 1:
                    members |= 1 << x
                    cand &= ~adj[x] & ~(1 << x)
            rows.append(members)
            for a in _bits(members):
                todo[a] &= ~members
    return rows


def _milp_clique(g: WeightedGraph) -> CliqueResult:
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import csr_matrix

    keep, w, adj = _compressed(g)
    n = len(keep)
    if n == 0:
        return CliqueResult(Fraction(0), (), (), True, g.n, 0, certainty_of(g.weights), "milp",
                            Fraction(0))
    rows = _independent_cover(adj)
    constraints = []
    if rows:
        r_idx, c_idx = [], []
        for r, m in enumerate(rows):
            for v in _bits(m):
                r_idx.append(r)
                c_idx.append(v)
        A = csr_matrix((np.ones(len(r_idx)), (r_idx, c_idx)), shape=(len(rows), n))
        constraints = [LinearConstraint(A, -np.inf, 1.0)]
    res = milp(-np.array([float(x) for x in w]), integrality=np.ones(n), bounds=Bounds(0, 1),
               constraints=constraints, options={"mip_rel_gap": MILP_REL_GAP})
    if res.status != 0 or res.x is None:
        raise RuntimeError(f"MILP solver failed: {res.message}")
    chosen = [v for v in range(n) if res.x[v] > 0.5]
    for i, a in enumerate(chosen):
        for b in chosen[i + 1:]:
            if not adj[a] >> b & 1:
                raise RuntimeError("MILP solution is not a clique")
    value = sum((w[v] for v in chosen), 0.0)
    bound = float(-res.mip_dual_bound)
    witness = tuple(sorted(keep[v] for v in chosen))
    return CliqueResult(
        value=value,
        witness=witness,
        labels=tuple(g.labels[v] for v in witness),
        exact=sign(bound - value) <= 0,
        pruned_zero=g.n - n,
        nodes=int(getattr(res, "mip_node_count", 0) or 0),
        certainty=certainty_of(g.weights),
        engine="milp",
        upper_bound=bound,
    )


def _bb_clique(g: WeightedGraph, early_stop=None, node_limit: int | None = None) -> CliqueResult:
    """Exact maximum-weight clique by branch and bound.

    Vertices of weight zero are removed first.  The remaining vertices are
    ordered by non-increasing weight; each node is bounded by a greedy colouring
    in which a vertex may be split over several colour classes, every class
    contributing the largest share it holds.  With
    ``early_stop`` set, the search returns as soon as a clique heavier than that
    threshold is found (``exact`` is then ``False``).
    """
    keep, w, adj = _compressed(g)
    pruned = g.n - len(keep)
    n = len(keep)

    zero = Fraction(0)
    best_val = zero
    best_set: list[int] = []
    nodes = 0
    stopped = False

    def color_order(P: int):
        # greedy colouring with weight splitting: a vertex heavier than a class
        # it fits into spends that class's value and carries the rest onward
        order = []
        classes: list[list] = []  # [member mask, value]
        bound = zero
        Q = P
        while Q:
            low = Q & -Q
            v = low.bit_length() - 1
            Q ^= low
            r = w[v]
            for c in classes:
                if not adj[v] & c[0]:
                    c[0] |= low
                    if sign(r - c[1]) <= 0:
                        r = zero
                        break
                    r = r - c[1]
            if sign(r) > 0:
                classes.append([low, r])
                bound = bound + r
            order.append((v, bound))
        return order

    def expand(cur_val, cur_set, P):
        nonlocal best_val, best_set, nodes, stopped
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            raise SearchBudgetExceeded(f"clique search exceeded {node_limit} nodes")
        order = color_order(P)
        for v, bnd in reversed(order):
            if stopped:
                return
            if sign(cur_val + bnd - best_val) <= 0:
                return
            val = cur_val + w[v]
            cur_set.append(v)
            newP = P & adj[v]
            if newP:
                expand(val, cur_set, newP)
            elif sign(val - best_val) > 0:
                best_val = val
                best_set = list(cur_set)
                if early_stop is not None and sign(best_val - early_stop) > 0:
                    stopped = True
            cur_set.pop()
            P &= ~(1 << v)

    if n:
        expand(zero, [], (1 << n) - 1)
    witness = tuple(sorted(keep[k] for k in best_set))
    return CliqueResult(
        value=best_val,
        witness=witness,
        labels=tuple(g.labels[v] for v in witness),
        exact=not stopped,
        pruned_zero=pruned,
        nodes=nodes,
        certainty=certainty_of(g.weights),
        upper_bound=None if stopped else best_val,
    )


def _product(g1: WeightedGraph, g2: WeightedGraph, combine) -> WeightedGraph:
    n1, n2 = g1.n, g2.n
    block = (1 << n2) - 1
    spread = 0
    for i in range(n1):
        spread |= 1 << (i * n2)
    row_masks = []
    for i in range(n1):
        m = 0
        for ip in _bits(g1.adjacency[i]):
            m |= block << (ip * n2)
        row_masks.append(m)
    col_masks = [g2.adjacency[j] * spread for j in range(n2)]
    labels, weights, adj = [], [], []
    for i in range(n1):
        for j in range(n2):
            labels.append(combine(g1.labels[i], g2.labels[j]))
            weights.append(g1.weights[i] * g2.weights[j])
            adj.append(row_masks[i] | col_masks[j])
    return WeightedGraph(tuple(labels), tuple(weights), tuple(adj))


def disjunctive_product(g1: WeightedGraph, g2: WeightedGraph) -> WeightedGraph:
    """Co-normal product: ``(u,v) ~ (u',v')`` iff ``u ~ u'`` or ``v ~ v'``; weights multiply."""
    return _product(g1, g2, lambda a, b: (a, b))


def power(g: WeightedGraph, k: int, max_vertices: int | None = None) -> WeightedGraph:
    """k-fold disjunctive power with labels as length-k tuples."""
    if k < 1:
        raise ValueError("level must be >= 1")
    cap = resolve_vertex_cap(max_vertices)
    size = g.n ** k
    if size > cap:
        raise ResourceCapExceeded(
            f"level {k} needs {g.n}^{k} = {size} vertices, above the cap of {cap} "
            f"(raise it with --max-vertices or {CAP_ENV_VAR})")
    base = g.relabel(lambda l: (l,))
    out = base
    for _ in range(k - 1):
        out = _product(out, base, lambda a, b: a + b)
    return out


def check_level(k: int, max_level: int | None):
    limit = DEFAULT_MAX_LEVEL if max_level is None else max_level
    if k > limit:
        raise ResourceCapExceeded(
            f"level {k} exceeds the hierarchy cap {limit}; pass a larger max_level to override")


def level_clique(g: WeightedGraph, k: int, max_vertices: int | None = None,
                 max_level: int | None = None, early_stop=None, node_limit: int | None = None,
                 engine: str = "auto") -> tuple[CliqueResult, int]:
    """Max-weight clique of the k-fold power, shared by the LO and CE hierarchies."""
    check_level(k, max_level)
    gk = power(g, k, max_vertices)
    return max_weight_clique(gk, early_stop, node_limit, engine), gk.n
