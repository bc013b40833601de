"""Test-space hypergraphs, probability weights and the Consistent Exclusivity hierarchy."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .gpt import GptSystem, State, SystemMismatchError, is_measurement, normalize_scalar, pair
from .nonlocality import ParseError, load_json, locate
from .numerics.scalars import Certainty, certainty_of, from_json, sign, to_json
from .orthograph import WeightedGraph, level_clique
from .verdict import Verdict


class HypergraphError(ValueError):
    pass


@dataclass(frozen=True)
class Hypergraph:
    """Vertices are answers, hyperedges are questions (sets of possible answers)."""

    vertices: tuple
    edges: tuple  # tuple of tuples of vertex labels

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        if len(set(self.vertices)) != len(self.vertices):
            raise HypergraphError("duplicate vertex labels")
        known = set(self.vertices)
        covered = set()
        for i, e in enumerate(self.edges):
            if not e:
                raise HypergraphError(f"hyperedge {i} is empty")
            if len(set(e)) != len(e):
                raise HypergraphError(f"hyperedge {i} repeats a vertex")
            unknown = [v for v in e if v not in known]
            if unknown:
                raise HypergraphError(f"hyperedge {i} uses unknown vertices {unknown}")
            covered.update(e)
        missing = [v for v in self.vertices if v not in covered]
        if missing:
            raise HypergraphError(f"vertices {missing} lie in no hyperedge")

    def index(self, v) -> int:
        return self.vertices.index(v)

    def edges_containing(self, v) -> list[int]:
        return [i for i, e in enumerate(self.edges) if v in e]

    def with_edge(self, edge: Sequence) -> "Hypergraph":
        return Hypergraph(self.vertices, self.edges + (tuple(edge),))


@dataclass(frozen=True, eq=False)
class ProbabilityWeight:
    hypergraph: Hypergraph
    w: Mapping  # vertex label -> scalar

    def __post_init__(self):
        w = {v: normalize_scalar(self.w[v]) for v in self.hypergraph.vertices
             if v in self.w}
        if len(w) != len(self.hypergraph.vertices):
            raise HypergraphError("weight must be defined on every vertex")
        object.__setattr__(self, "w", w)
        v = is_probability_weight(w, self.hypergraph)
        if not v.holds:
            raise HypergraphError(v.detail)

    def __getitem__(self, v):
        return self.w[v]

    @property
    def certainty(self) -> Certainty:
        return certainty_of(self.w.values())

    def mix(self, other: "ProbabilityWeight", t) -> "ProbabilityWeight":
        return ProbabilityWeight(self.hypergraph,
                                 {v: t * self.w[v] + (1 - t) * other.w[v] for v in self.w})


def is_probability_weight(w: Mapping, h: Hypergraph) -> Verdict:
    """Values in ``[0, 1]`` and every hyperedge summing to exactly 1."""
    for v in h.vertices:
        if v not in w:
            return Verdict(False, {"vertex": v}, detail=f"no weight for vertex {v!r}")
        x = w[v]
        if sign(x) < 0 or sign(x - 1) > 0:
            return Verdict(False, {"vertex": v, "value": x},
                           detail=f"weight of {v!r} outside [0, 1]")
    cert = certainty_of([w[v] for v in h.vertices])
    for i, e in enumerate(h.edges):
        total = sum((w[v] for v in e), Fraction(0))
        if sign(total - 1) != 0:
            return Verdict(False, {"edge": i, "sum": total}, cert,
                           detail=f"hyperedge {i} sums to {total}")
    return Verdict(True, None, cert)


def exclusivity_graph(h: Hypergraph, w: ProbabilityWeight | Mapping | None = None) -> WeightedGraph:
    """Two vertices are exclusive iff some hyperedge contains both."""
    pos = {v: i for i, v in enumerate(h.vertices)}
    adj = [0] * len(h.vertices)
    for e in h.edges:
        mask = 0
        for v in e:
            mask |= 1 << pos[v]
        for v in e:
            adj[pos[v]] |= mask & ~(1 << pos[v])
    if w is None:
        weights = (Fraction(1),) * len(h.vertices)
    else:
        table = w.w if isinstance(w, ProbabilityWeight) else w
        weights = tuple(table[v] for v in h.vertices)
    return WeightedGraph(h.vertices, weights, tuple(adj))


@dataclass(frozen=True)
class CeReport:
    level: int
    satisfied: bool
    max_clique_value: Any
    witness: tuple  # k-strings of mutually exclusive vertices
    exact: bool = True
    certainty: Certainty = Certainty.EXACT
    vertices: int = 0
    pruned_zero: int = 0
    engine: str = "branch-and-bound"
    upper_bound: Any = None


def check_ce(w: ProbabilityWeight, k: int = 1, max_vertices: int | None = None,
             max_level: int | None = None, early_stop=None, node_limit: int | None = None,
             engine: str = "auto") -> CeReport:
    g = exclusivity_graph(w.hypergraph, w)
    res, size = level_clique(g, k, max_vertices, max_level, early_stop,
                             node_limit, engine)
    return CeReport(
        level=k,
        satisfied=sign(res.value - 1) <= 0,
        max_clique_value=res.value,
        witness=res.labels,
        exact=res.exact,
        certainty=w.certainty,
        vertices=size,
        pruned_zero=res.pruned_zero,
        engine=res.engine,
        upper_bound=res.upper_bound,
    )


@dataclass(frozen=True, eq=False)
class EffectValuedWeight:
    """One effect per vertex such that every hyperedge forms a measurement.

    ``system`` is a :class:`~gptbridge.gpt.GptSystem` with ``Effect`` values, or a
    quantum system with operator values.
    """

    hypergraph: Hypergraph
    system: Any
    effects: Mapping

    def __post_init__(self):
        missing = [v for v in self.hypergraph.vertices if v not in self.effects]
        if missing:
            raise HypergraphError(f"no effect assigned to {missing}")
        for i, e in enumerate(self.hypergraph.edges):
            ops = [self.effects[v] for v in e]
            if getattr(self.system, "is_quantum", False):
                from . import quantum
                ok = quantum.is_povm(ops, self.system.dim)
            else:
                ok = is_measurement(ops)
            if not ok:
                raise HypergraphError(f"effects on hyperedge {i} do not form a measurement")


def weight_from_model(evw: EffectValuedWeight, rho) -> ProbabilityWeight:
    """``w(y) = (w_hat(y) | rho)``."""
    if getattr(evw.system, "is_quantum", False):
        from . import quantum
        return quantum.pq_weight(evw.hypergraph, evw.effects, rho)
    if not isinstance(rho, State) or rho.system is not evw.system:
        raise SystemMismatchError("state does not live on the weight's system")
    if not rho.is_deterministic:
        raise ValueError("state must be deterministic")
    return ProbabilityWeight(evw.hypergraph,
                             {v: pair(evw.effects[v], rho) for v in evw.hypergraph.vertices})


@dataclass(frozen=True, eq=False)
class ContextualGame:
    """``q`` over hyperedges and payoff ``omega[(edge index, vertex)]`` (missing entries are 0)."""

    hypergraph: Hypergraph
    q: tuple
    omega: Mapping

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(normalize_scalar(v) for v in self.q))
        if len(self.q) != len(self.hypergraph.edges):
            raise ValueError("q must have one entry per hyperedge")
        if any(sign(v) < 0 for v in self.q) or sign(sum(self.q, Fraction(0)) - 1) != 0:
            raise ValueError("q must be a probability distribution")
        for (i, v) in self.omega:
            if v not in self.hypergraph.edges[i]:
                raise ValueError(f"payoff entry for {v!r} outside hyperedge {i}")

    def c(self, v):
        """Effective vertex payoff ``sum_x q(x) omega(x, v)``."""
        total = Fraction(0)
        for i in self.hypergraph.edges_containing(v):
            total = total + self.q[i] * self.omega.get((i, v), 0)
        return normalize_scalar(total)


def payoff_contextual(g: ContextualGame, w: ProbabilityWeight):
    if g.hypergraph != w.hypergraph:
        raise ValueError("game and weight use different hypergraphs")
    total = Fraction(0)
    for v in g.hypergraph.vertices:
        total = total + g.c(v) * w[v]
    return normalize_scalar(total)


def response_noncontextual_check(p: Mapping[int, Mapping], h: Hypergraph) -> tuple[Verdict, ProbabilityWeight | None]:
    """``p[edge index][vertex]`` must agree on every vertex shared by two edges.

    Returns the verdict and, on success, the extracted weight.
    """
    w: dict = {}
    source: dict = {}
    cert = Certainty.EXACT
    for i, e in enumerate(h.edges):
        row = p.get(i, {})
        extra = [v for v in row if v not in e]
        if extra:
            raise HypergraphError(f"row {i} assigns probability outside its hyperedge: {extra}")
        for v in e:
            val = normalize_scalar(row.get(v, Fraction(0)))
            if certainty_of([val]) is not Certainty.EXACT:
                cert = certainty_of([val])
            if v in w:
                if sign(val - w[v]) != 0:
                    return Verdict(False, {"vertex": v, "edges": (source[v], i),
                                           "values": (w[v], val)}, cert,
                                   detail=f"p({v}|{source[v]}) != p({v}|{i})"), None
            else:
                w[v] = val
                source[v] = i
    for i, e in enumerate(h.edges):
        total = sum((w[v] for v in e), Fraction(0))
        if sign(total - 1) != 0:
            raise HypergraphError(f"row {i} is not normalized")
    return Verdict(True, None, cert), ProbabilityWeight(h, w)


# -- file formats ---------------------------------------------------------------------

def hypergraph_to_dict(h: Hypergraph) -> dict:
    return {"vertices": list(h.vertices), "edges": [list(e) for e in h.edges]}


def hypergraph_from_dict(data, text: str | None = None) -> Hypergraph:
    def fail(msg, needle=None):
        line, col = locate(text, needle) if (text and needle) else (None, None)
        raise ParseError(msg, line, col)

    if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
        fail("hypergraph file needs 'vertices' and 'edges'")
    if not isinstance(data["vertices"], list) or not isinstance(data["edges"], list):
        fail("'vertices' and 'edges' must be lists", '"vertices"')
    vertices = [str(v) for v in data["vertices"]]
    edges = []
    for e in data["edges"]:
        if not isinstance(e, list):
            fail("each hyperedge must be a list", '"edges"')
        edges.append([str(v) for v in e])
    try:
        return Hypergraph(tuple(vertices), tuple(edges))
    except HypergraphError as exc:
        fail(str(exc), '"edges"')


def weight_to_dict(w: ProbabilityWeight) -> dict:
    return {str(v): to_json(x) for v, x in w.w.items()}


def weight_from_dict(data, h: Hypergraph, text: str | None = None) -> ProbabilityWeight:
    def fail(msg, needle=None):
        line, col = locate(text, needle) if (text and needle) else (None, None)
        raise ParseError(msg, line, col)

    if not isinstance(data, dict):
        fail("weight file must map vertex labels to values")
    k = 1
    if "field_k" in data:
        k = int(data["field_k"])
        data = {key: val for key, val in data.items() if key != "field_k"}
    w = {}
    for key, val in data.items():
        if key not in h.vertices:
            fail(f"unknown vertex {key!r}", f'"{key}"')
        try:
            w[key] = from_json(val, k=k)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            fail(f"vertex {key!r}: {exc}", f'"{key}"')
    try:
        return ProbabilityWeight(h, w)
    except HypergraphError as exc:
        fail(f"invalid weight: {exc}")


def load_hypergraph(text: str) -> Hypergraph:
    return hypergraph_from_dict(load_json(text), text)


def load_weight(text: str, h: Hypergraph) -> ProbabilityWeight:
    return weight_from_dict(load_json(text), h, text)


def dump_hypergraph(h: Hypergraph) -> str:
    return json.dumps(hypergraph_to_dict(h), indent=2)


def dump_weight(w: ProbabilityWeight) -> str:
    return json.dumps(weight_to_dict(w), indent=2)
