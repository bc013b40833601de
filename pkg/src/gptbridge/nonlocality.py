"""Behaviors p(y|x), nonlocal games, No-Signalling and the Local Orthogonality hierarchy."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import prod
from typing import Any, Callable, Sequence

from .gpt import State, SystemMismatchError, dot, kron, normalize_scalar
from .numerics.scalars import Certainty, certainty_of, from_json, sign, to_json
from .orthograph import WeightedGraph, level_clique
from .verdict import Verdict


class InvalidBehaviorError(ValueError):
    pass


class ParseError(ValueError):
    """Input file problem; carries the 1-based line and column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


def locate(text: str, needle: str) -> tuple[int | None, int | None]:
    """1-based position of the first occurrence of ``needle`` in ``text``."""
    idx = text.find(needle)
    if idx < 0:
        return None, None
    line = text.count("\n", 0, idx) + 1
    col = idx - (text.rfind("\n", 0, idx) + 1) + 1
    return line, col


def load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None


def _mixed_radix(digits: Sequence[int], radices: Sequence[int]) -> int:
    idx = 0
    for d, r in zip(digits, radices):
        idx = idx * r + d
    return idx


@dataclass(frozen=True)
class Event:
    x: tuple
    y: tuple

    def __str__(self):
        return f"{''.join(map(str, self.y))}|{''.join(map(str, self.x))}"


@dataclass(frozen=True, eq=False)
class Behavior:
    """N-party conditional distribution stored densely.

    ``table[ix * n_out + iy]`` holds ``p(y|x)`` where ``ix`` and ``iy`` are the
    mixed-radix indices of the input and output strings (party 1 most significant).
    """

    inputs: tuple
    outputs: tuple
    table: tuple

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(n) for n in self.inputs))
        object.__setattr__(self, "outputs", tuple(int(m) for m in self.outputs))
        object.__setattr__(self, "table", tuple(normalize_scalar(v) for v in self.table))
        if len(self.inputs) != len(self.outputs) or not self.inputs:
            raise InvalidBehaviorError("inputs and outputs must list one alphabet size per party")
        if any(n < 1 for n in self.inputs + self.outputs):
            raise InvalidBehaviorError("alphabet sizes must be positive")
        if len(self.table) != self.n_inputs * self.n_outputs:
            raise InvalidBehaviorError(
                f"table has {len(self.table)} entries, expected {self.n_inputs * self.n_outputs}")
        for x in self.x_strings():
            total = Fraction(0)
            for y in self.y_strings():
                v = self.p(y, x)
                if sign(v) < 0:
                    raise InvalidBehaviorError(f"negative probability p({y}|{x})")
                total = total + v
            if sign(total - 1) != 0:
                raise InvalidBehaviorError(f"p(.|{x}) sums to {total}, not 1")

    @classmethod
    def from_function(cls, inputs: Sequence[int], outputs: Sequence[int],
                      fn: Callable[[tuple, tuple], Any]) -> "Behavior":
        xs = list(product(*(range(n) for n in inputs)))
        ys = list(product(*(range(m) for m in outputs)))
        return cls(tuple(inputs), tuple(outputs), tuple(fn(y, x) for x in xs for y in ys))

    @property
    def parties(self) -> int:
        return len(self.inputs)

    @property
    def n_inputs(self) -> int:
        return prod(self.inputs)

    @property
    def n_outputs(self) -> int:
        return prod(self.outputs)

    def x_strings(self):
        return product(*(range(n) for n in self.inputs))

    def y_strings(self):
        return product(*(range(m) for m in self.outputs))

    def p(self, y: Sequence[int], x: Sequence[int]):
        return self.table[_mixed_radix(x, self.inputs) * self.n_outputs
                          + _mixed_radix(y, self.outputs)]

    def events(self):
        for x in self.x_strings():
            for y in self.y_strings():
                yield Event(x, y)

    @property
    def certainty(self) -> Certainty:
        return certainty_of(self.table)

    def same_scenario(self, other: "Behavior") -> bool:
        return self.inputs == other.inputs and self.outputs == other.outputs

    def __eq__(self, other):
        if not isinstance(other, Behavior) or not self.same_scenario(other):
            return NotImplemented
        return all(sign(a - b) == 0 for a, b in zip(self.table, other.table))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NonlocalGame:
    """Input distribution ``q`` over input strings and payoff table ``omega(x, y)``."""

    inputs: tuple
    outputs: tuple
    q: tuple
    omega: tuple

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "q", tuple(normalize_scalar(v) for v in self.q))
        object.__setattr__(self, "omega", tuple(normalize_scalar(v) for v in self.omega))
        if len(self.q) != prod(self.inputs):
            raise ValueError("q must have one entry per input string")
        if len(self.omega) != prod(self.inputs) * prod(self.outputs):
            raise ValueError("omega must have one entry per (x, y)")
        if any(sign(v) < 0 for v in self.q):
            raise ValueError("q must be nonnegative")
        if sign(sum(self.q, Fraction(0)) - 1) != 0:
            raise ValueError("q must sum to 1")

    @classmethod
    def from_functions(cls, inputs, outputs, q: Callable[[tuple], Any],
                       omega: Callable[[tuple, tuple], Any]) -> "NonlocalGame":
        xs = list(product(*(range(n) for n in inputs)))
        ys = list(product(*(range(m) for m in outputs)))
        return cls(tuple(inputs), tuple(outputs), tuple(q(x) for x in xs),
                   tuple(omega(x, y) for x in xs for y in ys))


def payoff(g: NonlocalGame, b: Behavior):
    """Expected payoff ``sum_x q(x) sum_y omega(x,y) p(y|x)``."""
    if g.inputs != b.inputs or g.outputs != b.outputs:
        raise ValueError("game and behavior live in different scenarios")
    total = Fraction(0)
    ny = b.n_outputs
    for ix, qx in enumerate(g.q):
        if sign(qx) == 0:
            continue
        inner = Fraction(0)
        for iy in range(ny):
            w = g.omega[ix * ny + iy]
            if sign(w) != 0:
                inner = inner + w * b.table[ix * ny + iy]
        total = total + qx * inner
    return normalize_scalar(total)


# -- No-Signalling --------------------------------------------------------------------

def bipartitions(n: int):
    """All ``2**(n-1) - 1`` splits of ``range(n)`` into two nonempty groups (party 0 on the left)."""
    rest = list(range(1, n))
    for r in range(0, n - 1):
        for extra in combinations(rest, r):
            left = (0,) + extra
            right = tuple(i for i in range(n) if i not in left)
            yield left, right


def _marginal(b: Behavior, group: Sequence[int], x: tuple) -> dict:
    out: dict = {}
    for y in b.y_strings():
        key = tuple(y[i] for i in group)
        out[key] = out.get(key, Fraction(0)) + b.p(y, x)
    return out


def is_no_signalling(b: Behavior) -> Verdict:
    """Marginals of each side of every bipartition are independent of the other side's inputs."""
    for left, right in bipartitions(b.parties):
        for group, other in ((left, right), (right, left)):
            reference: dict = {}
            for x in b.x_strings():
                key = tuple(x[i] for i in group)
                marg = _marginal(b, group, x)
                if key not in reference:
                    reference[key] = (x, marg)
                    continue
                x0, marg0 = reference[key]
                for yg, v in marg.items():
                    if sign(v - marg0[yg]) != 0:
                        return Verdict(False, {
                            "bipartition": (left, right),
                            "marginal_parties": group,
                            "inputs": (x0, x),
                            "outputs": yg,
                            "values": (marg0[yg], v),
                        }, b.certainty,
                            detail=f"marginal of parties {group} depends on inputs of {other}")
    return Verdict(True, None, b.certainty)


# -- Local Orthogonality ----------------------------------------------------------------

def locally_orthogonal(e: Event, f: Event) -> bool:
    """Some party has the same input in both events and different outputs."""
    return any(xi == xj and yi != yj for xi, xj, yi, yj in zip(e.x, f.x, e.y, f.y))


def lo_graph(b: Behavior, keep_zero: bool = False) -> WeightedGraph:
    labels, weights = [], []
    for e in b.events():
        w = b.p(e.y, e.x)
        if keep_zero or sign(w) != 0:
            labels.append(e)
            weights.append(w)
    return WeightedGraph.from_predicate(labels, weights, locally_orthogonal)


@dataclass(frozen=True)
class LoReport:
    level: int
    satisfied: bool
    max_clique_value: Any
    witness: tuple  # k-copy events, each a tuple of Event
    exact: bool = True
    certainty: Certainty = Certainty.EXACT
    vertices: int = 0
    pruned_zero: int = 0
    engine: str = "branch-and-bound"
    upper_bound: Any = None


def check_lo(b: Behavior, k: int = 1, max_vertices: int | None = None,
             max_level: int | None = None, early_stop=None, node_limit: int | None = None,
             engine: str = "auto") -> LoReport:
    """LO at level ``k`` via max-weight clique on the k-fold disjunctive power."""
    res, size = level_clique(lo_graph(b), k, max_vertices, max_level, early_stop,
                             node_limit, engine)
    return LoReport(
        level=k,
        satisfied=sign(res.value - 1) <= 0,
        max_clique_value=res.value,
        witness=res.labels,
        exact=res.exact,
        certainty=b.certainty,
        vertices=size,
        pruned_zero=res.pruned_zero,
        engine=res.engine,
        upper_bound=res.upper_bound,
    )


# -- models and coarse-graining --------------------------------------------------------

def behavior_from_model(state: State, measurements: Sequence[Sequence]) -> Behavior:
    """``p(y|x) = (m^{x_1}_{y_1} ⊗ ... ⊗ m^{x_N}_{y_N} | rho)``.

    ``measurements[i][x_i]`` is a :class:`~gptbridge.gpt.Measurement` on the
    i-th factor; ``state`` lives on the product system of the factors in order.
    """
    if not state.is_deterministic:
        raise ValueError("state must be deterministic")
    inputs, outputs = [], []
    dims = []
    for i, party in enumerate(measurements):
        if not party:
            raise ValueError(f"party {i} has no measurements")
        sizes = {len(m) for m in party}
        if len(sizes) != 1:
            raise ValueError(f"party {i}: measurements have different numbers of outcomes")
        systems = {id(m.system) for m in party}
        if len(systems) != 1:
            raise SystemMismatchError(f"party {i}: measurements act on different systems")
        inputs.append(len(party))
        outputs.append(sizes.pop())
        dims.append(party[0].system.dim)
    if prod(dims) != state.system.dim:
        raise SystemMismatchError(
            f"state dimension {state.system.dim} != product of factor dimensions {dims}")

    def p(y, x):
        vec = (Fraction(1),)
        for i, (xi, yi) in enumerate(zip(x, y)):
            vec = kron(vec, measurements[i][xi].effects[yi].coords)
        return dot(vec, state.coords)

    return Behavior.from_function(inputs, outputs, p)


def coarse_grain_behavior(b: Behavior, partitions: Sequence[Sequence[Sequence[int]]]) -> Behavior:
    """Merge outputs party-wise: ``partitions[i]`` is a list of blocks of ``range(outputs[i])``."""
    if len(partitions) != b.parties:
        raise ValueError("need one partition per party")
    block_of = []
    for i, part in enumerate(partitions):
        seen = sorted(z for block in part for z in block)
        if seen != list(range(b.outputs[i])) or any(not block for block in part):
            raise ValueError(f"party {i}: blocks must partition range({b.outputs[i]})")
        m = {}
        for k, block in enumerate(part):
            for z in block:
                m[z] = k
        block_of.append(m)
    new_out = tuple(len(p) for p in partitions)
    acc: dict = {}
    for x in b.x_strings():
        for y in b.y_strings():
            key = (x, tuple(block_of[i][y[i]] for i in range(b.parties)))
            acc[key] = acc.get(key, Fraction(0)) + b.p(y, x)
    return Behavior.from_function(b.inputs, new_out, lambda y, x: acc[(x, y)])


def deterministic_behavior(inputs: Sequence[int], outputs: Sequence[int],
                           strategy: Sequence[Sequence[int]]) -> Behavior:
    """Local deterministic box: party ``i`` answers ``strategy[i][x_i]``."""
    def p(y, x):
        return Fraction(int(all(strategy[i][x[i]] == y[i] for i in range(len(x)))))
    return Behavior.from_function(inputs, outputs, p)


# -- file format ---------------------------------------------------------------------

def behavior_to_dict(b: Behavior, keep_zero: bool = False) -> dict:
    table: dict = {}
    for x in b.x_strings():
        row = {}
        for y in b.y_strings():
            v = b.p(y, x)
            if keep_zero or sign(v) != 0:
                row[",".join(map(str, y))] = to_json(v)
        table[",".join(map(str, x))] = row
    out = {"parties": b.parties, "inputs": list(b.inputs), "outputs": list(b.outputs),
           "table": table}
    ks = {v.k for v in b.table if hasattr(v, "k") and getattr(v, "b", 0) != 0}
    if ks:
        out["field_k"] = ks.pop()
    return out


def _parse_string(key: str, sizes: Sequence[int], what: str) -> tuple:
    parts = [p.strip() for p in key.replace("|", ",").split(",")] if key.strip() else []
    if len(parts) != len(sizes):
        raise ValueError(f"{what} string {key!r} must have {len(sizes)} entries")
    out = []
    for p, n in zip(parts, sizes):
        v = int(p)
        if not 0 <= v < n:
            raise ValueError(f"{what} {v} out of range in {key!r}")
        out.append(v)
    return tuple(out)


def behavior_from_dict(data: dict, text: str | None = None) -> Behavior:
    def fail(msg, needle=None):
        line, col = locate(text, needle) if (text and needle) else (None, None)
        raise ParseError(msg, line, col)

    if not isinstance(data, dict):
        fail("behavior file must contain a JSON object")
    for key in ("inputs", "outputs", "table"):
        if key not in data:
            fail(f"missing field {key!r}")
    inputs, outputs = data["inputs"], data["outputs"]
    if not (isinstance(inputs, list) and isinstance(outputs, list)
            and all(isinstance(v, int) for v in inputs + outputs)):
        fail("inputs and outputs must be lists of integers", '"inputs"')
    if "parties" in data and data["parties"] != len(inputs):
        fail("parties does not match the number of alphabets", '"parties"')
    k = int(data.get("field_k", 1))
    ny = prod(outputs)
    table = [Fraction(0)] * (prod(inputs) * ny)
    if not isinstance(data["table"], dict):
        fail("table must be an object", '"table"')
    for xkey, row in data["table"].items():
        try:
            x = _parse_string(xkey, inputs, "input")
        except ValueError as exc:
            fail(str(exc), f'"{xkey}"')
        if not isinstance(row, dict):
            fail(f"row {xkey!r} must be an object", f'"{xkey}"')
        for ykey, val in row.items():
            try:
                y = _parse_string(ykey, outputs, "output")
                v = from_json(val, k=k)
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                fail(f"entry [{xkey!r}][{ykey!r}]: {exc}", f'"{ykey}"')
            table[_mixed_radix(x, inputs) * ny + _mixed_radix(y, outputs)] = v
    try:
        return Behavior(tuple(inputs), tuple(outputs), tuple(table))
    except InvalidBehaviorError as exc:
        fail(f"invalid behavior: {exc}", '"table"')


def dump_behavior(b: Behavior) -> str:
    return json.dumps(behavior_to_dict(b), indent=2)


def load_behavior(text: str) -> Behavior:
    return behavior_from_dict(load_json(text), text)
