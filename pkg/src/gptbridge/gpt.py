"""Systems as finite-dimensional cones: states, effects, measurements and the pairing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .numerics.lp import LinearProgram, lp_feasible
from .numerics.scalars import (
    FieldMismatchError,
    IntervalScalar,
    QuadraticScalar,
    certainty_of,
    from_json,
    sign,
    to_json,
)


class InvalidSystemError(ValueError):
    pass


class SystemMismatchError(ValueError):
    pass


class NotAMeasurementError(ValueError):
    pass


class PartitionError(ValueError):
    pass


def normalize_scalar(x):
    """Canonical representation: ints and rational quadratics become ``Fraction``."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, QuadraticScalar) and x.b == 0:
        return x.a
    return x


def vec(values: Iterable) -> tuple:
    return tuple(normalize_scalar(v) for v in values)


def dot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise SystemMismatchError(f"dimension mismatch: {len(a)} vs {len(b)}")
    total = Fraction(0)
    for x, y in zip(a, b):
        total = total + x * y
    return normalize_scalar(total)


def kron(a: Sequence, b: Sequence) -> tuple:
    return tuple(normalize_scalar(x * y) for x in a for y in b)


def vec_add(a, b) -> tuple:
    return tuple(normalize_scalar(x + y) for x, y in zip(a, b))


def vec_sub(a, b) -> tuple:
    return tuple(normalize_scalar(x - y) for x, y in zip(a, b))


def vec_scale(c, a) -> tuple:
    return tuple(normalize_scalar(c * x) for x in a)


def in_cone(target: Sequence, generators: Sequence[Sequence]):
    """Conic membership by LP; returns the coefficients or ``None``."""
    d = len(target)
    if not generators:
        return (() if all(sign(t) == 0 for t in target) else None)
    A = [[g[i] for g in generators] for i in range(d)]
    ok, res = lp_feasible(LinearProgram(len(generators), None, A, list(target)))
    return res if ok else None


def _field_of(values) -> int:
    ks = {v.k for v in values if isinstance(v, QuadraticScalar) and v.b != 0}
    if len(ks) > 1:
        raise FieldMismatchError(f"mixed quadratic fields {sorted(ks)}")
    return ks.pop() if ks else 1


@dataclass(frozen=True, eq=False)
class GptSystem:
    """A system given by pure-state generators, effect-cone generators and a unit effect."""

    name: str
    dim: int
    pure_states: tuple
    effect_generators: tuple
    unit: tuple
    field_k: int = 1
    precision: int | None = None
    state_names: tuple | None = None
    effect_names: tuple | None = None

    def __post_init__(self):
        if self.state_names is not None:
            object.__setattr__(self, "state_names", tuple(map(str, self.state_names)))
        if self.effect_names is not None:
            object.__setattr__(self, "effect_names", tuple(map(str, self.effect_names)))
        object.__setattr__(self, "pure_states", tuple(vec(s) for s in self.pure_states))
        object.__setattr__(self, "effect_generators",
                           tuple(vec(e) for e in self.effect_generators))
        object.__setattr__(self, "unit", vec(self.unit))
        self.validate()

    def _entries(self):
        for v in (*self.pure_states, *self.effect_generators, self.unit):
            yield from v

    def validate(self) -> None:
        """Raise :class:`InvalidSystemError` unless every structural invariant holds."""
        if self.dim < 1:
            raise InvalidSystemError("dimension must be positive")
        if not self.pure_states:
            raise InvalidSystemError("a system needs at least one pure state")
        for label, group in (("pure state", self.pure_states),
                             ("effect generator", self.effect_generators)):
            for i, v in enumerate(group):
                if len(v) != self.dim:
                    raise InvalidSystemError(f"{label} {i} has length {len(v)}, expected {self.dim}")
        if len(self.unit) != self.dim:
            raise InvalidSystemError("unit effect has wrong length")
        if self.state_names is not None and len(self.state_names) != len(self.pure_states):
            raise InvalidSystemError("state_names must match pure_states")
        if self.effect_names is not None and len(self.effect_names) != len(self.effect_generators):
            raise InvalidSystemError("effect_names must match effect_generators")
        k = _field_of(self._entries())
        if k not in (1, self.field_k):
            raise InvalidSystemError(f"entries live in Q(sqrt({k})) but field_k={self.field_k}")
        has_interval = any(isinstance(v, IntervalScalar) for v in self._entries())
        if has_interval and self.precision is None:
            object.__setattr__(self, "precision",
                               min(v.precision for v in self._entries()
                                   if isinstance(v, IntervalScalar)))
        for i, phi in enumerate(self.pure_states):
            if sign(dot(self.unit, phi) - 1) != 0:
                raise InvalidSystemError(f"(u|phi_{i}) != 1")
            for j, e in enumerate(self.effect_generators):
                if sign(dot(e, phi)) < 0:
                    raise InvalidSystemError(f"effect generator {j} is negative on pure state {i}")
        if self.effect_generators and self.unit_generator_index() is None:
            if in_cone(self.unit, self.effect_generators) is None:
                raise InvalidSystemError("unit effect is outside the effect cone")

    def state_label(self, i: int) -> str:
        return self.state_names[i] if self.state_names else f"s{i}"

    def effect_label(self, i: int) -> str:
        return self.effect_names[i] if self.effect_names else f"e{i}"

    def effect_index(self, token: str) -> int:
        """Resolve an effect by name, or by a 0-based integer index."""
        if self.effect_names and token in self.effect_names:
            return self.effect_names.index(token)
        try:
            i = int(token)
        except ValueError:
            raise KeyError(f"unknown effect {token!r}") from None
        if not 0 <= i < len(self.effect_generators):
            raise KeyError(f"effect index {i} out of range")
        return i

    def unit_generator_index(self) -> int | None:
        for i, e in enumerate(self.effect_generators):
            if all(sign(x - y) == 0 for x, y in zip(e, self.unit)):
                return i
        return None

    @property
    def certainty(self):
        return certainty_of(self._entries())

    @property
    def exact(self) -> bool:
        return self.precision is None

    # convenient constructors for members
    def state(self, index: int) -> "State":
        return State(self, self.pure_states[index])

    def effect(self, index: int) -> "Effect":
        return Effect(self, self.effect_generators[index])

    def unit_effect(self) -> "Effect":
        return Effect(self, self.unit)

    def zero_effect(self) -> "Effect":
        return Effect(self, (Fraction(0),) * self.dim)

    def states(self) -> list["State"]:
        return [State(self, s) for s in self.pure_states]

    def effects(self) -> list["Effect"]:
        return [Effect(self, e) for e in self.effect_generators]

    def pure_effects(self) -> list["Effect"]:
        """Effect generators other than the unit, i.e. the listed extreme rays."""
        u = self.unit_generator_index()
        return [Effect(self, e) for i, e in enumerate(self.effect_generators) if i != u]

    def mixture(self, weights: Sequence, indices: Sequence[int] | None = None) -> "State":
        idx = range(len(self.pure_states)) if indices is None else indices
        coords = (Fraction(0),) * self.dim
        for w, i in zip(weights, idx):
            coords = vec_add(coords, vec_scale(w, self.pure_states[i]))
        return State(self, coords)

    def __repr__(self):
        return (f"GptSystem({self.name!r}, dim={self.dim}, pure_states={len(self.pure_states)}, "
                f"effects={len(self.effect_generators)}, k={self.field_k})")


def _check_same(a: GptSystem, b: GptSystem):
    if a is not b:
        raise SystemMismatchError(f"objects belong to different systems ({a.name} vs {b.name})")


@dataclass(frozen=True, eq=False)
class State:
    system: GptSystem
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", vec(self.coords))
        if len(self.coords) != self.system.dim:
            raise SystemMismatchError("state length does not match system dimension")

    @property
    def normalization(self):
        return dot(self.system.unit, self.coords)

    @property
    def is_deterministic(self) -> bool:
        return sign(self.normalization - 1) == 0

    def in_state_cone(self):
        """Coefficients over the pure states, or ``None`` if outside the cone."""
        return in_cone(self.coords, self.system.pure_states)

    def __eq__(self, other):
        if not isinstance(other, State) or other.system is not self.system:
            return NotImplemented
        return all(sign(x - y) == 0 for x, y in zip(self.coords, other.coords))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Effect:
    system: GptSystem
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", vec(self.coords))
        if len(self.coords) != self.system.dim:
            raise SystemMismatchError("effect length does not match system dimension")

    def __add__(self, other: "Effect") -> "Effect":
        _check_same(self.system, other.system)
        return Effect(self.system, vec_add(self.coords, other.coords))

    def __sub__(self, other: "Effect") -> "Effect":
        _check_same(self.system, other.system)
        return Effect(self.system, vec_sub(self.coords, other.coords))

    def __mul__(self, c) -> "Effect":
        return Effect(self.system, vec_scale(c, self.coords))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __eq__(self, other):
        if not isinstance(other, Effect) or other.system is not self.system:
            return NotImplemented
        return all(sign(x - y) == 0 for x, y in zip(self.coords, other.coords))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(sign(x) == 0 for x in self.coords)


def pair(e: Effect, s: State):
    """The probability pairing ``(e|s)``."""
    _check_same(e.system, s.system)
    return dot(e.coords, s.coords)


def is_valid_effect(e: Effect, mode: str = "no-restriction") -> bool:
    """``0 <= (e|phi) <= 1`` on every pure state, or cone membership in restricted mode."""
    sys = e.system
    if mode == "restricted":
        return (in_cone(e.coords, sys.effect_generators) is not None
                and in_cone(vec_sub(sys.unit, e.coords), sys.effect_generators) is not None)
    for phi in sys.pure_states:
        v = dot(e.coords, phi)
        if sign(v) < 0 or sign(v - 1) > 0:
            return False
    return True


def sum_effects(effects: Sequence[Effect], system: GptSystem | None = None) -> Effect:
    sys = system if system is not None else effects[0].system
    total = sys.zero_effect()
    for e in effects:
        total = total + e
    return total


def is_measurement(effects: Sequence[Effect], mode: str = "no-restriction") -> bool:
    if not effects:
        return False
    sys = effects[0].system
    for e in effects:
        _check_same(sys, e.system)
        if not is_valid_effect(e, mode):
            return False
    return sum_effects(effects) == sys.unit_effect()


@dataclass(frozen=True, eq=False)
class Measurement:
    system: GptSystem
    effects: tuple
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "effects", tuple(self.effects))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(self.effects))))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(self.effects) or len(set(self.labels)) != len(self.labels):
            raise NotAMeasurementError("labels must be distinct and match the effects")
        for e in self.effects:
            _check_same(self.system, e.system)
        if not is_measurement(self.effects):
            raise NotAMeasurementError("effects are not valid or do not sum to the unit effect")

    def __len__(self):
        return len(self.effects)

    def __getitem__(self, label) -> Effect:
        return self.effects[self.labels.index(label)]

    def probabilities(self, s: State) -> list:
        return [pair(e, s) for e in self.effects]


@dataclass(frozen=True, eq=False)
class Ensemble:
    system: GptSystem
    states: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        total = sum((s.normalization for s in self.states), Fraction(0))
        if sign(total - 1) != 0:
            raise ValueError("ensemble weights must sum to 1")


def coarse_grain(m: Measurement, partition: Sequence[Sequence]) -> Measurement:
    """Merge outcomes block-wise; block ``i`` gets label ``i``."""
    seen = []
    for block in partition:
        if not block:
            raise PartitionError("empty block")
        seen.extend(block)
    if sorted(map(repr, seen)) != sorted(map(repr, m.labels)) or len(seen) != len(set(seen)):
        raise PartitionError("partition must cover every outcome exactly once")
    effects = [sum_effects([m[z] for z in block], m.system) for block in partition]
    return Measurement(m.system, tuple(effects))


def tensor_system(a: GptSystem, b: GptSystem, name: str | None = None) -> GptSystem:
    """Minimal tensor product: product pure states and product effect generators."""
    if a.field_k != b.field_k and 1 not in (a.field_k, b.field_k):
        raise FieldMismatchError(f"cannot combine Q(sqrt({a.field_k})) with Q(sqrt({b.field_k}))")
    k = max(a.field_k, b.field_k)
    precs = [p for p in (a.precision, b.precision) if p is not None]
    return GptSystem(
        name or f"{a.name}⊗{b.name}",
        a.dim * b.dim,
        tuple(kron(s, t) for s in a.pure_states for t in b.pure_states),
        tuple(kron(e, f) for e in a.effect_generators for f in b.effect_generators),
        kron(a.unit, b.unit),
        k,
        min(precs) if precs else None,
        tuple(f"{x}⊗{y}" for x in _names(a, "s") for y in _names(b, "s")),
        tuple(f"{x}⊗{y}" for x in _names(a, "e") for y in _names(b, "e")),
    )


def _names(sys: GptSystem, kind: str):
    if kind == "s":
        return [sys.state_label(i) for i in range(len(sys.pure_states))]
    return [sys.effect_label(i) for i in range(len(sys.effect_generators))]


def tensor_states(s: State, t: State, system: GptSystem) -> State:
    return State(system, kron(s.coords, t.coords))


def tensor_effects(e: Effect, f: Effect, system: GptSystem) -> Effect:
    return Effect(system, kron(e.coords, f.coords))


# -- file format ---------------------------------------------------------------

def _enc(x):
    if isinstance(x, IntervalScalar):
        return to_json(x)
    if isinstance(x, QuadraticScalar):
        return {"a": to_json(x.a), "b": to_json(x.b)}
    return {"a": to_json(x), "b": "0/1"}


def system_to_dict(sys: GptSystem) -> dict:
    out = {
        "name": sys.name,
        "dim": sys.dim,
        "field_k": sys.field_k,
        "pure_states": [[_enc(x) for x in v] for v in sys.pure_states],
        "effect_generators": [[_enc(x) for x in v] for v in sys.effect_generators],
        "unit": [_enc(x) for x in sys.unit],
    }
    if sys.precision is not None:
        out["precision"] = sys.precision
    if sys.state_names is not None:
        out["state_names"] = list(sys.state_names)
    if sys.effect_names is not None:
        out["effect_names"] = list(sys.effect_names)
    return out


def system_from_dict(data: dict) -> GptSystem:
    try:
        k = int(data.get("field_k", 1))
        prec = data.get("precision")

        def dec(v):
            return from_json(v, k=k, precision=prec)

        return GptSystem(
            str(data["name"]),
            int(data["dim"]),
            tuple(tuple(dec(x) for x in v) for v in data["pure_states"]),
            tuple(tuple(dec(x) for x in v) for v in data.get("effect_generators", [])),
            tuple(dec(x) for x in data["unit"]),
            k,
            prec,
            data.get("state_names"),
            data.get("effect_names"),
        )
    except KeyError as exc:
        raise InvalidSystemError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InvalidSystemError):
            raise
        raise InvalidSystemError(f"bad system data: {exc}") from None


def dump_system(sys: GptSystem) -> str:
    return json.dumps(system_to_dict(sys), indent=2, ensure_ascii=False)


def load_system(text: str) -> GptSystem:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSystemError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    return system_from_dict(data)
