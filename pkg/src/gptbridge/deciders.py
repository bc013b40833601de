"""Decision procedures for purity, orthogonality, distinguishability and coexistence.

Every predicate is settled by exact linear programming or exact finite checks on
the generators of a :class:`~gptbridge.gpt.GptSystem`.  Coexistence questions
are answered in one of two modes:

* ``"no-restriction"``: a family coexists iff ``u - sum`` is a valid effect,
  i.e. lies in ``[0, 1]`` on every pure state;
* ``"restricted"``: effects must be conic combinations of the listed
  ``effect_generators``, and so must the completing rest effect.

Passing a :class:`~gptbridge.quantum.QuantumSystem` instead of a ``GptSystem``
delegates to the floating-point quantum backend.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .gpt import (
    Effect,
    GptSystem,
    Measurement,
    State,
    dot,
    in_cone,
    is_valid_effect,
    pair,
    sum_effects,
    vec_scale,
    vec_sub,
)
from .numerics.linalg import nullspace, rank, solve
from .numerics.lp import LinearProgram, LpBuilder, lp_feasible
from .numerics.scalars import Certainty, IntervalScalar, certainty_of, sign
from .verdict import (
    FacetEnumerationRefused,
    ImpureInput,
    InputNotDistinguishable,
    LengthMismatch,
    NonOrthogonalInput,
    NonSpikyInput,
    NotNormalized,
    PureOnly,
    Verdict,
)

NO_RESTRICTION = "no-restriction"
RESTRICTED = "restricted"
_MODES = (NO_RESTRICTION, RESTRICTED)

FACET_ENUMERATION_MAX_DIM = 4


def _is_quantum(sys) -> bool:
    return getattr(sys, "is_quantum", False)


def _check_mode(mode: str):
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {_MODES}")


def _cert(sys: GptSystem, *groups) -> tuple[Certainty, int | None]:
    values = list(sys._entries())
    for g in groups:
        for item in g:
            values.extend(item.coords if hasattr(item, "coords") else item)
    c = certainty_of(values)
    if c == Certainty.EXACT:
        return c, None
    precs = [v.precision for v in values if isinstance(v, IntervalScalar)]
    return c, (min(precs) if precs else sys.precision)


def _verdict(sys, holds, witness=None, *, groups=(), mode=None, detail="", **extra) -> Verdict:
    certainty, precision = _cert(sys, *groups)
    return Verdict(bool(holds), witness, certainty, mode, detail, precision, extra)


def _coords(x):
    return x.coords if hasattr(x, "coords") else tuple(x)


def _as_effects(sys: GptSystem, effects) -> list[Effect]:
    return [e if isinstance(e, Effect) else Effect(sys, e) for e in effects]


def _as_states(sys: GptSystem, states) -> list[State]:
    return [s if isinstance(s, State) else State(sys, s) for s in states]


def _require_deterministic(states: Sequence[State]):
    for i, s in enumerate(states):
        if not s.is_deterministic:
            raise ValueError(f"state {i} is not deterministic ((u|rho) != 1)")


def parallel(a: Sequence, b: Sequence) -> bool:
    """True iff ``a = t * b`` for some ``t > 0``."""
    ratio = None
    for x, y in zip(a, b):
        sx, sy = sign(x), sign(y)
        if sx == 0 and sy == 0:
            continue
        if sx == 0 or sy == 0 or sx != sy:
            return False
        r = x / y
        if ratio is None:
            ratio = r
        elif sign(r - ratio) != 0:
            return False
    return ratio is not None


# -- effect cone -----------------------------------------------------------------

def effect_cone_rays(sys: GptSystem) -> list[tuple]:
    """Extreme rays of the cone of positive functionals on the state cone.

    Obtained by exhaustive search over ``dim - 1`` subsets of pure states; only
    attempted for ``dim <= 4``.
    """
    d = sys.dim
    if d > FACET_ENUMERATION_MAX_DIM:
        raise FacetEnumerationRefused(
            f"facet enumeration is limited to dim <= {FACET_ENUMERATION_MAX_DIM}; "
            "supply effect_generators explicitly")
    if d == 1:
        return [sys.unit]
    rays: list[tuple] = []
    for subset in combinations(sys.pure_states, d - 1):
        ns = nullspace([list(s) for s in subset], d)
        if len(ns) != 1:
            continue
        v = tuple(ns[0])
        vals = [sign(dot(v, phi)) for phi in sys.pure_states]
        if all(x >= 0 for x in vals):
            cand = v
        elif all(x <= 0 for x in vals):
            cand = tuple(-x for x in v)
        else:
            continue
        if all(x == 0 for x in vals):
            continue
        top = max((dot(cand, phi) for phi in sys.pure_states), key=float)
        cand = vec_scale(1 / top, cand)
        if not any(parallel(cand, r) for r in rays):
            rays.append(cand)
    return rays


def effect_generators_of(sys: GptSystem) -> list[tuple]:
    if sys.effect_generators:
        return list(sys.effect_generators)
    return effect_cone_rays(sys) + [sys.unit]


def _valid_in_mode(e_coords, sys: GptSystem, mode: str) -> bool:
    return is_valid_effect(Effect(sys, e_coords), mode)


def _violating_state(e_coords, sys: GptSystem):
    """Index of a pure state where ``e`` leaves [0,1], with the offending value."""
    for i, phi in enumerate(sys.pure_states):
        v = dot(e_coords, phi)
        if sign(v) < 0 or sign(v - 1) > 0:
            return i, v
    return None


# -- purity ------------------------------------------------------------------------

def is_pure_effect(e, sys) -> Verdict:
    """Extreme-ray membership of the effect cone."""
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_is_pure_effect(e, sys)
    e = _as_effects(sys, [e])[0]
    if e.is_zero():
        return _verdict(sys, False, None, groups=[[e]], detail="zero effect")
    gens = effect_generators_of(sys)
    if in_cone(e.coords, gens) is None:
        return _verdict(sys, False, None, groups=[[e]], detail="outside the effect cone")
    others = [g for g in gens if not parallel(g, e.coords)]
    coeffs = in_cone(e.coords, others) if others else None
    if coeffs is None:
        return _verdict(sys, True, {"ray": e.coords}, groups=[[e]],
                        detail="extreme ray of the effect cone")
    decomposition = [(others[i], c) for i, c in enumerate(coeffs) if sign(c) != 0]
    return _verdict(sys, False, {"decomposition": decomposition}, groups=[[e]],
                    detail="conic combination of non-parallel generators")


# -- orthogonality -------------------------------------------------------------------

def are_biorthogonal(effects, states, sys=None) -> Verdict:
    if len(effects) != len(states):
        raise LengthMismatch(f"{len(effects)} effects vs {len(states)} states")
    if sys is not None and _is_quantum(sys):
        from . import quantum
        return quantum.q_are_biorthogonal(effects, states, sys)
    if sys is None:
        sys = effects[0].system if effects else states[0].system
    effects = _as_effects(sys, effects)
    states = _as_states(sys, states)
    table = [[pair(m, r) for r in states] for m in effects]
    for y, row in enumerate(table):
        for yp, v in enumerate(row):
            if sign(v - (1 if y == yp else 0)) != 0:
                return _verdict(sys, False, {"index": (y, yp), "value": v, "table": table},
                                groups=[effects, states])
    return _verdict(sys, True, {"table": table}, groups=[effects, states])


def _state_lp(sys: GptSystem, rows: list[tuple[tuple, object]]):
    """Find a deterministic state with prescribed pairings ``(coords, target)``."""
    n = len(sys.pure_states)
    A = [[Fraction(1)] * n]
    b = [Fraction(1)]
    for coords, target in rows:
        A.append([dot(coords, phi) for phi in sys.pure_states])
        b.append(target)
    ok, res = lp_feasible(LinearProgram(n, None, A, b))
    if not ok:
        return None
    coords = (Fraction(0),) * sys.dim
    for lam, phi in zip(res, sys.pure_states):
        if sign(lam) != 0:
            coords = tuple(c + lam * p for c, p in zip(coords, phi))
    return State(sys, coords), res


def is_orthogonal_effect_set(effects, sys) -> Verdict:
    """Search, for each ``y``, a state with ``(m_y|rho_y) = 1`` and ``(m_y'|rho_y) = 0``."""
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_is_orthogonal_effect_set(effects, sys)
    effects = _as_effects(sys, effects)
    witness = []
    for y, m in enumerate(effects):
        rows = [(x.coords, 1 if i == y else 0) for i, x in enumerate(effects)]
        found = _state_lp(sys, rows)
        if found is None:
            return _verdict(sys, False, {"failing_index": y}, groups=[effects],
                            detail=f"no state gives 1 on effect {y} and 0 on the others")
        witness.append(found[0])
    return _verdict(sys, True, {"states": witness}, groups=[effects])


def _effect_lp_rows(sys: GptSystem, mode: str, count: int, b: LpBuilder):
    """Allocate ``count`` effect variables; returns accessors for their coordinates."""
    d = sys.dim
    gens = effect_generators_of(sys) if mode == RESTRICTED else None
    blocks = []
    for _ in range(count):
        if mode == NO_RESTRICTION:
            idx = b.add_vars(d, free=True)
            blocks.append(("coords", idx))
            for phi in sys.pure_states:
                b.add_ge({i: phi[k] for k, i in enumerate(idx)}, 0)
        else:
            idx = b.add_vars(len(gens))
            blocks.append(("cone", idx))
    return blocks, gens


def _pairing_coeffs(block, gens, vector):
    kind, idx = block
    if kind == "coords":
        return {i: vector[k] for k, i in enumerate(idx)}
    return {i: dot(gens[k], vector) for k, i in enumerate(idx)}


def _coord_coeffs(block, gens, axis):
    kind, idx = block
    if kind == "coords":
        return {idx[axis]: Fraction(1)}
    return {i: gens[k][axis] for k, i in enumerate(idx)}


def _block_value(block, gens, x, d):
    kind, idx = block
    if kind == "coords":
        return tuple(x[i] for i in idx)
    out = (Fraction(0),) * d
    for k, i in enumerate(idx):
        if sign(x[i]) != 0:
            out = tuple(o + x[i] * g for o, g in zip(out, gens[k]))
    return out


def _add_sum_constraint(b: LpBuilder, blocks, gens, target, d):
    for axis in range(d):
        coeffs: dict = {}
        for blk in blocks:
            for i, c in _coord_coeffs(blk, gens, axis).items():
                coeffs[i] = coeffs.get(i, 0) + c
        b.add_eq(coeffs, target[axis])


def are_states_orthogonal(states, sys, mode: str = NO_RESTRICTION) -> Verdict:
    """For each ``y``, search a valid effect with ``(m|rho_y') = delta``."""
    _check_mode(mode)
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_are_states_orthogonal(states, sys)
    states = _as_states(sys, states)
    _require_deterministic(states)
    d = sys.dim
    witness = []
    for y in range(len(states)):
        b = LpBuilder()
        blocks, gens = _effect_lp_rows(sys, mode, 1, b)
        (blk,) = blocks
        for yp, r in enumerate(states):
            b.add_eq(_pairing_coeffs(blk, gens, r.coords), 1 if yp == y else 0)
        if mode == NO_RESTRICTION:
            for phi in sys.pure_states:
                b.add_le(_pairing_coeffs(blk, gens, phi), 1)
        else:
            rest = b.add_vars(len(gens))
            blocks2 = [blk, ("cone", rest)]
            _add_sum_constraint(b, blocks2, gens, sys.unit, d)
        ok, x = lp_feasible(b.build())
        if not ok:
            return _verdict(sys, False, {"failing_index": y}, groups=[states], mode=mode,
                            detail=f"no valid effect separates state {y} from the others")
        witness.append(Effect(sys, _block_value(blk, gens, x, d)))
    return _verdict(sys, True, {"effects": witness}, groups=[states], mode=mode)


def perfectly_distinguishable(states, sys, mode: str = NO_RESTRICTION) -> Verdict:
    """One joint LP for a measurement ``{m_y}`` with ``(m_y|rho_y') = delta``."""
    _check_mode(mode)
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_perfectly_distinguishable(states, sys)
    states = _as_states(sys, states)
    _require_deterministic(states)
    d = sys.dim
    b = LpBuilder()
    blocks, gens = _effect_lp_rows(sys, mode, len(states), b)
    _add_sum_constraint(b, blocks, gens, sys.unit, d)
    for y, blk in enumerate(blocks):
        for yp, r in enumerate(states):
            b.add_eq(_pairing_coeffs(blk, gens, r.coords), 1 if y == yp else 0)
    ok, x = lp_feasible(b.build())
    if not ok:
        return _verdict(sys, False, {"certificate": x}, groups=[states], mode=mode,
                        detail="no measurement discriminates the states")
    effects = [Effect(sys, _block_value(blk, gens, x, d)) for blk in blocks]
    return _verdict(sys, True, {"measurement": Measurement(sys, effects)}, groups=[states],
                    mode=mode)


# -- coexistence ---------------------------------------------------------------------

def _completion(effects: list[Effect], sys: GptSystem, mode: str):
    """``(holds, witness)`` for the question whether ``effects`` extend to a measurement."""
    total = sum_effects(effects, sys)
    rest = sys.unit_effect() - total
    if mode == NO_RESTRICTION:
        bad = _violating_state(rest.coords, sys)
        if bad is None:
            return True, {"rest": rest, "measurement": list(effects) + [rest]}
        i, v = bad
        return False, {
            "rest": rest,
            "state_index": i,
            "state": sys.state_label(i),
            "total_probability": pair(total, sys.state(i)),
            "rest_value": v,
        }
    coeffs = in_cone(rest.coords, effect_generators_of(sys))
    if coeffs is not None:
        return True, {"rest": rest, "measurement": list(effects) + [rest]}
    return False, {"rest": rest, "detail": "rest effect outside the effect cone"}


def sufficient_orthogonality(effects, sys, mode: str = NO_RESTRICTION) -> Verdict:
    """Do the given pure orthogonal effects coexist in one measurement?"""
    _check_mode(mode)
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_sufficient_orthogonality(effects, sys)
    effects = _as_effects(sys, effects)
    for i, e in enumerate(effects):
        if not is_pure_effect(e, sys):
            raise ImpureInput(f"effect {i} is not pure")
    orth = is_orthogonal_effect_set(effects, sys)
    if not orth:
        raise NonOrthogonalInput(orth.detail or "effects are not orthogonal")
    holds, witness = _completion(effects, sys, mode)
    witness["orthogonality_states"] = orth.witness["states"]
    return _verdict(sys, holds, witness, groups=[effects], mode=mode)


def mutually_exclusive(effects, sys, mode: str = NO_RESTRICTION) -> Verdict:
    """Every pair coexists in some measurement."""
    _check_mode(mode)
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_mutually_exclusive(effects, sys)
    effects = _as_effects(sys, effects)
    for i, e in enumerate(effects):
        if not is_valid_effect(e, mode):
            raise ValueError(f"effect {i} is not a valid effect")
    for i, j in combinations(range(len(effects)), 2):
        holds, witness = _completion([effects[i], effects[j]], sys, mode)
        if not holds:
            witness["pair"] = (i, j)
            return _verdict(sys, False, witness, groups=[effects], mode=mode)
    return _verdict(sys, True, None, groups=[effects], mode=mode)


def is_spiky_effect(e, sys, spikes=None) -> bool:
    """Pure effects, or declared sums of pure orthogonal effects."""
    if spikes is None:
        return bool(is_pure_effect(e, sys))
    spikes = _as_effects(sys, spikes)
    if not spikes or not all(is_pure_effect(s, sys) for s in spikes):
        return False
    if not is_orthogonal_effect_set(spikes, sys):
        return False
    return sum_effects(spikes, sys) == _as_effects(sys, [e])[0]


def coexist_mutually_exclusive_spiky(effects, sys, spikes=None,
                                     mode: str = NO_RESTRICTION) -> Verdict:
    """Does the whole family complete to one measurement?

    ``spikes[i]``, when given and not ``None``, declares effect ``i`` as the sum
    of the listed pure orthogonal effects; otherwise effect ``i`` must be pure.
    """
    _check_mode(mode)
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_coexist_spiky(effects, sys)
    effects = _as_effects(sys, effects)
    spikes = spikes or [None] * len(effects)
    for i, (e, sp) in enumerate(zip(effects, spikes)):
        if not is_spiky_effect(e, sys, sp):
            raise NonSpikyInput(f"effect {i} is neither pure nor a declared spiky coarse-graining")
    exclusive = mutually_exclusive(effects, sys, mode)
    holds, witness = _completion(effects, sys, mode)
    witness["mutually_exclusive"] = exclusive.holds
    return _verdict(sys, holds, witness, groups=[effects], mode=mode)


# -- identification, maximality, extremality, sharpness --------------------------------

def identifies_pure_state(e, sys) -> Verdict:
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_identifies_pure_state(e, sys)
    e = _as_effects(sys, [e])[0]
    if not is_valid_effect(e):
        raise ValueError("effect is not valid")
    face = [i for i, phi in enumerate(sys.pure_states) if sign(dot(e.coords, phi) - 1) == 0]
    if not face:
        raise NotNormalized("no state gives probability 1")
    if len(face) == 1:
        return _verdict(sys, True, {"state_index": face[0], "state": sys.state(face[0])},
                        groups=[[e]])
    return _verdict(sys, False, {"face": face}, groups=[[e]],
                    detail=f"{len(face)} pure states attain probability 1")


def is_maximal_distinguishable_set(states, sys, mode: str = NO_RESTRICTION) -> Verdict:
    """No pure state can be added while keeping the set perfectly distinguishable."""
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_is_maximal_distinguishable_set(states, sys)
    states = _as_states(sys, states)
    if not perfectly_distinguishable(states, sys, mode):
        raise InputNotDistinguishable("input states are not perfectly distinguishable")
    for i in range(len(sys.pure_states)):
        cand = sys.state(i)
        if any(cand == s for s in states):
            continue
        ext = perfectly_distinguishable(states + [cand], sys, mode)
        if ext:
            return _verdict(sys, False, {"extension_index": i, "extension": sys.state_label(i),
                                         "measurement": ext.witness["measurement"]},
                            groups=[states], mode=mode)
    return _verdict(sys, True, None, groups=[states], mode=mode)


def is_extremal_effect(e, sys) -> Verdict:
    """Vertex test of the truncated polytope ``{f : 0 <= (f|phi) <= 1}``."""
    if _is_quantum(sys):
        from . import quantum
        return quantum.q_is_extremal_effect(e, sys)
    e = _as_effects(sys, [e])[0]
    if not is_valid_effect(e):
        raise ValueError("effect is not valid")
    tight = []
    for phi in sys.pure_states:
        v = dot(e.coords, phi)
        if sign(v) == 0 or sign(v - 1) == 0:
            tight.append(list(phi))
    r = rank(tight) if tight else 0
    return _verdict(sys, r == sys.dim, {"tight_rank": r, "tight_count": len(tight)},
                    groups=[[e]])


def is_sharp_pure_measurement(m, sys=None) -> Verdict:
    """For pure measurements sharpness coincides with orthogonality."""
    if sys is not None and _is_quantum(sys):
        from . import quantum
        return quantum.q_is_sharp_pure_measurement(m, sys)
    effects = list(m.effects) if isinstance(m, Measurement) else list(m)
    sys = sys if sys is not None else effects[0].system
    effects = _as_effects(sys, effects)
    for i, e in enumerate(effects):
        if not is_pure_effect(e, sys):
            raise PureOnly(f"effect {i} is not pure; sharpness is only decided for pure measurements")
    orth = is_orthogonal_effect_set(effects, sys)
    if not orth:
        return orth
    states = orth.witness["states"]
    return _verdict(sys, True, {
        "states": states,
        "measure_and_prepare": [(effects[y], states[y]) for y in range(len(effects))],
    }, groups=[effects])


# -- whole-system sweeps ------------------------------------------------------------

def orthogonal_pure_sets(sys: GptSystem, min_size: int = 2):
    """Yield index tuples of orthogonal subsets of the pure effects, smallest first."""
    pure = [i for i, g in enumerate(sys.effect_generators)
            if i != sys.unit_generator_index() and is_pure_effect(Effect(sys, g), sys)]
    level = [(i,) for i in pure]
    size = 1
    while level:
        if size >= min_size:
            yield from level
        nxt = []
        known = set(level)
        for combo in level:
            for j in pure:
                if j <= combo[-1]:
                    continue
                cand = combo + (j,)
                if all(tuple(c for c in cand if c != drop) in known for drop in cand[:-1]):
                    if is_orthogonal_effect_set([sys.effect(i) for i in cand], sys):
                        nxt.append(cand)
        level = nxt
        size += 1


def system_sufficient_orthogonality(sys: GptSystem, mode: str = NO_RESTRICTION) -> Verdict:
    """SO for every orthogonal set of listed pure effects; witness is the first failing set."""
    checked = 0
    for combo in orthogonal_pure_sets(sys):
        checked += 1
        v = sufficient_orthogonality([sys.effect(i) for i in combo], sys, mode)
        if not v:
            return Verdict(False, {"effects": [sys.effect_label(i) for i in combo],
                                   "indices": combo, **v.witness},
                           v.certainty, mode, "orthogonal pure set fails to coexist",
                           v.precision, {"sets_checked": checked})
    certainty, precision = _cert(sys)
    return Verdict(True, None, certainty, mode, "", precision, {"sets_checked": checked})


def pure_measurements(sys: GptSystem) -> list[Measurement]:
    """Measurements built from linearly independent sets of listed pure effects.

    Each independent set of rays ``r_i`` whose span contains the unit gives at most
    one measurement ``{c_i r_i}``; it is kept when every ``c_i`` is positive.
    """
    u = sys.unit_generator_index()
    rays = [g for i, g in enumerate(sys.effect_generators) if i != u]
    out = []
    for size in range(1, sys.dim + 1):
        for combo in combinations(rays, size):
            cols = [list(r) for r in combo]
            if rank(cols) != size:
                continue
            matrix = [[r[j] for r in combo] for j in range(sys.dim)]
            c = solve(matrix, list(sys.unit))
            if c is None or any(sign(x) <= 0 for x in c):
                continue
            out.append(Measurement(sys, [Effect(sys, vec_scale(x, r)) for x, r in zip(c, combo)]))
    return out
