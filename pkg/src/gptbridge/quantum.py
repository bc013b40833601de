"""Finite-dimensional quantum backend on numpy.

All comparisons use one tolerance ``TOL`` in the form
``|lhs - rhs| <= TOL * max(1, scale)``; verdicts are therefore marked
``CertifiedWithinPrecision`` rather than exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .numerics.scalars import Certainty
from .verdict import (
    ImpureInput,
    InputNotDistinguishable,
    LengthMismatch,
    NonOrthogonalInput,
    NonSpikyInput,
    NotNormalized,
    PureOnly,
    Verdict,
)

TOL = 1e-9


class QuantumError(ValueError):
    pass


def close(a, b, tol: float = TOL) -> bool:
    """Entrywise ``|a - b| <= tol * max(1, scale)`` on scalars or arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return bool(np.max(np.abs(a - b), initial=0.0) <= tol * scale)


def _matrix(x) -> np.ndarray:
    """Accept a ``DensityMatrix``, a square array, or a ket (outer product)."""
    if isinstance(x, DensityMatrix):
        return x.matrix
    a = np.asarray(x, dtype=complex)
    if a.ndim == 1:
        return np.outer(a, a.conj())
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise QuantumError(f"expected a square matrix, got shape {a.shape}")
    return a


def is_hermitian(a: np.ndarray) -> bool:
    return close(a, a.conj().T)


def is_psd(a: np.ndarray) -> bool:
    if not is_hermitian(a):
        return False
    ev = np.linalg.eigvalsh((a + a.conj().T) / 2)
    return bool(ev.min(initial=0.0) >= -TOL * max(1.0, float(np.abs(ev).max(initial=0.0))))


def is_projector(a: np.ndarray) -> bool:
    return is_hermitian(a) and close(a @ a, a)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root via Hermitian eigendecomposition; eigenvalues below ``-TOL`` are an error."""
    h = (a + a.conj().T) / 2
    ev, vecs = np.linalg.eigh(h)
    if ev.min(initial=0.0) < -TOL:
        raise QuantumError(f"operator is not positive semidefinite (eigenvalue {ev.min():.3g})")
    ev = np.clip(ev, 0.0, None)
    return (vecs * np.sqrt(ev)) @ vecs.conj().T


def _rank(a: np.ndarray) -> int:
    ev = np.linalg.eigvalsh((a + a.conj().T) / 2)
    return int(np.sum(ev > TOL * max(1.0, float(np.abs(ev).max(initial=0.0)))))


def _range_basis(a: np.ndarray, level: float | None = None) -> np.ndarray:
    """Orthonormal columns spanning the eigenspace above ``TOL`` (or near ``level``)."""
    ev, vecs = np.linalg.eigh((a + a.conj().T) / 2)
    if level is None:
        keep = ev > TOL
    else:
        keep = np.abs(ev - level) <= TOL
    return vecs[:, keep]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QuantumError("density matrix must be square")
        if not is_psd(m):
            raise QuantumError("density matrix must be Hermitian and positive semidefinite")
        if not close(np.trace(m), 1.0):
            raise QuantumError(f"density matrix trace is {np.trace(m).real:.12g}, not 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, ket) -> "DensityMatrix":
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix))

    def mix(self, other: "DensityMatrix", t: float) -> "DensityMatrix":
        return DensityMatrix(t * self.matrix + (1 - t) * other.matrix)


@dataclass(frozen=True, eq=False)
class Povm:
    elements: tuple

    def __post_init__(self):
        els = tuple(np.array(e, dtype=complex) for e in self.elements)
        if not els:
            raise QuantumError("a POVM needs at least one element")
        d = els[0].shape[0]
        for i, e in enumerate(els):
            if e.shape != (d, d):
                raise QuantumError(f"element {i} has shape {e.shape}, expected {(d, d)}")
            if not is_psd(e):
                raise QuantumError(f"element {i} is not positive semidefinite")
        if not close(sum(els), np.eye(d)):
            raise QuantumError("POVM elements do not sum to the identity")
        for e in els:
            e.setflags(write=False)
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, y) -> np.ndarray:
        return self.elements[y]

    def probabilities(self, rho) -> list[float]:
        return [born(P, rho) for P in self.elements]


def is_povm(elements: Sequence, dim: int | None = None) -> bool:
    try:
        m = Povm(tuple(_matrix(e) for e in elements))
    except QuantumError:
        return False
    return dim is None or m.dim == dim


def born(P, rho) -> float:
    """``Tr[P rho]``, checked real and inside ``[0, 1]`` up to ``TOL`` then clamped."""
    P = _matrix(P)
    r = _matrix(rho)
    if P.shape != r.shape:
        raise QuantumError(f"dimension mismatch: effect {P.shape} vs state {r.shape}")
    v = complex(np.trace(P @ r))
    if abs(v.imag) > TOL:
        raise QuantumError(f"Born probability has imaginary part {v.imag:.3g}")
    p = v.real
    if p < -TOL or p > 1 + TOL:
        raise QuantumError(f"Born probability {p:.12g} outside [0, 1]")
    return min(1.0, max(0.0, p))


def behavior_from_quantum(rho, povms: Sequence[Sequence[Povm]]):
    """``p(y|x) = Tr[(P^{1,x_1}_{y_1} ⊗ ... ⊗ P^{N,x_N}_{y_N}) rho]``."""
    from .nonlocality import Behavior

    r = _matrix(rho)
    inputs, outputs, dims = [], [], []
    for i, party in enumerate(povms):
        sizes = {len(m) for m in party}
        ds = {m.dim for m in party}
        if not party or len(sizes) != 1 or len(ds) != 1:
            raise QuantumError(f"party {i}: POVMs must share dimension and outcome count")
        inputs.append(len(party))
        outputs.append(sizes.pop())
        dims.append(ds.pop())
    if int(np.prod(dims)) != r.shape[0]:
        raise QuantumError(f"state dimension {r.shape[0]} != product of local dimensions {dims}")

    def p(y, x):
        op = np.ones((1, 1), dtype=complex)
        for i, (xi, yi) in enumerate(zip(x, y)):
            op = np.kron(op, povms[i][xi][yi])
        return born(op, r)

    return Behavior.from_function(inputs, outputs, p)


def is_projective(m: Povm) -> bool:
    els = m.elements
    if not all(is_projector(P) for P in els):
        return False
    return all(close(els[a] @ els[b], 0) for a, b in combinations(range(len(els)), 2))


# -- Naimark dilation -----------------------------------------------------------------

def complete_orthonormal(columns: np.ndarray, dim: int) -> np.ndarray:
    """Extend orthonormal columns to a basis by modified Gram-Schmidt with re-orthogonalization."""
    basis = [columns[:, j] for j in range(columns.shape[1])]
    for k in range(dim):
        if len(basis) == dim:
            break
        v = np.zeros(dim, dtype=complex)
        v[k] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        n = np.linalg.norm(v)
        if n > 1e-6:
            basis.append(v / n)
    if len(basis) != dim:
        raise QuantumError("basis completion failed")
    return np.column_stack(basis)


@dataclass(frozen=True, eq=False)
class NaimarkDilation:
    """Projective measurement on system ⊗ ancilla reproducing a POVM with ancilla state ``|0>``."""

    ancilla_dim: int
    ancilla_state: np.ndarray
    projectors: tuple
    unitary: np.ndarray

    @property
    def dim(self) -> int:
        return self.unitary.shape[0] // self.ancilla_dim

    def extend(self, rho) -> np.ndarray:
        return np.kron(_matrix(rho), np.outer(self.ancilla_state, self.ancilla_state.conj()))

    def probability(self, y: int, rho) -> float:
        return born(self.projectors[y], self.extend(rho))

    def measurement(self) -> Povm:
        return Povm(self.projectors)


def naimark_dilate(m: Povm) -> NaimarkDilation:
    d, n = m.dim, len(m)
    roots = [psd_sqrt(P) for P in m.elements]
    # isometry V|j> = sum_y sqrt(P_y)|j> ⊗ |y>, index (i, y) -> i*n + y
    V = np.zeros((d * n, d), dtype=complex)
    for y, R in enumerate(roots):
        V[y::n, :] = R
    if not close(V.conj().T @ V, np.eye(d)):
        raise QuantumError("dilation isometry is not isometric")
    full = complete_orthonormal(V, d * n)
    U = np.zeros((d * n, d * n), dtype=complex)
    first = [j * n for j in range(d)]
    rest = [k for k in range(d * n) if k % n != 0]
    U[:, first] = full[:, :d]
    U[:, rest] = full[:, d:]
    projectors = []
    for y in range(n):
        anc = np.zeros((n, n), dtype=complex)
        anc[y, y] = 1.0
        Py = np.kron(np.eye(d), anc)
        projectors.append(U.conj().T @ Py @ U)
    ket0 = np.zeros(n, dtype=complex)
    ket0[0] = 1.0
    return NaimarkDilation(n, ket0, tuple(projectors), U)


def tomographic_frame(dim: int) -> list[DensityMatrix]:
    """Pure states spanning the Hermitian matrices: ``|j>``, ``|j>+|k>``, ``|j>+i|k>``."""
    out = []
    eye = np.eye(dim, dtype=complex)
    for j in range(dim):
        out.append(DensityMatrix.pure(eye[j]))
    for j, k in combinations(range(dim), 2):
        out.append(DensityMatrix.pure(eye[j] + eye[k]))
        out.append(DensityMatrix.pure(eye[j] + 1j * eye[k]))
    return out


def naimark_reproduces(m: Povm, dil: NaimarkDilation, states=None) -> bool:
    states = states if states is not None else tomographic_frame(m.dim)
    return all(abs(born(P, rho) - dil.probability(y, rho)) <= TOL
               for rho in states for y, P in enumerate(m.elements))


# -- instruments ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Instrument:
    dim_in: int
    dim_out: int
    kraus: tuple  # per outcome, a tuple of Kraus operators
    deterministic: bool = True

    def __post_init__(self):
        total = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for ops in self.kraus:
            for K in ops:
                if K.shape != (self.dim_out, self.dim_in):
                    raise QuantumError(f"Kraus operator has shape {K.shape}")
                total = total + K.conj().T @ K
        if not is_psd(np.eye(self.dim_in) - total):
            raise QuantumError("instrument is not trace non-increasing")
        if self.deterministic and not close(total, np.eye(self.dim_in)):
            raise QuantumError("deterministic instrument must be trace preserving")

    def effect(self, y: int) -> np.ndarray:
        """The outcome effect ``(u| T_y = sum_k K^dag K``."""
        return sum(K.conj().T @ K for K in self.kraus[y])

    def apply(self, y: int, rho) -> np.ndarray:
        """Unnormalized post-measurement state for outcome ``y``."""
        r = _matrix(rho)
        return sum(K @ r @ K.conj().T for K in self.kraus[y])

    def outcomes(self, rho) -> list[tuple[float, np.ndarray | None]]:
        out = []
        for y in range(len(self.kraus)):
            s = self.apply(y, rho)
            p = float(np.trace(s).real)
            out.append((p, s / p if p > TOL else None))
        return out


def luders_binary_test(P) -> Instrument:
    P = _matrix(P)
    if not is_projector(P):
        raise QuantumError("Lüders test needs a projector")
    d = P.shape[0]
    return Instrument(d, d, ((P,), (np.eye(d) - P,)))


def sequential_discriminator(projectors: Sequence) -> Povm:
    """Apply the binary tests ``{P_y, I - P_y}`` in order and stop at the first success.

    Outcome ``m`` has Kraus operator ``P_m (I - P_{m-1}) ... (I - P_1)``.  When the
    projectors do not sum to the identity, a final outcome collects the event that
    every test failed.
    """
    Ps = [_matrix(P) for P in projectors]
    if not Ps:
        raise QuantumError("need at least one projector")
    d = Ps[0].shape[0]
    for i, P in enumerate(Ps):
        if not is_projector(P):
            raise QuantumError(f"element {i} is not a projector")
    for a, b in combinations(range(len(Ps)), 2):
        if not close(Ps[a] @ Ps[b], 0):
            raise NonOrthogonalInput(f"projectors {a} and {b} are not orthogonal")
    tests = [luders_binary_test(P) for P in Ps]
    failed = np.eye(d, dtype=complex)
    effects = []
    for t in tests:
        (K_pass,), (K_fail,) = t.kraus
        K = K_pass @ failed
        effects.append(K.conj().T @ K)
        failed = K_fail @ failed
    rest = failed.conj().T @ failed
    if not close(rest, 0):
        effects.append(rest)
    return Povm(tuple(effects))


def discrimination_matrix(m: Povm, states: Sequence) -> np.ndarray:
    """``D[m, n] = Tr[S_m rho_n]``."""
    return np.array([[born(S, rho) for rho in states] for S in m.elements])


def pq_weight(h, assignment, rho):
    """Weight ``w(y) = Tr[P_y rho]`` from one projector per vertex; each hyperedge must be projective."""
    from .contextual import HypergraphError, ProbabilityWeight

    ops = {v: _matrix(assignment[v]) for v in h.vertices}
    for i, e in enumerate(h.edges):
        try:
            m = Povm(tuple(ops[v] for v in e))
        except QuantumError as exc:
            raise HypergraphError(f"hyperedge {i}: {exc}") from None
        if not is_projective(m):
            raise HypergraphError(f"hyperedge {i} is not a projective measurement")
    r = _matrix(rho)
    return ProbabilityWeight(h, {v: born(ops[v], r) for v in h.vertices})


# -- random generators -----------------------------------------------------------------

def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_povm(dim: int, outcomes: int, rng: np.random.Generator) -> Povm:
    """Normalize random PSD operators: ``P_y = S^{-1/2} A_y S^{-1/2}`` with ``S = sum A_y``."""
    raw = []
    for _ in range(outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw.append(g @ g.conj().T)
    S = sum(raw)
    ev, vecs = np.linalg.eigh(S)
    inv_root = (vecs / np.sqrt(ev)) @ vecs.conj().T
    return Povm(tuple(inv_root @ A @ inv_root for A in raw))


def random_orthogonal_projectors(dim: int, ranks: Sequence[int], rng: np.random.Generator) -> list[np.ndarray]:
    """Projectors onto disjoint blocks of columns of a random unitary."""
    if sum(ranks) > dim:
        raise ValueError("ranks exceed the dimension")
    U = random_unitary(dim, rng)
    out, start = [], 0
    for r in ranks:
        B = U[:, start:start + r]
        out.append(B @ B.conj().T)
        start += r
    return out


def random_state_in_range(P: np.ndarray, rng: np.random.Generator) -> DensityMatrix:
    B = _range_basis(P)
    k = B.shape[1]
    inner = random_density_matrix(k, rng).matrix
    return DensityMatrix(B @ inner @ B.conj().T)


# -- decision procedures on quantum systems ----------------------------------------------

@dataclass(frozen=True)
class QuantumSystem:
    """Marker system for the deciders: states are density matrices, effects operators."""

    dim: int
    name: str = field(default="")
    is_quantum = True

    def unit(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


def _qverdict(holds, witness=None, detail="") -> Verdict:
    return Verdict(bool(holds), witness, Certainty.CERTIFIED, detail=detail, extra={"tol": TOL})


def _check_effect(e: np.ndarray, sys: QuantumSystem, i: int = 0):
    if e.shape != (sys.dim, sys.dim):
        raise QuantumError(f"operator {i} has shape {e.shape}, expected {(sys.dim, sys.dim)}")
    if not is_psd(e) or not is_psd(np.eye(sys.dim) - e):
        raise QuantumError(f"operator {i} is not an effect (0 <= E <= I)")


def _effects(items, sys) -> list[np.ndarray]:
    out = [_matrix(e) for e in items]
    for i, e in enumerate(out):
        _check_effect(e, sys, i)
    return out


def _states(items, sys) -> list[np.ndarray]:
    out = []
    for i, s in enumerate(items):
        m = DensityMatrix(_matrix(s)).matrix
        if m.shape[0] != sys.dim:
            raise QuantumError(f"state {i} has dimension {m.shape[0]}, expected {sys.dim}")
        out.append(m)
    return out


def q_is_pure_effect(e, sys: QuantumSystem) -> Verdict:
    """Extreme rays of the positive cone are the rank-one operators."""
    (E,) = _effects([e], sys)
    r = _rank(E)
    return _qverdict(r == 1, {"rank": r}, "rank-one" if r == 1 else f"rank {r}")


def q_are_biorthogonal(effects, states, sys: QuantumSystem) -> Verdict:
    if len(effects) != len(states):
        raise LengthMismatch(f"{len(effects)} effects vs {len(states)} states")
    E = _effects(effects, sys)
    S = _states(states, sys)
    table = np.array([[born(m, r) for r in S] for m in E])
    ok = close(table, np.eye(len(E)))
    return _qverdict(ok, {"table": table})


def _state_for(E: list[np.ndarray], y: int, d: int):
    """A pure state with ``Tr[E_y rho] = 1`` and ``Tr[E_j rho] = 0`` for ``j != y``, if any."""
    ones = _range_basis(E[y], level=1.0)
    if ones.shape[1] == 0:
        return None
    # restrict the other effects to the eigenvalue-1 space and find a common kernel vector
    stack = [ones.conj().T @ E[j] @ ones for j in range(len(E)) if j != y]
    if not stack:
        return ones[:, 0]
    M = sum(stack)
    ev, vecs = np.linalg.eigh((M + M.conj().T) / 2)
    if ev[0] > TOL:
        return None
    return ones @ vecs[:, 0]


def q_is_orthogonal_effect_set(effects, sys: QuantumSystem) -> Verdict:
    E = _effects(effects, sys)
    states = []
    for y in range(len(E)):
        v = _state_for(E, y, sys.dim)
        if v is None:
            return _qverdict(False, {"failing_index": y},
                             f"no state gives 1 on effect {y} and 0 on the others")
        states.append(DensityMatrix.pure(v))
    return _qverdict(True, {"states": states})


def _supports_orthogonal(S: list[np.ndarray]):
    bases = [_range_basis(s) for s in S]
    for a, b in combinations(range(len(S)), 2):
        if not close(bases[a].conj().T @ bases[b], 0):
            return (a, b), bases
    return None, bases


def q_are_states_orthogonal(states, sys: QuantumSystem) -> Verdict:
    """For each ``y`` an effect ``E`` with ``Tr[E rho_y'] = delta``: possible iff supports are orthogonal."""
    S = _states(states, sys)
    bad, bases = _supports_orthogonal(S)
    if bad is not None:
        return _qverdict(False, {"pair": bad}, f"states {bad[0]} and {bad[1]} have overlapping supports")
    return _qverdict(True, {"effects": [B @ B.conj().T for B in bases]})


def q_perfectly_distinguishable(states, sys: QuantumSystem) -> Verdict:
    S = _states(states, sys)
    bad, bases = _supports_orthogonal(S)
    if bad is not None:
        return _qverdict(False, {"pair": bad}, "supports overlap")
    projs = [B @ B.conj().T for B in bases]
    rest = np.eye(sys.dim) - sum(projs)
    projs[-1] = projs[-1] + rest
    return _qverdict(True, {"measurement": Povm(tuple(projs))})


def _completion(E: list[np.ndarray], sys: QuantumSystem):
    rest = np.eye(sys.dim) - sum(E)
    ev, vecs = np.linalg.eigh((rest + rest.conj().T) / 2)
    if ev[0] >= -TOL:
        return True, {"rest": rest, "measurement": list(E) + [rest]}
    v = vecs[:, 0]
    return False, {"rest": rest, "state": DensityMatrix.pure(v),
                   "total_probability": 1.0 - float(ev[0])}


def q_sufficient_orthogonality(effects, sys: QuantumSystem) -> Verdict:
    E = _effects(effects, sys)
    for i, e in enumerate(E):
        if _rank(e) != 1:
            raise ImpureInput(f"effect {i} is not pure")
    orth = q_is_orthogonal_effect_set(E, sys)
    if not orth:
        raise NonOrthogonalInput(orth.detail)
    holds, witness = _completion(E, sys)
    return _qverdict(holds, witness)


def q_mutually_exclusive(effects, sys: QuantumSystem) -> Verdict:
    E = _effects(effects, sys)
    for i, j in combinations(range(len(E)), 2):
        holds, witness = _completion([E[i], E[j]], sys)
        if not holds:
            witness["pair"] = (i, j)
            return _qverdict(False, witness)
    return _qverdict(True)


def q_coexist_spiky(effects, sys: QuantumSystem) -> Verdict:
    """Spiky quantum effects are projectors."""
    E = _effects(effects, sys)
    for i, e in enumerate(E):
        if not is_projector(e):
            raise NonSpikyInput(f"effect {i} is not a projector")
    exclusive = q_mutually_exclusive(E, sys)
    holds, witness = _completion(E, sys)
    witness["mutually_exclusive"] = exclusive.holds
    return _qverdict(holds, witness)


def q_identifies_pure_state(e, sys: QuantumSystem) -> Verdict:
    (E,) = _effects([e], sys)
    ones = _range_basis(E, level=1.0)
    k = ones.shape[1]
    if k == 0:
        raise NotNormalized("no state gives probability 1")
    if k == 1:
        return _qverdict(True, {"state": DensityMatrix.pure(ones[:, 0])})
    return _qverdict(False, {"face_dim": k}, f"eigenvalue-1 space has dimension {k}")


def q_is_maximal_distinguishable_set(states, sys: QuantumSystem) -> Verdict:
    S = _states(states, sys)
    if not q_perfectly_distinguishable(S, sys):
        raise InputNotDistinguishable("input states are not perfectly distinguishable")
    covered = sum(_rank(s) for s in S)
    if covered < sys.dim:
        B = np.column_stack([_range_basis(s) for s in S])
        comp = complete_orthonormal(B, sys.dim)[:, B.shape[1]]
        return _qverdict(False, {"extension": DensityMatrix.pure(comp)},
                         "supports do not span the space")
    return _qverdict(True)


def q_is_extremal_effect(e, sys: QuantumSystem) -> Verdict:
    """Extreme points of ``[0, I]`` are the projectors."""
    (E,) = _effects([e], sys)
    return _qverdict(is_projector(E))


def q_is_sharp_pure_measurement(m, sys: QuantumSystem) -> Verdict:
    E = _effects(m.elements if isinstance(m, Povm) else m, sys)
    for i, e in enumerate(E):
        if _rank(e) != 1:
            raise PureOnly(f"effect {i} is not pure; sharpness is only decided for pure measurements")
    orth = q_is_orthogonal_effect_set(E, sys)
    if not orth:
        return orth
    states = orth.witness["states"]
    return _qverdict(True, {"states": states,
                            "measure_and_prepare": list(zip(E, states))})
