"""Quantum backend: POVMs, Naimark dilation, instruments and quantum deciders."""

from __future__ import annotations

import numpy as np
import pytest

from gptbridge import deciders, quantum
from gptbridge.quantum import (DensityMatrix, Instrument, Povm, QuantumError, QuantumSystem, born,
                               discrimination_matrix, is_povm, is_projective, luders_binary_test,
                               naimark_dilate, naimark_reproduces, random_density_matrix,
                               random_orthogonal_projectors, random_povm, random_state_in_range,
                               sequential_discriminator)
from gptbridge.verdict import ImpureInput, InputNotDistinguishable, NonOrthogonalInput, PureOnly

Z = np.diag([1.0, 0.0])
ONE = np.diag([0.0, 1.0])
PLUS = np.full((2, 2), 0.5)


class TestBasics:
    def test_density_matrix_validation(self):
        with pytest.raises(QuantumError, match="trace"):
            DensityMatrix(np.eye(2))
        with pytest.raises(QuantumError, match="positive"):
            DensityMatrix(np.diag([1.5, -0.5]))
        assert DensityMatrix.maximally_mixed(3).dim == 3

    def test_povm_validation(self):
        assert is_povm([Z, ONE])
        assert not is_povm([Z, Z])
        assert not is_povm([Z, ONE], dim=3)
        with pytest.raises(QuantumError, match="element 1"):
            Povm((np.eye(2), -Z))

    def test_born_rule(self):
        assert born(PLUS, DensityMatrix.pure([1, 0])) == pytest.approx(0.5)
        with pytest.raises(QuantumError, match="dimension"):
            born(np.eye(3), DensityMatrix.pure([1, 0]))

    def test_projective(self):
        assert is_projective(Povm((Z, ONE)))
        assert not is_projective(Povm((Z / 2, Z / 2 + ONE)))


class TestNaimark:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_povm_is_reproduced(self, seed):
        rng = np.random.default_rng(seed)
        m = random_povm(int(rng.integers(2, 4)), int(rng.integers(2, 5)), rng)
        dil = naimark_dilate(m)
        assert is_projective(dil.measurement())
        assert np.allclose(dil.unitary.conj().T @ dil.unitary, np.eye(dil.unitary.shape[0]))
        states = [random_density_matrix(m.dim, rng) for _ in range(5)]
        assert naimark_reproduces(m, dil, states)
        assert naimark_reproduces(m, dil)

    def test_trine(self):
        kets = [np.array([np.cos(t), np.sin(t)]) for t in (0, 2 * np.pi / 3, 4 * np.pi / 3)]
        m = Povm(tuple(2 / 3 * np.outer(k, k) for k in kets))
        dil = naimark_dilate(m)
        assert dil.ancilla_dim == 3
        assert naimark_reproduces(m, dil)


class TestInstruments:
    def test_luders_test(self):
        t = luders_binary_test(Z)
        (p0, s0), (p1, s1) = t.outcomes(DensityMatrix.pure([1, 1]))
        assert p0 == pytest.approx(0.5) and np.allclose(s0, Z)
        assert np.allclose(t.effect(1), ONE)

    def test_rejects_trace_increasing(self):
        with pytest.raises(QuantumError, match="trace non-increasing"):
            Instrument(2, 2, ((np.eye(2),), (Z,)))
        with pytest.raises(QuantumError, match="trace preserving"):
            Instrument(2, 2, ((Z,),))
        Instrument(2, 2, ((Z,),), deterministic=False)

    def test_luders_needs_projector(self):
        with pytest.raises(QuantumError, match="projector"):
            luders_binary_test(PLUS / 2)


class TestSequentialDiscriminator:
    @pytest.mark.parametrize("seed", range(20))
    def test_discriminates_states_in_ranges(self, seed):
        rng = np.random.default_rng(seed)
        dim = int(rng.integers(2, 6))
        k = int(rng.integers(1, dim + 1))
        ranks = [1] * k
        for _ in range(dim - k):
            if rng.random() < 0.5:
                ranks[int(rng.integers(0, k))] += 1
        Ps = random_orthogonal_projectors(dim, ranks, rng)
        m = sequential_discriminator(Ps)
        states = [random_state_in_range(P, rng) for P in Ps]
        D = discrimination_matrix(m, states)
        assert np.allclose(D[:k], np.eye(k), atol=1e-9)
        assert len(m) == k + (sum(ranks) < dim)

    def test_rejects_overlapping_projectors(self):
        with pytest.raises(NonOrthogonalInput):
            sequential_discriminator([Z, PLUS])

    def test_rejects_non_projector(self):
        with pytest.raises(QuantumError, match="element 0"):
            sequential_discriminator([Z / 2])


class TestDeciderDelegation:
    q2 = QuantumSystem(2)

    def test_purity(self):
        assert deciders.is_pure_effect(Z, self.q2)
        assert not deciders.is_pure_effect(np.eye(2), self.q2)

    def test_orthogonality(self):
        assert deciders.is_orthogonal_effect_set([Z, ONE], self.q2)
        assert not deciders.is_orthogonal_effect_set([Z, PLUS], self.q2)
        assert deciders.are_states_orthogonal([DensityMatrix(Z), DensityMatrix(ONE)], self.q2)
        assert not deciders.perfectly_distinguishable([DensityMatrix(Z), DensityMatrix(PLUS)], self.q2)

    def test_sufficient_orthogonality_holds(self):
        assert deciders.sufficient_orthogonality([Z, ONE], self.q2)
        with pytest.raises(ImpureInput):
            deciders.sufficient_orthogonality([np.eye(2)], self.q2)
        with pytest.raises(NonOrthogonalInput):
            deciders.sufficient_orthogonality([Z, PLUS], self.q2)

    def test_sharpness(self):
        assert deciders.is_sharp_pure_measurement(Povm((Z, ONE)), self.q2)
        with pytest.raises(PureOnly):
            deciders.is_sharp_pure_measurement(Povm((np.eye(2) / 2, np.eye(2) / 2)), self.q2)

    def test_maximal_and_extremal(self):
        q3 = QuantumSystem(3)
        e = np.eye(3)
        v = deciders.is_maximal_distinguishable_set([DensityMatrix.pure(e[0])], q3)
        assert not v
        assert deciders.is_maximal_distinguishable_set([DensityMatrix.pure(r) for r in e], q3)
        with pytest.raises(InputNotDistinguishable):
            deciders.is_maximal_distinguishable_set([DensityMatrix(Z), DensityMatrix(PLUS)], self.q2)
        assert deciders.is_extremal_effect(Z, self.q2)
        assert not deciders.is_extremal_effect(Z / 2, self.q2)

    def test_identification(self):
        assert deciders.identifies_pure_state(Z, self.q2)
        assert not quantum.q_identifies_pure_state(np.diag([1, 1, 0]), QuantumSystem(3))
