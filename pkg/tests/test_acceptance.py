"""Acceptance criteria 1-11, one test per criterion.

Each test is tagged with ``@pytest.mark.criterion``; ``conftest.py`` prints one
PASS/FAIL line per criterion in the terminal summary.  Run this file directly
for the same summary without the rest of the suite.
"""

from __future__ import annotations

import time
from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from gptbridge import zoo
from gptbridge.deciders import (are_states_orthogonal, is_extremal_effect, is_maximal_distinguishable_set,
                                is_orthogonal_effect_set, is_sharp_pure_measurement, perfectly_distinguishable,
                                pure_measurements, sufficient_orthogonality)
from gptbridge.gpt import pair
from gptbridge.nonlocality import (Behavior, check_lo, coarse_grain_behavior, is_no_signalling, lo_graph,
                                   payoff)
from gptbridge.numerics.lp import LinearProgram, LpStatus, lp_feasible, lp_solve
from gptbridge.numerics.scalars import sign
from gptbridge.orthograph import WeightedGraph, max_weight_clique, power
from gptbridge.contextual import check_ce
from gptbridge.quantum import (discrimination_matrix, naimark_dilate, naimark_reproduces, random_density_matrix,
                               random_orthogonal_projectors, random_povm, random_state_in_range,
                               sequential_discriminator)
from oracles import (clique_oracle, deterministic_table, lp_vertex_oracle, mix, pr_table, random_distribution,
                     random_graph)

F = Fraction
criterion = pytest.mark.criterion


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


# -- 1 ---------------------------------------------------------------------------------

@criterion(1, "square-bit pairing table and unit decompositions")
def test_criterion_1_square_bit_table():
    with Timer() as t:
        sq = zoo.square_bit()
        a, phi = sq.pure_effects(), sq.states()
        for y in range(4):
            for k, expected in enumerate((1, 1, 0, 0)):
                assert pair(a[(y + k) % 4], phi[y]) == expected
        assert a[0] + a[2] == sq.unit_effect()
        assert a[1] + a[3] == sq.unit_effect()
    assert t.elapsed < 1.0


# -- 2 ---------------------------------------------------------------------------------

@criterion(2, "polygon SO sweep n = 3..12")
def test_criterion_2_polygon_sweep():
    with Timer() as t:
        for n in range(3, 13):
            p = zoo.polygon_system(n)
            if n == 3:
                assert sufficient_orthogonality(p.pure_effects(), p)
                continue
            j = (n + 1) // 2 if n % 2 else n // 2 + 1
            pair_ = [p.effect(0), p.effect(j % n)]
            assert is_orthogonal_effect_set(pair_, p)
            assert not sufficient_orthogonality(pair_, p)
            if n % 2:
                v = zoo.odd_polygon_inequality(n)
                assert v and sign(v.witness["raw_margin"] - F(1, 1000)) > 0
                assert sign(v.witness["pairing_margin"] - F(1, 1000)) > 0
    assert t.elapsed < 10.0


# -- 3 ---------------------------------------------------------------------------------

def clique_enumeration_oracle(g: WeightedGraph) -> Fraction:
    """Exhaustive over maximal cliques; weights are nonnegative so the optimum is among them."""
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges())
    return max(sum((g.weights[i] for i in c), F(0)) for c in nx.find_cliques(G))


@criterion(3, "PR box: NS, LO1 = 1, LO2 = 5/4")
def test_criterion_3_pr_box():
    with Timer() as t:
        b = zoo.pr_box()
        assert is_no_signalling(b)
        r1, r2 = check_lo(b, 1), check_lo(b, 2)
        assert r1.satisfied and r1.max_clique_value == 1 and r1.exact
        assert not r2.satisfied and r2.max_clique_value == F(5, 4) and r2.exact
        assert clique_enumeration_oracle(power(lo_graph(b), 2)) == F(5, 4)
    assert t.elapsed < 30.0


# -- 4 ---------------------------------------------------------------------------------

@criterion(4, "pentagon CE1 = 1, CE2 = 5/4")
def test_criterion_4_pentagon():
    with Timer() as t:
        w = zoo.pentagon_half_weight()
        r1, r2 = check_ce(w, 1), check_ce(w, 2)
        assert r1.satisfied and r1.max_clique_value == 1
        assert not r2.satisfied and r2.max_clique_value == F(5, 4)
        g = power(WeightedGraph.from_edges(tuple(range(5)), (F(1, 2),) * 5,
                                           [(i, (i + 1) % 5) for i in range(5)]), 2)
        assert clique_oracle(list(g.adjacency), list(g.weights)) == F(5, 4)
    assert t.elapsed < 30.0


# -- 5 and 6 ---------------------------------------------------------------------------

def random_bipartite(rng) -> Behavior:
    inputs = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    outputs = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
    kind = rng.integers(0, 3)
    if kind == 0:
        # independent rows: signalling except by accident
        table = [v for _ in range(inputs[0] * inputs[1])
                 for v in random_distribution(rng, outputs[0] * outputs[1])]
    else:
        table = no_signalling_table(rng, inputs, outputs)
        if kind == 2:
            # perturb one input row while keeping it normalized
            row = int(rng.integers(0, inputs[0] * inputs[1]))
            k = outputs[0] * outputs[1]
            new = random_distribution(rng, k)
            table[row * k:(row + 1) * k] = new
    return Behavior(inputs, outputs, tuple(table))


def no_signalling_table(rng, inputs, outputs) -> list[Fraction]:
    """Mixture of deterministic boxes and, for square scenarios, a generalized PR box."""
    tables = []
    for _ in range(int(rng.integers(1, 4))):
        s = [[int(rng.integers(0, outputs[i])) for _ in range(inputs[i])] for i in range(2)]
        tables.append(deterministic_table(inputs, outputs, s))
    if inputs == (2, 2) and outputs[0] == outputs[1]:
        tables.append(pr_table(outputs[0]))
    return mix(tables, random_distribution(rng, len(tables)))


@criterion(5, "bipartite LO1 iff NS on 200 random behaviors")
def test_criterion_5_lo1_iff_ns():
    rng = np.random.default_rng(5)
    signalling = 0
    for _ in range(200):
        b = random_bipartite(rng)
        ns = bool(is_no_signalling(b))
        signalling += not ns
        assert check_lo(b, 1).satisfied == ns
    assert 20 <= signalling <= 180


def random_partition(rng, m: int) -> list[list[int]]:
    labels = [int(rng.integers(0, m)) for _ in range(m)]
    blocks: dict[int, list[int]] = {}
    for z, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(z)
    return list(blocks.values())


@criterion(6, "local coarse-graining preserves LO1 on 200 behaviors")
def test_criterion_6_coarse_graining():
    rng = np.random.default_rng(6)
    for _ in range(200):
        inputs = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        outputs = (int(rng.integers(2, 5)), int(rng.integers(2, 5)))
        b = Behavior(inputs, outputs, tuple(no_signalling_table(rng, inputs, outputs)))
        assert check_lo(b, 1).satisfied
        c = coarse_grain_behavior(b, [random_partition(rng, m) for m in outputs])
        assert check_lo(c, 1).satisfied


# -- 7 ---------------------------------------------------------------------------------

def zoo_systems():
    yield from (zoo.classical_system(n) for n in (2, 3, 4, 5))
    yield zoo.square_bit()
    yield from (zoo.polygon_system(n) for n in range(3, 13))


@criterion(7, "state orthogonality iff perfect distinguishability")
def test_criterion_7_orthogonal_iff_distinguishable():
    for s in zoo_systems():
        for a, b in combinations(s.states(), 2):
            assert bool(are_states_orthogonal([a, b], s)) == bool(perfectly_distinguishable([a, b], s))
    sq = zoo.square_bit()
    phi = sq.states()
    assert all(are_states_orthogonal([phi[i], phi[j]], sq) for i, j in combinations(range(4), 2))
    assert not are_states_orthogonal(phi, sq)


# -- 8 ---------------------------------------------------------------------------------

@criterion(8, "Naimark, sequential discrimination and Tsirelson")
def test_criterion_8_quantum_backend():
    rng = np.random.default_rng(8)
    for _ in range(100):
        m = random_povm(int(rng.integers(2, 5)), int(rng.integers(2, 6)), rng)
        states = [random_density_matrix(m.dim, rng) for _ in range(3)]
        assert naimark_reproduces(m, naimark_dilate(m), states)
        assert naimark_reproduces(m, naimark_dilate(m))
    for _ in range(100):
        dim = int(rng.integers(2, 6))
        k = int(rng.integers(1, dim + 1))
        ranks = [1] * k
        for _ in range(int(rng.integers(0, dim - k + 1))):
            ranks[int(rng.integers(0, k))] += 1
        Ps = random_orthogonal_projectors(dim, ranks, rng)
        D = discrimination_matrix(sequential_discriminator(Ps), [random_state_in_range(P, rng) for P in Ps])
        assert np.max(np.abs(D[:k] - np.eye(k))) <= 1e-9
    b = zoo.tsirelson_behavior()
    assert abs(payoff(zoo.chsh_game(), b) - (2 + np.sqrt(2)) / 4) <= 1e-9
    for k in (1, 2):
        r = check_lo(b, k)
        assert r.satisfied and float(r.max_clique_value) <= 1 + 1e-9


# -- 9 ---------------------------------------------------------------------------------

def random_lp(rng, max_bases: int = 400):
    """At most 8 variables and 12 constraints; vertex enumeration cost is capped."""
    from math import comb

    while True:
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 13))
        if comb(m + n, n) <= max_bases:
            break
    A = [[int(v) for v in rng.integers(-4, 6, size=n)] for _ in range(m)]
    b = [int(v) for v in rng.integers(-2, 7, size=m)]
    c = [int(v) for v in rng.integers(-3, 5, size=n)]
    return c, A, b


@criterion(9, "exact simplex agrees with vertex enumeration on 500 LPs")
def test_criterion_9_lp_engine():
    rng = np.random.default_rng(9)
    seen = set()
    for _ in range(500):
        c, A, b = random_lp(rng)
        lp = LinearProgram(len(c), c, A_ub=A, b_ub=b)
        res = lp_solve(lp)
        status, value = lp_vertex_oracle(c, A, b)
        assert res.status.value == status
        seen.add(status)
        if res.status == LpStatus.OPTIMAL:
            assert res.optimum == value
            assert lp.is_feasible_point(res.witness) and lp.value(res.witness) == value
        elif res.status == LpStatus.INFEASIBLE:
            assert res.certificate.verify(lp)
        else:
            d = res.ray
            assert all(v >= 0 for v in d)
            assert all(sum(a * v for a, v in zip(row, d)) <= 0 for row in lp.A_ub)
            assert sum(ci * v for ci, v in zip(lp.objective, d)) > 0
            assert lp_feasible(lp)[0]
    assert seen == {"Optimal", "Infeasible", "Unbounded"}


# -- 10 --------------------------------------------------------------------------------

@criterion(10, "clique engine agrees with subset enumeration on 500 graphs")
def test_criterion_10_clique_engine():
    rng = np.random.default_rng(10)
    for _ in range(500):
        n = int(rng.integers(0, 19))
        adj = random_graph(rng, n, rng.uniform(0.1, 0.95))
        w = tuple(F(int(rng.integers(0, 12)), int(rng.integers(1, 8))) for _ in range(n))
        g = WeightedGraph(tuple(range(n)), w, tuple(adj))
        res = max_weight_clique(g)
        assert res.value == clique_oracle(adj, list(w))
        assert g.is_clique(res.witness) and g.weight_of(res.witness) == res.value


# -- 11 --------------------------------------------------------------------------------

@criterion(11, "pure measurements: sharp iff orthogonal, sharp implies extremal and maximal")
def test_criterion_11_measurement_classes():
    systems = [zoo.classical_system(n) for n in (2, 3, 4)] + [zoo.square_bit()] + \
              [zoo.polygon_system(n) for n in range(3, 9)]
    for s in systems:
        ms = pure_measurements(s)
        assert ms
        for m in ms:
            sharp = is_sharp_pure_measurement(m, s)
            assert bool(sharp) == bool(is_orthogonal_effect_set(list(m.effects), s))
            if sharp:
                assert all(is_extremal_effect(e, s) for e in m.effects)
                if s.name.startswith("classical"):
                    assert is_maximal_distinguishable_set(sharp.witness["states"], s)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
