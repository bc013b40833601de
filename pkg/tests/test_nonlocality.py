"""Behaviors, no-signalling, Local Orthogonality and the behavior file format."""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gptbridge import zoo
from gptbridge.nonlocality import (Behavior, Event, InvalidBehaviorError, NonlocalGame, ParseError,
                                   behavior_from_model, bipartitions, check_lo, coarse_grain_behavior,
                                   deterministic_behavior, dump_behavior, is_no_signalling, load_behavior,
                                   lo_graph, locally_orthogonal, payoff)
from gptbridge.gpt import Measurement, State, tensor_system
from gptbridge.orthograph import ResourceCapExceeded, power
from oracles import deterministic_table, marginals_agree, mix, pr_table, random_distribution

F = Fraction


def signalling_box() -> Behavior:
    # Alice outputs Bob's input
    return Behavior.from_function((2, 2), (2, 2), lambda y, x: F(int(y == (x[1], 0))))


class TestBehavior:
    def test_table_layout(self):
        b = zoo.pr_box()
        assert b.p((0, 0), (0, 0)) == F(1, 2)
        assert b.p((0, 1), (1, 1)) == F(1, 2)
        assert b.p((0, 0), (1, 1)) == 0
        assert str(Event((1, 0), (0, 1))) == "01|10"

    def test_validation(self):
        with pytest.raises(InvalidBehaviorError, match="sums to"):
            Behavior((2,), (2,), (F(1, 2), F(1, 3), 1, 0))
        with pytest.raises(InvalidBehaviorError, match="negative"):
            Behavior((1,), (2,), (F(3, 2), F(-1, 2)))
        with pytest.raises(InvalidBehaviorError, match="entries"):
            Behavior((2,), (2,), (1, 0))

    def test_equality_is_tolerant(self):
        exact = Behavior((1,), (2,), (F(1, 3), F(2, 3)))
        assert Behavior((1,), (2,), (1 / 3, 2 / 3)) == exact
        assert Behavior((1,), (2,), (F(1, 3) + F(1, 10 ** 12), F(2, 3) - F(1, 10 ** 12))) != exact

    def test_bipartitions(self):
        assert list(bipartitions(2)) == [((0,), (1,))]
        assert len(list(bipartitions(4))) == 7


class TestNoSignalling:
    def test_pr_box(self):
        assert is_no_signalling(zoo.pr_box())

    def test_signalling_witness(self):
        v = is_no_signalling(signalling_box())
        assert not v
        assert v.witness["marginal_parties"] == (0,)
        assert v.witness["values"] == (1, 0)

    def test_three_parties(self):
        ok = deterministic_behavior((2, 2, 2), (2, 2, 2), [[0, 1], [1, 1], [0, 0]])
        assert is_no_signalling(ok)
        bad = Behavior.from_function((2, 2, 2), (2, 2, 2), lambda y, x: F(int(y == (x[2], 0, 0))))
        v = is_no_signalling(bad)
        assert not v and v.witness["bipartition"] == ((0,), (1, 2))

    def test_signalling_between_groups_only(self):
        # parties 1 and 2 share a PR box whose outputs depend on party 0's input
        def p(y, x):
            ok = (y[1] ^ y[2]) == ((x[1] & x[2]) ^ x[0])
            return F(int(ok), 2) if y[0] == 0 else F(0)
        b = Behavior.from_function((2, 2, 2), (1, 2, 2), p)
        v = is_no_signalling(b)
        assert not v

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_matches_bruteforce(self, seed):
        rng = np.random.default_rng(seed)
        inputs = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        outputs = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        if rng.random() < 0.5:
            table = [v for _ in range(inputs[0] * inputs[1])
                     for v in random_distribution(rng, outputs[0] * outputs[1])]
        else:
            strategies = [[[int(rng.integers(0, outputs[i])) for _ in range(inputs[i])] for i in range(2)]
                          for _ in range(3)]
            table = mix([deterministic_table(inputs, outputs, s) for s in strategies],
                        random_distribution(rng, 3))
        b = Behavior(inputs, outputs, tuple(table))
        assert bool(is_no_signalling(b)) == marginals_agree(table, inputs, outputs)


class TestLocalOrthogonality:
    def test_predicate(self):
        e = Event((0, 1), (0, 0))
        assert locally_orthogonal(e, Event((0, 0), (1, 0)))
        assert not locally_orthogonal(e, Event((1, 0), (1, 0)))
        assert not locally_orthogonal(e, Event((0, 1), (0, 0)))

    def test_graph_drops_zero_events(self):
        g = lo_graph(zoo.pr_box())
        assert g.n == 8
        assert lo_graph(zoo.pr_box(), keep_zero=True).n == 16

    def test_pr_box_levels(self):
        b = zoo.pr_box()
        r1 = check_lo(b, 1)
        assert r1.satisfied and r1.max_clique_value == 1
        r2 = check_lo(b, 2)
        assert not r2.satisfied and r2.max_clique_value == F(5, 4)
        assert len(r2.witness) == 5 and r2.vertices == 64

    def test_pr_witness_is_pairwise_locally_orthogonal(self):
        r2 = check_lo(zoo.pr_box(), 2)
        for a in r2.witness:
            for b in r2.witness:
                if a != b:
                    assert any(locally_orthogonal(e, f) for e, f in zip(a, b))

    def test_power_matches_k_copy_relation(self):
        b = zoo.pr_box()
        g = lo_graph(b)
        g2 = power(g, 2)
        for i in range(g2.n):
            for j in range(i + 1, g2.n):
                a, c = g2.labels[i], g2.labels[j]
                assert g2.has_edge(i, j) == any(locally_orthogonal(e, f) for e, f in zip(a, c))

    @pytest.mark.parametrize("strategy", [[[0, 1], [1, 0]], [[1, 1], [0, 1]]])
    def test_deterministic_satisfies_level_three(self, strategy):
        b = deterministic_behavior((2, 2), (2, 2), strategy)
        assert check_lo(b, 3).satisfied

    def test_level_cap(self):
        with pytest.raises(ResourceCapExceeded):
            check_lo(zoo.pr_box(), 4)

    def test_signalling_violates_level_one(self):
        r = check_lo(signalling_box(), 1)
        assert not r.satisfied and r.max_clique_value == 2


class TestGamesAndModels:
    def test_chsh(self):
        g = zoo.chsh_game()
        assert payoff(g, zoo.pr_box()) == 1
        assert zoo.best_local_chsh() == F(3, 4)

    def test_game_validation(self):
        with pytest.raises(ValueError, match="sum to 1"):
            NonlocalGame((1,), (2,), (F(1, 2),), (1, 0))

    def test_behavior_from_classical_model(self):
        c2 = zoo.classical_system(2)
        ab = tensor_system(c2, c2)
        rho = State(ab, (F(1, 2), 0, 0, F(1, 2)))
        m = Measurement(c2, tuple(c2.pure_effects()))
        flipped = Measurement(c2, tuple(reversed(c2.pure_effects())))
        b = behavior_from_model(rho, [[m, flipped], [m]])
        assert b.inputs == (2, 1)
        assert b.p((0, 0), (0, 0)) == F(1, 2) and b.p((0, 1), (0, 0)) == 0
        assert b.p((0, 1), (1, 0)) == F(1, 2)
        assert is_no_signalling(b)

    def test_coarse_graining(self):
        b = Behavior((1, 1), (3, 2), tuple(F(1, 6) for _ in range(6)))
        c = coarse_grain_behavior(b, [[[0, 2], [1]], [[0, 1]]])
        assert c.outputs == (2, 1)
        assert c.p((0, 0), (0, 0)) == F(2, 3)
        with pytest.raises(ValueError):
            coarse_grain_behavior(b, [[[0, 1]], [[0, 1]]])


class TestBehaviorFiles:
    @pytest.mark.parametrize("make", [zoo.pr_box, zoo.tsirelson_behavior, signalling_box])
    def test_round_trip(self, make):
        b = make()
        assert load_behavior(dump_behavior(b)) == b

    def test_pipe_separated_keys(self):
        text = ('{"parties": 2, "inputs": [1, 1], "outputs": [2, 1],'
                ' "table": {"0|0": {"0|0": "1/3", "1|0": "2/3"}}}')
        assert load_behavior(text).p((1, 0), (0, 0)) == F(2, 3)

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError) as err:
            load_behavior('{"inputs": [1],\n "outputs": [1] "table": {}}')
        assert err.value.line == 2 and err.value.column is not None

    def test_semantic_error_points_at_key(self):
        text = '{"inputs": [1], "outputs": [2], "table": {"0": {"0": "1/2", "5": "1/2"}}}'
        with pytest.raises(ParseError, match="out of range") as err:
            load_behavior(text)
        assert (err.value.line, err.value.column) == (1, text.index('"5"') + 1)

    def test_unnormalized_rows_rejected(self):
        with pytest.raises(ParseError, match="sums to"):
            load_behavior('{"inputs": [1], "outputs": [2], "table": {"0": {"0": "1/2"}}}')


def random_ns_behavior(rng) -> Behavior:
    """Convex mixture of local deterministic boxes and generalized PR boxes."""
    d = int(rng.integers(2, 4))
    inputs, outputs = (2, 2), (d, d)
    tables = [pr_table(d)]
    for _ in range(int(rng.integers(1, 4))):
        s = [[int(rng.integers(0, d)) for _ in range(2)] for _ in range(2)]
        tables.append(deterministic_table(inputs, outputs, s))
    return Behavior(inputs, outputs, tuple(mix(tables, random_distribution(rng, len(tables)))))


def test_ns_mixtures_are_lo1():
    for seed in range(20):
        assert check_lo(random_ns_behavior(np.random.default_rng(seed)), 1).satisfied


def test_all_deterministic_behaviors_satisfy_lo2():
    for s in product([0, 1], repeat=4):
        b = deterministic_behavior((2, 2), (2, 2), [[s[0], s[1]], [s[2], s[3]]])
        assert check_lo(b, 2).max_clique_value == 1
