"""Toolkit for general probabilistic theories."""

from .contextual import (EffectValuedWeight, Hypergraph, ProbabilityWeight, check_ce,
                         exclusivity_graph, is_probability_weight)
from .deciders import (are_biorthogonal, are_states_orthogonal, identifies_pure_state,
                       is_extremal_effect, is_maximal_distinguishable_set, is_orthogonal_effect_set,
                       is_pure_effect, is_sharp_pure_measurement, mutually_exclusive,
                       perfectly_distinguishable, sufficient_orthogonality)
from .gpt import Effect, GptSystem, Measurement, State
from .nonlocality import Behavior, Event, NonlocalGame, check_lo, is_no_signalling, payoff
from .orthograph import WeightedGraph, disjunctive_product, max_weight_clique, power
from .verdict import Verdict

__all__ = [
    "Behavior", "Effect", "EffectValuedWeight", "Event", "GptSystem", "Hypergraph", "Measurement",
    "NonlocalGame", "ProbabilityWeight", "State", "Verdict", "WeightedGraph",
    "are_biorthogonal", "are_states_orthogonal", "check_ce", "check_lo", "disjunctive_product",
    "exclusivity_graph", "identifies_pure_state", "is_extremal_effect",
    "is_maximal_distinguishable_set", "is_no_signalling", "is_orthogonal_effect_set",
    "is_probability_weight", "is_pure_effect", "is_sharp_pure_measurement", "max_weight_clique",
    "mutually_exclusive", "payoff", "perfectly_distinguishable", "power",
    "sufficient_orthogonality",
]
__version__ = "0.1.0"
