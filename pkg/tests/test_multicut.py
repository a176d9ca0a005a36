import math

import numpy as np
import pytest

from universal_cover.errors import InfeasibleMappingError, InvalidInputError, UnsupportedProblemError
from universal_cover.generators import random_tree_multicut
from universal_cover.multicut import (Edge, McMapping, McTreeInstance, Pair, check_mc_mapping, edge_id,
                                      gvy_tree_multicut, lp_mc_objective, mc_expected_cost, multicut_tree_lp,
                                      round_mc_tree, solve_lp_mc_tree, split_pairs)
from universal_cover.verify import brute_universal, expected_cost


def path_instance(pairs):
    return McTreeInstance(num_nodes=3, edges=(Edge(0, 1, 1.0), Edge(1, 2, 1.0)), pairs=tuple(pairs))


def test_certain_pairs_buy_the_shared_edge():
    inst = path_instance([Pair(0, 2, 1.0), Pair(1, 2, 1.0)])
    frac = solve_lp_mc_tree(inst)
    assert frac.value == pytest.approx(1.0)
    assert split_pairs(inst, frac) == ([0, 1], [])
    mapping = round_mc_tree(inst, frac)
    assert mapping.cuts == (frozenset({1}), frozenset({1}))
    assert mc_expected_cost(inst, mapping) == pytest.approx(1.0)
    assert lp_mc_objective(inst, mapping) == pytest.approx(1.0)


def test_rare_pair_rents():
    inst = McTreeInstance(num_nodes=2, edges=(Edge(0, 1, 1.0),), pairs=(Pair(0, 1, 0.1),))
    frac = solve_lp_mc_tree(inst)
    assert frac.value == pytest.approx(0.1)
    mapping = round_mc_tree(inst, frac)
    assert mapping.cuts == (frozenset({0}),)
    assert mapping.bought == frozenset()
    assert mc_expected_cost(inst, mapping) == pytest.approx(0.1)


def test_primal_dual_single_pair_takes_cheapest_edge():
    inst = McTreeInstance(num_nodes=3, edges=(Edge(0, 1, 3.0), Edge(1, 2, 2.0)), pairs=(Pair(0, 2, 1.0),))
    assert gvy_tree_multicut(inst, [0]) == frozenset({1})
    assert multicut_tree_lp(inst, [0]) == pytest.approx(2.0)
    assert gvy_tree_multicut(inst, []) == frozenset()


@pytest.mark.parametrize('seed', range(10))
def test_primal_dual_within_twice_the_lp(seed):
    inst = random_tree_multicut(np.random.default_rng(seed), 7, 4)
    clients = list(range(len(inst.pairs)))
    cut = gvy_tree_multicut(inst, clients)
    for path in inst.paths:
        assert cut.intersection(path)
    cost = sum(inst.edges[e].cost for e in cut)
    assert cost <= 2 * multicut_tree_lp(inst, clients) + 1e-7


@pytest.mark.parametrize('seed', range(100))
def test_rounding_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    inst = random_tree_multicut(rng, int(rng.integers(2, 8)), int(rng.integers(1, 5)))
    frac = solve_lp_mc_tree(inst)
    mapping = round_mc_tree(inst, frac)
    check_mc_mapping(inst, mapping)
    cost = expected_cost(inst, mapping)
    _, opt = brute_universal(inst)
    assert opt <= cost + 1e-9
    assert frac.value <= math.e / (math.e - 1) * opt + 1e-7
    assert cost <= lp_mc_objective(inst, mapping) + 1e-9
    assert lp_mc_objective(inst, mapping) <= 3 * frac.value + 1e-7
    assert cost <= 3 * math.e / (math.e - 1) * opt + 1e-7



def test_non_tree_is_unsupported():
    with pytest.raises(UnsupportedProblemError, match="trees"):
        McTreeInstance(num_nodes=3, edges=(Edge(0, 1, 1.0), Edge(1, 2, 1.0), Edge(0, 2, 1.0)), pairs=())
    with pytest.raises(UnsupportedProblemError):
        McTreeInstance(num_nodes=2, edges=(Edge(0, 1, 1.0), Edge(1, 0, 2.0)), pairs=())


def test_instance_validation():
    with pytest.raises(InvalidInputError):
        path_instance([Pair(0, 0, 0.5)])
    with pytest.raises(InvalidInputError):
        path_instance([Pair(0, 2, 1.5)])


def test_unseparated_pair():
    inst = path_instance([Pair(0, 1, 0.5)])
    with pytest.raises(InfeasibleMappingError):
        check_mc_mapping(inst, McMapping((frozenset({1}),)))


def test_edge_id():
    inst = path_instance([])
    assert edge_id(inst, 2, 1) == 1
    with pytest.raises(InvalidInputError):
        edge_id(inst, 0, 2)
