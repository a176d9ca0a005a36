import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from universal_cover.errors import InfeasibleInstanceError, InvalidInputError, NotEvaluableError
from universal_cover.model import (IndependentDist, ScenarioDist, SamplerDist, as_sampler, empirical_dist,
                                   empirical_from_matrix, eval_g, g_table, make_instance, sample_many,
                                   sample_scenario, to_mask)


def test_eval_g_empty_set_is_zero():
    assert eval_g(IndependentDist([0.5, 0.5]), []) == 0.0
    assert eval_g(ScenarioDist(2, [(1.0, [0, 1])]), []) == 0.0


def test_eval_g_independent():
    assert eval_g(IndependentDist([0.5, 0.5]), {0, 1}) == pytest.approx(0.75)
    assert eval_g(IndependentDist([0.2, 0.4, 0.9]), {0, 2}) == pytest.approx(0.92)


def test_eval_g_scenario():
    dist = ScenarioDist(3, [(0.3, [0, 1]), (0.7, [2])])
    assert eval_g(dist, {0}) == pytest.approx(0.3)
    assert eval_g(dist, {0, 2}) == pytest.approx(1.0)


def test_independent_g_matches_enumeration():
    probs = [0.2, 0.4, 0.9]
    dist = IndependentDist(probs)
    for mask in range(8):
        B = [u for u in range(3) if mask >> u & 1]
        hit = 0.0
        for outcome in range(8):
            p = math.prod(probs[u] if outcome >> u & 1 else 1 - probs[u] for u in range(3))
            if outcome & mask:
                hit += p
        assert dist.g(B) == pytest.approx(hit, abs=1e-12)


def test_large_universe_skips_table():
    probs = [0.1] * 25
    dist = IndependentDist(probs)
    assert dist.g(range(25)) == pytest.approx(1 - 0.9 ** 25)
    with pytest.raises(InvalidInputError):
        g_table(dist)


def test_sampler_is_not_evaluable():
    dist = SamplerDist(2, lambda rng: [0])
    with pytest.raises(NotEvaluableError, match="saa"):
        eval_g(dist, {0})


def test_sample_scenario_certain_outcomes():
    assert sample_scenario(IndependentDist([1.0, 1.0]), seed=3) == frozenset({0, 1})
    assert sample_scenario(IndependentDist([0.0, 0.0]), seed=3) == frozenset()
    assert sample_scenario(ScenarioDist(3, [(1.0, [2])]), seed=11) == frozenset({2})


def test_sample_scenario_is_deterministic():
    dist = ScenarioDist(4, [(0.25, [0]), (0.25, [1]), (0.25, [2]), (0.25, [3])])
    assert [sample_scenario(dist, s) for s in range(20)] == [sample_scenario(dist, s) for s in range(20)]


def test_sampling_frequency_matches_probabilities():
    probs = np.array([0.1, 0.5, 0.9])
    count = 100_000
    freq = sample_many(IndependentDist(probs), seed=2024, count=count).mean(axis=0)
    sigma = np.sqrt(probs * (1 - probs) / count)
    assert np.all(np.abs(freq - probs) <= 4 * sigma)


def test_sampler_counts_calls():
    dist = as_sampler(IndependentDist([1.0, 0.0]))
    matrix = dist.sample_matrix(np.random.default_rng(0), 5)
    assert dist.calls == 5
    assert matrix[:, 0].all() and not matrix[:, 1].any()


def test_empirical_dist_counts_frequencies():
    dist = empirical_dist([{0}, {0}, {1}])
    assert dist.sets == (frozenset({0}), frozenset({1}))
    assert dist.probs == pytest.approx([2 / 3, 1 / 3])


def test_empirical_dist_single_empty_sample():
    dist = empirical_dist([set()])
    assert dist.sets == (frozenset(),)
    assert dist.probs == pytest.approx([1.0])


def test_empirical_dist_matches_estimate():
    dist = empirical_dist([{0}, {1}, {0, 1}, {0}])
    assert dist.g({0}) == pytest.approx(0.75)


def test_empirical_dist_rejects_empty_list():
    with pytest.raises(InvalidInputError):
        empirical_dist([])


def test_empirical_from_matrix_agrees_with_list_form():
    matrix = np.array([[1, 0], [0, 1], [1, 1], [1, 0]], dtype=bool)
    dist = empirical_from_matrix(matrix)
    for B in ([0], [1], [0, 1]):
        assert dist.g(B) == pytest.approx(empirical_dist([{0}, {1}, {0, 1}, {0}], n=2).g(B))


def test_scenario_probabilities_are_normalized_within_tolerance():
    dist = ScenarioDist(2, [(0.5, [0]), (0.5000005, [1])])
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidInputError):
        ScenarioDist(2, [(0.5, [0]), (0.6, [1])])


def test_scenario_rejects_foreign_elements():
    with pytest.raises(InvalidInputError):
        ScenarioDist(2, [(1.0, [0, 5])])


def test_independent_rejects_bad_probability():
    with pytest.raises(InvalidInputError):
        IndependentDist([0.5, 1.5])


def test_instance_validation():
    with pytest.raises(InvalidInputError):
        make_instance(2, [("A", 1.0, [0]), ("A", 1.0, [1])])
    with pytest.raises(InvalidInputError):
        make_instance(2, [("A", -1.0, [0, 1])])
    with pytest.raises(InvalidInputError):
        make_instance(2, [("A", 1.0, [0, 2])])


def test_instance_feasibility():
    inst = make_instance(2, [("A", 1.0, [0]), ("B", 1.0, [0, 1])], requirements=[2, 2])
    with pytest.raises(InfeasibleInstanceError) as err:
        inst.check_feasible()
    assert err.value.element == 1


def test_instance_json_shape():
    inst = make_instance(2, [("A", 1.0, [1, 0])])
    assert inst.to_json() == {"n": 2, "sets": [{"id": "A", "cost": 1.0, "elements": [0, 1]}]}


@st.composite
def dist_and_subsets(draw):
    n = draw(st.integers(min_value=1, max_value=10))
    if draw(st.booleans()):
        probs = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
        dist = IndependentDist(probs)
    else:
        k = draw(st.integers(1, 5))
        weights = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
        total = sum(weights)
        sets = draw(st.lists(st.sets(st.integers(0, n - 1)), min_size=k, max_size=k))
        dist = ScenarioDist(n, [(w / total, s) for w, s in zip(weights, sets)])
    A = draw(st.sets(st.integers(0, n - 1)))
    B = draw(st.sets(st.integers(0, n - 1)))
    return dist, A, B


@given(dist_and_subsets())
def test_g_is_submodular(case):
    dist, A, B = case
    assert dist.g(A) + dist.g(B) >= dist.g(A | B) + dist.g(A & B) - 1e-12


@given(dist_and_subsets())
def test_g_is_monotone(case):
    dist, A, B = case
    assert dist.g(A & B) <= dist.g(A) + 1e-12
    assert dist.g(A) <= dist.g(A | B) + 1e-12


@given(dist_and_subsets())
def test_g_is_subadditive(case):
    dist, A, B = case
    assert dist.g(A | B) <= dist.g(A) + dist.g(B) + 1e-12


def test_table_matches_direct_evaluation():
    dist = ScenarioDist(4, [(0.2, [0, 3]), (0.5, [1]), (0.3, [])])
    table = g_table(dist)
    for mask in range(16):
        B = [u for u in range(4) if mask >> u & 1]
        assert table[to_mask(B)] == pytest.approx(float(dist.probs[dist.incidence[:, B].any(axis=1)].sum()))


def test_many_scenarios_skip_table(monkeypatch):
    monkeypatch.setattr('universal_cover.model.G_TABLE_MAX_WORK', 64)
    scenarios = [(0.1, [k % 5, (k + 2) % 5]) for k in range(10)]
    dist = ScenarioDist(5, scenarios)
    small = ScenarioDist(5, scenarios[:2])
    assert not dist.has_table
    assert small.has_table
    for mask in range(32):
        B = [u for u in range(5) if mask >> u & 1]
        direct = float(dist.probs[dist.incidence[:, B].any(axis=1)].sum())
        assert dist.g(B) == pytest.approx(direct)
        assert dist.g_mask(mask) == pytest.approx(direct)
    assert 'table' not in vars(dist)
