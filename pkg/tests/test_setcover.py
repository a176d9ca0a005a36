import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from universal_cover.edgecover import vertex_cover_instance
from universal_cover.errors import InfeasibleMappingError, InvalidInputError, NotEvaluableError, SolverError
from universal_cover.generators import random_graph, random_scenario_dist, random_setcover
from universal_cover.model import (IndependentDist, SamplerDist, ScenarioDist, as_sampler, empirical_from_matrix,
                                   make_instance, sample_many)
from universal_cover.setcover import (Column, ConnectionCosts, FractionalCover, Mapping, NmflProblem, check_mapping,
                                      check_strong_duality, greedy_certificate_violation, greedy_multicover,
                                      mapping_cost, max_dual_violation, normalize_cover, round_frequency,
                                      round_randomized, saa_sample_size, saa_solve, separation_sc, solve_conf_lp,
                                      solve_conf_lp_full)
from universal_cover.utils import harmonic
from universal_cover.verify import brute_universal


@pytest.fixture
def shared_set():
    """Two unit singletons and a 1.5 set covering both; both elements always requested"""
    inst = make_instance(2, [("S1", 1.0, [0]), ("S2", 1.0, [1]), ("S3", 1.5, [0, 1])])
    return inst, IndependentDist([1.0, 1.0])


@pytest.fixture
def multicover():
    inst = make_instance(2, [("S1", 1.0, [0, 1]), ("S2", 1.0, [0]), ("S3", 3.0, [1])], requirements=[2, 1])
    return inst, ScenarioDist(2, [(1.0, [0, 1])])


def test_conf_lp_uses_the_shared_set(shared_set):
    inst, dist = shared_set
    frac = solve_conf_lp(inst, dist)
    assert frac.value == pytest.approx(1.5)
    assert frac.dual_value == pytest.approx(1.5)
    heavy = [c for c in frac.columns if c.y > 1e-6]
    assert len(heavy) == 1
    assert heavy[0].set_id == "S3" and heavy[0].elements == frozenset({0, 1})
    assert heavy[0].y == pytest.approx(1.0)
    assert max_dual_violation(inst, dist, frac.duals) <= 1e-6


def test_conf_lp_matches_full_lp(shared_set):
    inst, dist = shared_set
    assert solve_conf_lp(inst, dist).value == pytest.approx(solve_conf_lp_full(inst, dist).value)


@settings(max_examples=15)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_conf_lp_agrees_with_full_lp_on_random_instances(seed):
    rng = np.random.default_rng(seed)
    inst = random_setcover(rng, 4, 3)
    dist = random_scenario_dist(rng, 4)
    frac = solve_conf_lp(inst, dist)
    full = solve_conf_lp_full(inst, dist)
    assert frac.value == pytest.approx(full.value, rel=1e-6, abs=1e-7)
    for u in range(inst.n):
        assert frac.mass(u) == pytest.approx(1.0, abs=1e-6)
    assert max_dual_violation(inst, dist, frac.duals) <= 1e-6


def test_normalize_cover_trims_surplus(shared_set):
    inst, dist = shared_set
    over = FractionalCover(columns=[Column("S3", frozenset({0, 1}), 1.0), Column("S1", frozenset({0}), 1.0)],
                           duals=np.zeros(2), value=2.5)
    trimmed = normalize_cover(over, inst, dist)
    assert [(c.set_id, c.elements) for c in trimmed.columns] == [("S3", frozenset({0, 1}))]
    assert trimmed.value == pytest.approx(1.5)
    assert trimmed.mass(0) == pytest.approx(1.0)


@pytest.fixture
def one_cheap_set():
    """S1 serves everything for 0.5; S2 is empty; only element 3 is ever requested"""
    inst = make_instance(4, [("S1", 0.5, [0, 1, 2, 3]), ("S2", 1.75, [])])
    return inst, ScenarioDist(4, [(1.0, [3])])


def test_normalize_cover_uncrosses_a_set_above_unit_mass(one_cheap_set):
    inst, dist = one_cheap_set
    singletons = FractionalCover(columns=[Column("S1", frozenset({u}), 1.0) for u in range(4)],
                                 duals=np.zeros(4), value=0.5)
    chain = normalize_cover(singletons, inst, dist)
    assert [(c.set_id, c.elements, c.y) for c in chain.columns] == [("S1", frozenset(range(4)), 1.0)]
    assert chain.value == pytest.approx(0.5)


def test_normalize_cover_keeps_per_element_mass_when_uncrossing():
    inst = make_instance(3, [("S1", 1.0, [0, 1, 2]), ("S2", 1.0, [0, 1, 2])])
    dist = IndependentDist([0.5, 0.5, 0.5])
    frac = FractionalCover(columns=[Column("S1", frozenset({0, 1}), 0.5), Column("S1", frozenset({1, 2}), 0.5),
                                    Column("S1", frozenset({0, 2}), 0.25), Column("S2", frozenset({0, 2}), 0.25)],
                           duals=np.zeros(3), value=0.9375 + 0.1875)
    chain = normalize_cover(frac, inst, dist)
    assert {c.elements: c.y for c in chain.columns if c.set_id == "S1"} == pytest.approx(
        {frozenset({1}): 0.25, frozenset({0, 1, 2}): 0.75})
    for u in range(3):
        assert chain.mass(u, "S1") == pytest.approx(frac.mass(u, "S1"))
        assert chain.mass(u) == pytest.approx(1.0)
    assert chain.value == pytest.approx(0.78125 + 0.1875)
    assert chain.value <= frac.value


def test_rounding_when_one_set_serves_every_element(one_cheap_set):
    inst, dist = one_cheap_set
    frac = solve_conf_lp(inst, dist)
    assert frac.value == pytest.approx(0.5)
    for s in inst.sets:
        assert sum(c.y for c in frac.columns if c.set_id == s.id) <= 1.0 + 1e-6
    mapping = round_randomized(frac, inst, dist, seed=0)
    assert mapping.assignment == (("S1",),) * 4
    assert mapping.attempts == 1
    assert mapping_cost(inst, dist, mapping) == pytest.approx(0.5)


def test_strong_duality_check():
    check_strong_duality(1.0, 1.0 + 1e-9)
    check_strong_duality(1e6, 1e6 + 0.5)
    with pytest.raises(SolverError) as err:
        check_strong_duality(1.0, 1.1, rounds=7)
    assert err.value.diagnostics['gap'] == pytest.approx(0.1)
    assert err.value.diagnostics['rounds'] == 7


def test_conf_lp_with_wolfe_separation(shared_set):
    inst, dist = shared_set
    assert solve_conf_lp(inst, dist, method='wolfe').value == pytest.approx(1.5)


def test_multicover_conf_lp(multicover):
    inst, dist = multicover
    frac = solve_conf_lp(inst, dist)
    assert frac.value == pytest.approx(2.0)
    assert frac.value == pytest.approx(solve_conf_lp_full(inst, dist).value)
    assert frac.mass(0) == pytest.approx(2.0, abs=1e-6)
    for set_id in ("S1", "S2", "S3"):
        assert sum(c.y for c in frac.columns if c.set_id == set_id) <= 1.0 + 1e-6
    assert max_dual_violation(inst, dist, frac.duals, frac.betas) <= 1e-6


def test_conf_lp_needs_exact_distribution(shared_set):
    inst, _ = shared_set
    with pytest.raises(NotEvaluableError):
        solve_conf_lp(inst, SamplerDist(2, lambda rng: [0]))


def test_conf_lp_rejects_mismatched_distribution(shared_set):
    inst, _ = shared_set
    with pytest.raises(InvalidInputError):
        solve_conf_lp(inst, IndependentDist([0.5]))


def test_separation_finds_the_shared_set(shared_set):
    inst, dist = shared_set
    hit = separation_sc(inst, 2, np.array([1.0, 1.0]), dist)
    assert hit is not None
    B, violation = hit
    assert B == frozenset({0, 1})
    assert violation == pytest.approx(0.5)
    assert separation_sc(inst, 2, np.array([0.75, 0.75]), dist) is None


def test_randomized_rounding(shared_set):
    inst, dist = shared_set
    frac = solve_conf_lp(inst, dist)
    mapping = round_randomized(frac, inst, dist, seed=0)
    assert mapping.assignment == (("S3",), ("S3",))
    assert mapping_cost(inst, dist, mapping) == pytest.approx(1.5)
    assert mapping.attempts >= 1


def test_randomized_rounding_is_seeded():
    rng = np.random.default_rng(5)
    inst = random_setcover(rng, 6, 5)
    dist = random_scenario_dist(rng, 6)
    frac = solve_conf_lp(inst, dist)
    first = round_randomized(frac, inst, dist, seed=42)
    assert round_randomized(frac, inst, dist, seed=42) == first
    check_mapping(inst, first)
    bound = max(4 * math.log(inst.n), 1.0) * frac.value
    assert mapping_cost(inst, dist, first) <= bound + 1e-9


def test_randomized_rounding_refuses_multicover(multicover):
    inst, dist = multicover
    frac = solve_conf_lp(inst, dist)
    with pytest.raises(InvalidInputError):
        round_randomized(frac, inst, dist, seed=0)


def test_frequency_rounding(shared_set):
    inst, dist = shared_set
    frac = solve_conf_lp(inst, dist)
    mapping = round_frequency(frac, inst, dist)
    assert mapping.assignment == (("S3",), ("S3",))
    assert mapping_cost(inst, dist, mapping) <= inst.max_frequency * frac.value + 1e-9


def test_frequency_rounding_rejects_small_f(shared_set):
    inst, dist = shared_set
    frac = solve_conf_lp(inst, dist)
    with pytest.raises(InvalidInputError):
        round_frequency(frac, inst, dist, f=1)


def test_greedy_multicover(multicover):
    inst, dist = multicover
    result = greedy_multicover(inst, dist)
    assert result.mapping.assignment == (("S1", "S2"), ("S1",))
    assert result.cost == pytest.approx(2.0)
    assert result.paid == pytest.approx(2.0)
    assert result.alpha == pytest.approx([1.0, 0.5])
    assert result.beta == pytest.approx([0.5, 0.0, 0.0])
    assert greedy_certificate_violation(inst, dist, result.alpha, result.beta) == pytest.approx(0.0, abs=1e-12)


def test_greedy_prefers_the_shared_set(shared_set):
    inst, dist = shared_set
    result = greedy_multicover(inst, dist)
    assert result.mapping.assignment == (("S3",), ("S3",))
    assert result.cost == pytest.approx(1.5)


@settings(max_examples=15)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_greedy_certificate_on_random_multicover(seed):
    rng = np.random.default_rng(seed)
    inst = random_setcover(rng, 4, 4, max_requirement=2)
    dist = random_scenario_dist(rng, 4)
    result = greedy_multicover(inst, dist)
    check_mapping(inst, result.mapping)
    assert result.cost <= result.paid + 1e-9
    assert greedy_certificate_violation(inst, dist, result.alpha, result.beta) <= 1e-7


def test_check_mapping_errors(shared_set):
    inst, _ = shared_set
    with pytest.raises(InfeasibleMappingError) as err:
        check_mapping(inst, Mapping.single(["S1"]))
    assert err.value.key == 1
    with pytest.raises(InfeasibleMappingError):
        check_mapping(inst, Mapping.single(["S1", "S1"]))
    with pytest.raises(InfeasibleMappingError):
        check_mapping(inst, Mapping.single(["S1", "S9"]))


def test_saa_sample_size():
    expected = math.ceil(6 / 0.25 * 2 * (2 * math.log(3) + 2 * math.log(2)))
    assert saa_sample_size(2, 3, eps=0.5) == expected
    weighted = saa_sample_size(2, 3, eps=0.5, max_cost=4.0, min_cost=1.0)
    assert weighted == math.ceil(6 / 0.25 * 4 * 2 * (2 * math.log(3) + 2 * math.log(2) + math.log(4)))
    assert saa_sample_size(100, 100, eps=0.1, cap=10) == 10
    with pytest.raises(InvalidInputError):
        saa_sample_size(2, 3, eps=1.5)


@pytest.mark.parametrize('inner', ['lp-round', 'greedy'])
def test_saa_solve(shared_set, inner):
    inst, dist = shared_set
    mapping = saa_solve(inst, dist, samples=20, inner=inner, seed=1)
    assert mapping.assignment == (("S3",), ("S3",))


def test_saa_solve_through_a_sampler(shared_set):
    inst, dist = shared_set
    sampler = SamplerDist(2, dist.sample)
    mapping = saa_solve(inst, sampler, samples=10, seed=3)
    assert sampler.calls == 10
    assert mapping_cost(inst, dist, mapping) == pytest.approx(1.5)


def test_saa_rejects_bad_arguments(shared_set):
    inst, dist = shared_set
    with pytest.raises(InvalidInputError):
        saa_solve(inst, dist, samples=0)
    with pytest.raises(InvalidInputError):
        saa_solve(inst, dist, samples=5, inner='ellipsoid')


def test_nmfl_prefers_cheap_connection():
    inst = make_instance(1, [("F1", 1.0, [0]), ("F2", 0.5, [0])])
    prob = NmflProblem(inst, ConnectionCosts(np.array([[0.0, 1.0]])))
    dist = ScenarioDist(1, [(1.0, [0])])
    frac = solve_conf_lp(prob.instance, dist, prob.conn)
    assert frac.value == pytest.approx(1.0)
    mapping = round_randomized(frac, prob.instance, dist, seed=0, conn=prob.conn)
    assert mapping.assignment == (("F1",),)
    assert mapping_cost(inst, dist, mapping, prob.conn) == pytest.approx(1.0)


def test_nmfl_connection_costs_are_weighted_by_request_probability():
    inst = make_instance(1, [("F1", 1.0, [0])])
    conn = ConnectionCosts(np.array([[2.0]]))
    dist = IndependentDist([0.25])
    assert mapping_cost(inst, dist, Mapping.single(["F1"]), conn) == pytest.approx(0.25 * 1.0 + 0.25 * 2.0)


def test_nmfl_shape_mismatch():
    inst = make_instance(1, [("F1", 1.0, [0])])
    with pytest.raises(InvalidInputError):
        NmflProblem(inst, ConnectionCosts(np.zeros((2, 1))))


def _small_setcover(seed: int, max_requirement: int = 1):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 7)), int(rng.integers(2, 6))
    inst = random_setcover(rng, n, m, max_requirement=max_requirement)
    return inst, random_scenario_dist(rng, n, scenarios=int(rng.integers(1, 6)))


@pytest.mark.parametrize('seed', range(100))
def test_conf_lp_is_a_lower_bound_on_the_best_mapping(seed):
    inst, dist = _small_setcover(seed)
    _, opt = brute_universal(inst, dist)
    assert solve_conf_lp(inst, dist).value <= opt + 1e-6


def test_randomized_rounding_needs_few_attempts():
    attempts = []
    for k in range(20):
        inst, dist = _small_setcover(1000 + k)
        frac = solve_conf_lp(inst, dist)
        bound = max(4 * math.log(inst.n), 1.0) * frac.value
        for seed in range(25):
            mapping = round_randomized(frac, inst, dist, seed=seed)
            check_mapping(inst, mapping)
            assert mapping_cost(inst, dist, mapping) <= bound + 1e-9
            attempts.append(mapping.attempts)
    assert len(attempts) == 500
    assert np.mean(attempts) <= 2.0


@pytest.mark.parametrize('seed', range(100))
def test_greedy_is_within_harmonic_factor_of_the_lp(seed):
    inst, dist = _small_setcover(2000 + seed, max_requirement=2)
    result = greedy_multicover(inst, dist)
    check_mapping(inst, result.mapping)
    assert result.cost <= harmonic(inst.n) * solve_conf_lp(inst, dist).value + 1e-7


@pytest.mark.parametrize('seed', range(100))
def test_frequency_rounding_on_vertex_cover_is_within_twice_the_lp(seed):
    rng = np.random.default_rng(3000 + seed)
    inst = vertex_cover_instance(random_graph(rng, int(rng.integers(3, 7)), 8))
    dist = random_scenario_dist(rng, inst.n, scenarios=int(rng.integers(1, 6)))
    frac = solve_conf_lp(inst, dist)
    mapping = round_frequency(frac, inst, dist)
    check_mapping(inst, mapping)
    assert mapping_cost(inst, dist, mapping) <= 2 * frac.value + 1e-7


def test_saa_estimates_every_subset_within_epsilon():
    exact = IndependentDist([0.5, 0.5])
    sampler = as_sampler(exact)
    eps = 0.5
    samples = saa_sample_size(2, 2, eps=eps)
    subsets = [[0], [1], [0, 1]]
    misses = 0
    for rerun in range(100):
        estimate = empirical_from_matrix(sample_many(sampler, rerun, samples))
        if any(abs(estimate.g(B) - exact.g(B)) > eps * max(exact.g(B), 1 / 2) for B in subsets):
            misses += 1
    assert sampler.calls == 100 * samples
    assert misses <= 1
