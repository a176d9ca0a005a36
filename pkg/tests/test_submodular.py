import numpy as np
import pytest
from hypothesis import given, strategies as st

from universal_cover.errors import InvalidInputError, SizeLimitError
from universal_cover.generators import random_submodular
from universal_cover.model import ScenarioDist
from universal_cover.submodular import (BRUTE_MAX_GROUND, SubmodularOracle, minimize, minimize_brute,
                                        minimize_ratio, minimize_wolfe)


def modular(weights):
    return SubmodularOracle(range(len(weights)), lambda s: sum(weights[u] for u in s))


def test_minimize_modular_picks_negative_weights():
    f = modular([1.0, -2.0, 0.5, -0.1])
    for minimizer in (minimize_brute, minimize_wolfe):
        best, value = minimizer(f)
        assert best == frozenset({1, 3})
        assert value == pytest.approx(-2.1)


def test_minimize_prefers_smaller_set_on_ties():
    f = modular([0.0, 0.0, -1.0])
    for method in ('brute', 'wolfe'):
        best, value = minimize(f, method=method)
        assert best == frozenset({2})
        assert value == pytest.approx(-1.0)


def test_minimize_empty_ground():
    f = SubmodularOracle((), lambda s: 0.0)
    assert minimize_brute(f) == (frozenset(), 0.0)
    assert minimize_wolfe(f) == (frozenset(), 0.0)


def test_coverage_minus_weights():
    dist = ScenarioDist(3, [(0.5, [0, 1]), (0.5, [2])])
    weights = [0.4, 0.4, 0.7]
    f = SubmodularOracle(range(3), lambda s: 2 * dist.g(s) - sum(weights[u] for u in s))
    best, value = minimize_brute(f)
    # {0,1} costs 1 - 0.8, {2} costs 1 - 0.7; nothing beats the empty set
    assert best == frozenset()
    assert value == 0.0
    f2 = SubmodularOracle(range(3), lambda s: 2 * dist.g(s) - sum(1.2 * weights[u] for u in s) - (0.5 if 2 in s else 0))
    best, value = minimize_wolfe(f2)
    assert best == frozenset({2})
    assert value == pytest.approx(1 - 0.84 - 0.5)


def test_brute_cap():
    f = SubmodularOracle(range(BRUTE_MAX_GROUND + 1), lambda s: 0.0)
    with pytest.raises(SizeLimitError):
        minimize_brute(f)


def test_unknown_method():
    with pytest.raises(InvalidInputError):
        minimize(modular([1.0]), method='ellipsoid')


@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.integers(min_value=1, max_value=9), st.booleans())
def test_wolfe_agrees_with_enumeration(seed, size, integral):
    rng = np.random.default_rng(seed)
    f = random_submodular(rng, size, integral=integral)
    _, brute_value = minimize_brute(f)
    _, wolfe_value = minimize_wolfe(f)
    assert wolfe_value == pytest.approx(brute_value, abs=1e-7)


def test_memoization_counts_evaluations():
    f = modular([1.0, 2.0])
    f({0})
    f({0})
    f(frozenset({0}))
    assert f.evaluations == 1


def test_ratio_of_modular_function_is_cheapest_singleton():
    history = []
    best, ratio = minimize_ratio(modular([3.0, 1.0, 2.0]), history=history)
    assert best == frozenset({1})
    assert ratio == pytest.approx(1.0)
    assert history == sorted(history, reverse=True)
    assert len(set(history)) == len(history)


def test_ratio_prefers_shared_cost():
    # one set of cost 3 covering three elements beats any singleton of cost 2
    f = SubmodularOracle(range(3), lambda s: 3.0 if s else 0.0)
    f2 = SubmodularOracle(range(3), lambda s: min(f(s), 2.0 * len(s)))
    best, ratio = minimize_ratio(f2)
    assert best == frozenset({0, 1, 2})
    assert ratio == pytest.approx(1.0)


def test_ratio_keeps_ground_when_nothing_improves():
    f = modular([1.0, 1.0, 1.0])
    best, ratio = minimize_ratio(f)
    assert best == frozenset({0, 1, 2})
    assert ratio == pytest.approx(1.0)


def test_ratio_needs_nonempty_ground():
    with pytest.raises(InvalidInputError):
        minimize_ratio(SubmodularOracle((), lambda s: 0.0))


@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.integers(min_value=1, max_value=7))
def test_ratio_matches_enumeration(seed, size):
    rng = np.random.default_rng(seed)
    dist = ScenarioDist(size, [(1.0, rng.choice(size, size=max(1, size // 2), replace=False).tolist())])
    cost = float(rng.integers(1, 5))
    f = SubmodularOracle(range(size), lambda s: cost * dist.g(s) if s else 0.0)
    _, ratio = minimize_ratio(f, method='brute')
    expected = min(f(s) / len(s) for s in (frozenset(u for u in range(size) if mask >> u & 1)
                                          for mask in range(1, 1 << size)))
    assert ratio == pytest.approx(expected, abs=1e-9)
