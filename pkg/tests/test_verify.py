import csv
import json
import math
import time

import numpy as np
import pytest

from universal_cover.errors import InvalidInputError, SizeLimitError, SolverError
from universal_cover.model import IndependentDist, SamplerDist, ScenarioDist, make_instance
from universal_cover.setcover import ConnectionCosts, Mapping, NmflProblem
from universal_cover.verify import (REPORT_COLUMNS, BenchCase, CostEstimate, brute_universal, expected_cost,
                                    lb_instance, monte_carlo_cost, offline_cost, purchases, ratio_report)


@pytest.fixture
def pair_set():
    return make_instance(2, [("S1", 2.0, [0, 1]), ("S2", 1.0, [0]), ("S3", 1.0, [1])])


def test_shared_set_is_paid_once(pair_set):
    mapping = Mapping.single(["S1", "S1"])
    dist = ScenarioDist(2, [(1.0, [0, 1])])
    assert expected_cost(pair_set, mapping, dist) == pytest.approx(2.0)
    assert offline_cost(pair_set, mapping, {0, 1}) == pytest.approx(2.0)
    assert offline_cost(pair_set, mapping, set()) == 0.0


def test_union_of_requests(pair_set):
    inst = make_instance(2, [("S1", 1.0, [0, 1])])
    assert expected_cost(inst, Mapping.single(["S1", "S1"]), IndependentDist([1.0, 1.0])) == pytest.approx(1.0)
    dist = IndependentDist([0.5, 0.5])
    assert expected_cost(pair_set, Mapping.single(["S2", "S3"]), dist) == pytest.approx(1.0)
    assert expected_cost(pair_set, Mapping.single(["S1", "S1"]), dist) == pytest.approx(1.5)


def test_nmfl_charges():
    inst = make_instance(1, [("F1", 1.0, [0])])
    prob = NmflProblem(inst, ConnectionCosts(np.array([[3.0]])))
    charges = purchases(prob, Mapping.single(["F1"]))
    assert charges == [(1.0, frozenset({0})), (3.0, frozenset({0}))]
    assert expected_cost(prob, Mapping.single(["F1"]), IndependentDist([0.5])) == pytest.approx(2.0)


def test_monte_carlo_matches_exact_cost(pair_set):
    mapping = Mapping.single(["S1", "S1"])
    dist = IndependentDist([0.3, 0.6])
    exact = expected_cost(pair_set, mapping, dist)
    assert exact == pytest.approx(2.0 * (1 - 0.7 * 0.4))
    estimate = monte_carlo_cost(pair_set, mapping, dist, samples=20_000, seed=9)
    assert estimate.samples == 20_000
    assert abs(estimate.mean - exact) <= 4 * estimate.stderr


def test_sampler_distribution_gets_an_estimate(pair_set):
    dist = IndependentDist([1.0, 0.0])
    sampler = SamplerDist(2, dist.sample)
    estimate = expected_cost(pair_set, Mapping.single(["S2", "S3"]), sampler, samples=50)
    assert isinstance(estimate, CostEstimate)
    assert estimate.mean == pytest.approx(1.0)
    assert estimate.stderr == 0.0


def test_evaluation_rejects_infeasible_mapping(pair_set):
    from universal_cover.errors import InfeasibleMappingError

    with pytest.raises(InfeasibleMappingError):
        expected_cost(pair_set, Mapping((("S1",), ())), IndependentDist([0.5, 0.5]))
    with pytest.raises(InvalidInputError):
        expected_cost(pair_set, Mapping.single(["S1", "S1"]))


def test_brute_force_optimum(pair_set):
    mapping, cost = brute_universal(pair_set, ScenarioDist(2, [(1.0, [0, 1])]))
    # S1 (2.0) ties with S2 + S3; the lexicographically first choice is kept
    assert mapping.assignment == (("S1",), ("S1",))
    assert cost == pytest.approx(2.0)
    mapping, cost = brute_universal(pair_set, IndependentDist([0.1, 0.1]))
    assert mapping.assignment == (("S2",), ("S3",))
    assert cost == pytest.approx(0.2)


def test_brute_force_multicover():
    inst = make_instance(2, [("S1", 1.0, [0, 1]), ("S2", 1.0, [0]), ("S3", 3.0, [1])], requirements=[2, 1])
    mapping, cost = brute_universal(inst, ScenarioDist(2, [(1.0, [0, 1])]))
    assert mapping.assignment == (("S1", "S2"), ("S1",))
    assert cost == pytest.approx(2.0)


def test_brute_force_cap():
    inst = make_instance(25, [("A", 1.0, range(25)), ("B", 1.0, range(25))])
    with pytest.raises(SizeLimitError):
        brute_universal(inst, IndependentDist([0.5] * 25))


def test_brute_force_needs_exact_distribution(pair_set):
    with pytest.raises(InvalidInputError):
        brute_universal(pair_set, SamplerDist(2, lambda rng: [0]))
    with pytest.raises(InvalidInputError):
        brute_universal(pair_set)


def test_lower_bound_values():
    family = lb_instance(4, 100)
    inst = family.instance
    assert inst.n == 5
    assert expected_cost(inst, family.phi_singleton, family.singleton_branch) == pytest.approx(5.9)
    assert expected_cost(inst, family.phi_big, family.big_branch) == pytest.approx(10.9)
    assert family.closed_forms['singleton_mapping_singleton_branch'] == pytest.approx(5.9)
    assert family.closed_forms['big_mapping_big_branch'] == pytest.approx(10.9)


@pytest.mark.parametrize('n', [2, 4, 9, 16])
def test_lower_bound_closed_forms_match_evaluation(n):
    family = lb_instance(n, 64)
    mappings = {'singleton_mapping': family.phi_singleton, 'big_mapping': family.phi_big}
    branches = {'singleton_branch': family.singleton_branch, 'big_branch': family.big_branch}
    for key, value in family.closed_forms.items():
        mapping_key, branch_key = key.split('_mapping_')
        cost = expected_cost(family.instance, mappings[f'{mapping_key}_mapping'], branches[branch_key])
        assert cost == pytest.approx(value)


def test_lower_bound_gap_grows_with_n():
    def gap(n):
        family = lb_instance(n, 100)
        branches = (family.singleton_branch, family.big_branch)
        costs = {name: [expected_cost(family.instance, phi, b) for b in branches]
                 for name, phi in (('singleton', family.phi_singleton), ('big', family.phi_big))}
        best = [min(c[k] for c in costs.values()) for k in range(2)]
        return min(max(c[k] / best[k] for k in range(2)) for c in costs.values())

    gaps = [gap(n) for n in (4, 16, 64)]
    assert gaps[0] < gaps[1] < gaps[2]
    assert gaps[0] > 1.0


def test_lower_bound_validation():
    with pytest.raises(InvalidInputError):
        lb_instance(1, 100)
    with pytest.raises(InvalidInputError):
        lb_instance(4, 2)


def test_ratio_report_empty():
    report = ratio_report([], ['greedy'], lambda case, algo: (1.0, 1.0))
    assert report.rows == []
    assert report.aggregate() == {'max_ratio_vs_lp': None, 'mean_ratio_vs_lp': None,
                                  'max_ratio_vs_opt': None, 'mean_ratio_vs_opt': None, 'failed': 0}


def test_ratio_report_keeps_input_order(pair_set):
    dist = ScenarioDist(2, [(1.0, [0, 1])])
    cases = [BenchCase(f"case-{k}", pair_set, dist) for k in range(4)]

    def runner(case, algo):
        # later cases finish first
        time.sleep(0.02 * (4 - int(case.name.split('-')[1])))
        return 3.0, 1.5

    report = ratio_report(cases, ['a', 'b'], runner, workers=4)
    assert [(r['instance'], r['algorithm']) for r in report.rows] == [
        (f"case-{k}", algo) for k in range(4) for algo in ('a', 'b')]
    row = report.rows[0]
    assert row['brute_opt'] == pytest.approx(2.0)
    assert row['ratio_vs_lp'] == pytest.approx(2.0)
    assert row['ratio_vs_opt'] == pytest.approx(1.5)
    assert report.aggregate()['max_ratio_vs_opt'] == pytest.approx(1.5)


def test_ratio_report_records_failures(pair_set):
    def runner(case, algo):
        raise SolverError("no convergence")

    report = ratio_report([BenchCase("only", pair_set, IndependentDist([0.5, 0.5]))], ['x'], runner, brute=False)
    assert report.rows[0]['status'] == 'failed: no convergence'
    assert report.rows[0]['brute_opt'] is None
    assert report.aggregate()['failed'] == 1


def test_ratio_report_zero_cost_case(pair_set):
    report = ratio_report([BenchCase("zero", pair_set, IndependentDist([0.0, 0.0]))], ['x'],
                          lambda case, algo: (0.0, 0.0))
    assert report.rows[0]['ratio_vs_lp'] == 1.0
    assert report.rows[0]['ratio_vs_opt'] == 1.0


def test_report_files(tmp_path, pair_set):
    report = ratio_report([BenchCase("c", pair_set, IndependentDist([0.5, 0.5]))], ['x'],
                          lambda case, algo: (1.5, None))
    report.write_csv(str(tmp_path / 'r.csv'))
    report.write_json(str(tmp_path / 'r.json'))
    with open(tmp_path / 'r.csv') as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == REPORT_COLUMNS
    assert rows[0]['lp_value'] == ''
    assert float(rows[0]['ratio_vs_opt']) == pytest.approx(1.5)
    data = json.loads((tmp_path / 'r.json').read_text())
    assert data['rows'][0]['instance'] == 'c'
    assert math.isclose(data['aggregate']['max_ratio_vs_opt'], 1.5)
