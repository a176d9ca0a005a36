"""Solver dispatcher: (problem kind, algorithm) -> module pipeline"""
import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

from universal_cover.edgecover import GraphInstance, universal_edge_cover
from universal_cover.errors import InvalidInputError, UnsupportedProblemError
from universal_cover.facility import FlInstance, require_independent, round_fl, solve_lp_fl, validate_metric
from universal_cover.model import Distribution, Instance, as_sampler
from universal_cover.multicut import McTreeInstance, round_mc_tree, solve_lp_mc_tree
from universal_cover.setcover import (NmflProblem, greedy_multicover, round_frequency, round_randomized,
                                      saa_sample_size, saa_solve, solve_conf_lp)
from universal_cover.verify import BenchCase, expected_cost

logger = logging.getLogger('universal_cover')

ALGORITHMS: Dict[str, Tuple[str, ...]] = {
    'setcover': ('lp-round', 'freq-round', 'greedy'),
    'multicover': ('greedy',),
    'vertexcover': ('freq-round', 'lp-round', 'greedy'),
    'edgecover': ('exact',),
    'nmfl': ('lp-round',),
    'facility': ('pd-round',),
    'multicut-tree': ('pd-round',),
}

PROBLEMS = tuple(ALGORITHMS)


def algorithm_matrix() -> str:
    """One line per problem kind, for --help texts"""
    return '; '.join(f"{k}: {', '.join(v)}" for k, v in ALGORITHMS.items())


def check_algorithm(problem: str, algorithm: str) -> None:
    if problem not in ALGORITHMS:
        raise InvalidInputError(f"Unknown problem kind '{problem}'")
    if algorithm not in ALGORITHMS[problem]:
        raise InvalidInputError(f"Algorithm '{algorithm}' is not available for {problem} "
                                f"(choose from {', '.join(ALGORITHMS[problem])})")


@dataclass
class SolveResult:
    """Mapping, its exact expected cost and, where the pipeline has one, the LP value"""
    problem: str
    algorithm: str
    mapping: Any
    cost: float
    lp_value: Optional[float] = None
    fractional: Any = None
    details: Dict[str, Any] = field(default_factory=dict)


class CoverSolver:
    """Runs solver pipelines with one seed, SFM method and LP backend"""

    def __init__(self, seed: int = 0, method: Optional[str] = None, with_lp: bool = False):
        self.seed = seed
        self.method = method
        self.with_lp = with_lp

    def _run(self, problem: str, algorithm: str, sizes: str, body: Callable[[], SolveResult]) -> SolveResult:
        """Run a pipeline with request/response logging"""
        logger.info(f"Solver request: {problem}/{algorithm} ({sizes}), seed={self.seed}")
        started = time.perf_counter()
        result = body()
        elapsed = time.perf_counter() - started
        logger.info(f"Solver response: {problem}/{algorithm} cost={result.cost:.12g} "
                    f"lp={result.lp_value if result.lp_value is None else f'{result.lp_value:.12g}'} "
                    f"in {elapsed:.3f}s")
        return result

    def solve(self, problem: str, algorithm: str, instance: Any,
              dist: Optional[Distribution] = None) -> SolveResult:
        check_algorithm(problem, algorithm)
        if problem in ('setcover', 'multicover', 'vertexcover'):
            return self.solve_setcover(problem, algorithm, instance, dist)
        if problem == 'nmfl':
            return self.solve_nmfl(instance, dist)
        if problem == 'edgecover':
            return self.solve_edgecover(instance, dist)
        if problem == 'facility':
            return self.solve_facility(instance, dist)
        return self.solve_multicut(instance, dist)

    def _need_dist(self, dist: Optional[Distribution]) -> Distribution:
        if dist is None:
            raise InvalidInputError("This problem needs a distribution (--dist)")
        return dist

    def solve_setcover(self, problem: str, algorithm: str, inst: Instance,
                       dist: Optional[Distribution]) -> SolveResult:
        dist = self._need_dist(dist)
        if problem == 'multicover' and not inst.is_multicover:
            logger.info("Multicover requested on an instance with r(u) = 1 everywhere")

        def body() -> SolveResult:
            if algorithm == 'greedy':
                res = greedy_multicover(inst, dist, method=self.method)
                lp_value = solve_conf_lp(inst, dist, method=self.method).value if self.with_lp else None
                return SolveResult(problem, algorithm, res.mapping, res.cost, lp_value,
                                   details={'paid': res.paid})
            frac = solve_conf_lp(inst, dist, method=self.method)
            if algorithm == 'lp-round':
                mapping = round_randomized(frac, inst, dist, self.seed)
            else:
                mapping = round_frequency(frac, inst, dist)
            return SolveResult(problem, algorithm, mapping, expected_cost(inst, mapping, dist), frac.value,
                               fractional=frac, details={'attempts': mapping.attempts, 'rounds': frac.rounds})

        return self._run(problem, algorithm, f"n={inst.n}, m={inst.m}, {dist.kind}", body)

    def solve_nmfl(self, prob: NmflProblem, dist: Optional[Distribution]) -> SolveResult:
        dist = self._need_dist(dist)
        inst = prob.instance

        def body() -> SolveResult:
            frac = solve_conf_lp(inst, dist, prob.conn, method=self.method)
            mapping = round_randomized(frac, inst, dist, self.seed, prob.conn)
            return SolveResult('nmfl', 'lp-round', mapping, expected_cost(prob, mapping, dist), frac.value,
                               fractional=frac, details={'attempts': mapping.attempts})

        return self._run('nmfl', 'lp-round', f"n={inst.n}, m={inst.m}, {dist.kind}", body)

    def solve_edgecover(self, g: GraphInstance, dist: Optional[Distribution]) -> SolveResult:
        dist = self._need_dist(dist)

        def body() -> SolveResult:
            mapping = universal_edge_cover(g, dist)
            return SolveResult('edgecover', 'exact', mapping, expected_cost(g, mapping, dist))

        return self._run('edgecover', 'exact', f"V={g.num_vertices}, E={len(g.edges)}, {dist.kind}", body)

    def solve_facility(self, inst: FlInstance, dist: Optional[Distribution] = None) -> SolveResult:
        require_independent(dist)
        if dist is not None:
            if dist.n != inst.num_clients:
                raise InvalidInputError(f"Distribution is over {dist.n} clients, instance has {inst.num_clients}")
            inst = dataclasses.replace(inst, probs=dist.probs)
        if not inst.metric:
            raise UnsupportedProblemError("Instance is flagged non-metric; use --problem nmfl")
        validate_metric(inst)

        def body() -> SolveResult:
            frac = solve_lp_fl(inst)
            mapping = round_fl(inst, frac)
            return SolveResult('facility', 'pd-round', mapping, expected_cost(inst, mapping), frac.value,
                               fractional=frac, details={'big_clients': sorted(mapping.bought)})

        return self._run('facility', 'pd-round', f"clients={inst.num_clients}, facilities={inst.num_facilities}", body)

    def solve_multicut(self, inst: McTreeInstance, dist: Optional[Distribution] = None) -> SolveResult:
        require_independent(dist)
        if dist is not None:
            if dist.n != len(inst.pairs):
                raise InvalidInputError(f"Distribution is over {dist.n} pairs, instance has {len(inst.pairs)}")
            inst = dataclasses.replace(inst, pairs=tuple(dataclasses.replace(p, p=float(q))
                                                         for p, q in zip(inst.pairs, dist.probs)))

        def body() -> SolveResult:
            frac = solve_lp_mc_tree(inst)
            mapping = round_mc_tree(inst, frac)
            return SolveResult('multicut-tree', 'pd-round', mapping, expected_cost(inst, mapping), frac.value,
                               fractional=frac, details={'big_pairs': sorted(mapping.bought)})

        return self._run('multicut-tree', 'pd-round', f"nodes={inst.num_nodes}, pairs={len(inst.pairs)}", body)

    def saa(self, problem: str, algorithm: str, inst: Instance, dist: Distribution,
            samples: int, epsilon: float = 0.5) -> SolveResult:
        """Oracle model: the solver only sees draws of ``dist``; the cost is evaluated exactly when possible"""
        if problem not in ('setcover', 'multicover'):
            raise InvalidInputError(f"SAA supports setcover and multicover, not {problem}")
        if algorithm not in ('lp-round', 'greedy'):
            raise InvalidInputError(f"SAA inner algorithm must be lp-round or greedy, not {algorithm}")
        costs = [s.cost for s in inst.sets if s.cost > 0]
        recommended = saa_sample_size(max(inst.n, 1), max(inst.m, 1), epsilon,
                                      max(costs, default=None), min(costs, default=None))
        if samples < recommended:
            logger.warning(f"SAA with {samples} samples; the accuracy guarantee at epsilon={epsilon} "
                           f"needs {recommended}")
        oracle = as_sampler(dist) if dist.exact else dist

        def body() -> SolveResult:
            mapping = saa_solve(inst, oracle, samples, inner=algorithm, seed=self.seed, method=self.method)
            cost = expected_cost(inst, mapping, dist, seed=self.seed)
            value = cost if isinstance(cost, float) else cost.mean
            return SolveResult(problem, algorithm, mapping, value,
                               details={'samples': samples, 'recommended_samples': recommended,
                                        'oracle_calls': oracle.calls})

        return self._run(problem, f"saa/{algorithm}", f"n={inst.n}, m={inst.m}, N={samples}", body)

    def bench_runner(self, problem: str) -> Callable[[BenchCase, str], Tuple[float, Optional[float]]]:
        """Row runner for verify.ratio_report"""
        def run(case: BenchCase, algorithm: str) -> Tuple[float, Optional[float]]:
            result = self.solve(problem, algorithm, case.problem, case.dist)
            return result.cost, result.lp_value
        return run
