"""Ground truth: expected costs, brute-force universal optima, lower-bound family, ratio reports

Every mapping is reduced to a list of charges (coefficient, element set); its
expected cost is sum(coef * g(B)) and its cost on a request set X is the sum
of the coefficients whose set meets X.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import singledispatch
from itertools import combinations, product
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union
import csv
import json
import logging
import math

import numpy as np

from universal_cover.config import get_settings
from universal_cover.edgecover import GraphInstance, edge_cover_instance
from universal_cover.errors import InvalidInputError, SizeLimitError, UniversalCoverError
from universal_cover.facility import FlInstance, FlMapping, check_fl_mapping
from universal_cover.model import CoverSet, Distribution, Instance, ScenarioDist
from universal_cover.multicut import McMapping, McTreeInstance, check_mc_mapping
from universal_cover.setcover import Mapping, NmflProblem, check_mapping
from universal_cover.utils import rng_stream

logger = logging.getLogger('universal_cover')

BRUTE_CAP = 1 << 24

Charge = Tuple[float, FrozenSet[int]]


@dataclass(frozen=True)
class CostEstimate:
    """Monte Carlo mean with its standard error"""
    mean: float
    stderr: float
    samples: int


@singledispatch
def purchases(problem, mapping) -> List[Charge]:
    """Charges (coefficient, element set) paid by ``mapping`` on ``problem``"""
    raise InvalidInputError(f"Unsupported problem type {type(problem).__name__}")


@purchases.register
def _(problem: Instance, mapping: Mapping) -> List[Charge]:
    check_mapping(problem, mapping)
    return [(problem.get(s).cost, pre) for s, pre in sorted(mapping.preimages().items())]


@purchases.register
def _(problem: NmflProblem, mapping: Mapping) -> List[Charge]:
    charges = purchases(problem.instance, mapping)
    for u, ids in enumerate(mapping.assignment):
        for s in ids:
            charges.append((problem.conn.d(u, problem.instance.index[s]), frozenset((u,))))
    return charges


@purchases.register
def _(problem: FlInstance, mapping: FlMapping) -> List[Charge]:
    check_fl_mapping(problem, mapping)
    pre: Dict[int, set] = {}
    for c, f in enumerate(mapping.assignment):
        pre.setdefault(f, set()).add(c)
    charges = [(float(problem.open_costs[f]), frozenset(cs)) for f, cs in sorted(pre.items())]
    charges.extend((float(problem.dist[c, f]), frozenset((c,))) for c, f in enumerate(mapping.assignment))
    return charges


@purchases.register
def _(problem: McTreeInstance, mapping: McMapping) -> List[Charge]:
    check_mc_mapping(problem, mapping)
    users: Dict[int, set] = {}
    for c, cut in enumerate(mapping.cuts):
        for e in cut:
            users.setdefault(e, set()).add(c)
    return [(problem.edges[e].cost, frozenset(cs)) for e, cs in sorted(users.items())]


@purchases.register
def _(problem: GraphInstance, mapping: Mapping) -> List[Charge]:
    return purchases(edge_cover_instance(problem), mapping)


def default_distribution(problem) -> Optional[Distribution]:
    """Facility and multicut instances carry their own activation probabilities"""
    if isinstance(problem, (FlInstance, McTreeInstance)):
        return problem.distribution
    return None


def expected_cost(problem, mapping, dist: Optional[Distribution] = None,
                  samples: Optional[int] = None, seed: int = 0) -> Union[float, CostEstimate]:
    """Exact expected cost, or a Monte Carlo estimate for sampler distributions"""
    dist = dist or default_distribution(problem)
    if dist is None:
        raise InvalidInputError("A distribution is required to evaluate this problem")
    charges = purchases(problem, mapping)
    if not dist.exact:
        return monte_carlo_cost(problem, mapping, dist, samples=samples, seed=seed)
    return float(sum(coef * dist.g(B) for coef, B in charges if coef))


def monte_carlo_cost(problem, mapping, dist: Optional[Distribution] = None,
                     samples: Optional[int] = None, seed: int = 0) -> CostEstimate:
    """Mean cost over seeded draws of X with its standard error"""
    dist = dist or default_distribution(problem)
    samples = samples or get_settings().mc_samples
    if samples < 1:
        raise InvalidInputError(f"Monte Carlo needs at least one sample, got {samples}")
    charges = purchases(problem, mapping)
    matrix = dist.sample_matrix(rng_stream(seed, 'monte-carlo'), samples)
    costs = np.zeros(samples)
    for coef, B in charges:
        if coef and B:
            costs += coef * matrix[:, sorted(B)].any(axis=1)
    stderr = float(costs.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return CostEstimate(mean=float(costs.mean()), stderr=stderr, samples=samples)


def offline_cost(problem, mapping, scenario: Iterable[int]) -> float:
    """Cost of serving one request set X with the mapping"""
    x = frozenset(scenario)
    return float(sum(coef for coef, B in purchases(problem, mapping) if B & x))


def _check_size(size: int) -> None:
    if size > BRUTE_CAP:
        raise SizeLimitError(f"Brute force would enumerate {size} mappings (cap {BRUTE_CAP})",
                             size=size, cap=BRUTE_CAP)


def _enumerate(choices: Sequence[Sequence[Any]], cost_of: Callable[[Tuple], float]) -> Tuple[Tuple, float]:
    size = math.prod(len(c) for c in choices)
    _check_size(size)
    best, best_cost = None, math.inf
    for combo in product(*choices):
        cost = cost_of(combo)
        if best is None or cost < best_cost - 1e-12:
            best, best_cost = combo, cost
    logger.debug(f"Brute force enumerated {size} mappings, optimum {best_cost:.12g}")
    return best, best_cost


def _need(dist: Optional[Distribution]) -> Distribution:
    if dist is None:
        raise InvalidInputError("A distribution is required for brute force")
    if not dist.exact:
        raise InvalidInputError("Brute force needs an exactly evaluable distribution")
    return dist


@singledispatch
def brute_universal(problem, dist: Optional[Distribution] = None):
    """Optimal universal mapping by enumeration, ties to the lexicographically first"""
    raise InvalidInputError(f"Unsupported problem type {type(problem).__name__}")


def _brute_sets(inst: Instance, dist: Distribution, conn=None) -> Tuple[Mapping, float]:
    inst.check_feasible()
    if dist.n != inst.n:
        raise InvalidInputError(f"Distribution is over {dist.n} elements, instance has {inst.n}")
    choices = [list(combinations(inst.containing[u], inst.requirements[u])) for u in range(inst.n)]
    gm = dist.g_mask
    costs = [s.cost for s in inst.sets]
    extra = None
    if conn is not None:
        extra = [[conn.d(u, j) * dist.g((u,)) for j in range(inst.m)] for u in range(inst.n)]

    def cost_of(combo) -> float:
        masks = [0] * inst.m
        total = 0.0
        for u, js in enumerate(combo):
            for j in js:
                masks[j] |= 1 << u
                if extra is not None:
                    total += extra[u][j]
        return total + sum(costs[j] * gm(mask) for j, mask in enumerate(masks) if mask)

    combo, cost = _enumerate(choices, cost_of)
    return Mapping(tuple(tuple(inst.sets[j].id for j in js) for js in combo)), cost


@brute_universal.register
def _(problem: Instance, dist: Optional[Distribution] = None):
    return _brute_sets(problem, _need(dist))


@brute_universal.register
def _(problem: NmflProblem, dist: Optional[Distribution] = None):
    return _brute_sets(problem.instance, _need(dist), problem.conn)


@brute_universal.register
def _(problem: GraphInstance, dist: Optional[Distribution] = None):
    return _brute_sets(edge_cover_instance(problem), _need(dist))


@brute_universal.register
def _(problem: FlInstance, dist: Optional[Distribution] = None):
    dist = _need(dist or problem.distribution)
    nc, nf = problem.num_clients, problem.num_facilities
    gm = dist.g_mask
    conn = [[problem.dist[c, f] * dist.g((c,)) for f in range(nf)] for c in range(nc)]

    def cost_of(combo) -> float:
        masks = [0] * nf
        total = 0.0
        for c, f in enumerate(combo):
            masks[f] |= 1 << c
            total += conn[c][f]
        return total + sum(problem.open_costs[f] * gm(mask) for f, mask in enumerate(masks) if mask)

    combo, cost = _enumerate([range(nf)] * nc, cost_of)
    return FlMapping(tuple(combo)), cost


@brute_universal.register
def _(problem: McTreeInstance, dist: Optional[Distribution] = None):
    dist = _need(dist or problem.distribution)
    gm = dist.g_mask
    ne = len(problem.edges)

    def cost_of(combo) -> float:
        masks = [0] * ne
        for c, e in enumerate(combo):
            masks[e] |= 1 << c
        return sum(problem.edges[e].cost * gm(mask) for e, mask in enumerate(masks) if mask)

    combo, cost = _enumerate([sorted(p) for p in problem.paths], cost_of)
    return McMapping(tuple(frozenset((e,)) for e in combo)), cost


@dataclass
class LowerBoundFamily:
    """Instance with a dummy element, both adversary branches and their canonical mappings"""
    n: int
    big_cost: float
    instance: Instance
    singleton_branch: ScenarioDist
    big_branch: ScenarioDist
    phi_singleton: Mapping
    phi_big: Mapping
    closed_forms: Dict[str, float]


def lb_instance(n: int, big_cost: float) -> LowerBoundFamily:
    """Universe W = {0..n-1} plus dummy d = n

    S_d = {d} costs 1, each singleton S_i = {i} costs M/sqrt(n), S_W = W costs M.
    X_d = {d} has probability 1 - 1/sqrt(M); the rest goes either to one
    uniformly chosen singleton {w} (singleton branch) or to all of W (big branch).
    """
    if n < 2:
        raise InvalidInputError(f"Lower-bound family needs n >= 2, got {n}")
    if big_cost < 4:
        raise InvalidInputError(f"Lower-bound family needs M >= 4, got {big_cost}")
    M = float(big_cost)
    d = n
    rare = 1.0 / math.sqrt(M)
    sets = [CoverSet('S_d', 1.0, frozenset((d,)))]
    sets += [CoverSet(f'S_{i}', M / math.sqrt(n), frozenset((i,))) for i in range(n)]
    sets.append(CoverSet('S_W', M, frozenset(range(n))))
    inst = Instance(n=n + 1, sets=tuple(sets))
    singleton_branch = ScenarioDist(n + 1, [(1.0 - rare, (d,))] + [(rare / n, (i,)) for i in range(n)])
    big_branch = ScenarioDist(n + 1, [(1.0 - rare, (d,)), (rare, range(n))])
    phi_singleton = Mapping.single([f'S_{i}' for i in range(n)] + ['S_d'])
    phi_big = Mapping.single(['S_W'] * n + ['S_d'])
    closed = {
        'singleton_mapping_singleton_branch': (1.0 - rare) * 1.0 + rare * (M / math.sqrt(n)),
        'big_mapping_big_branch': (1.0 - rare) * 1.0 + rare * M,
        'singleton_mapping_big_branch': (1.0 - rare) * 1.0 + rare * n * (M / math.sqrt(n)),
        'big_mapping_singleton_branch': (1.0 - rare) * 1.0 + rare * M,
    }
    return LowerBoundFamily(n=n, big_cost=M, instance=inst, singleton_branch=singleton_branch,
                            big_branch=big_branch, phi_singleton=phi_singleton, phi_big=phi_big,
                            closed_forms=closed)


REPORT_COLUMNS = ['instance', 'algorithm', 'cost', 'lp_value', 'brute_opt', 'ratio_vs_lp', 'ratio_vs_opt', 'status']


@dataclass
class BenchCase:
    """One benchmark row source: a named problem with its distribution"""
    name: str
    problem: Any
    dist: Optional[Distribution] = None


@dataclass
class RatioReport:
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def _values(self, key: str) -> List[float]:
        return [r[key] for r in self.rows if r.get(key) is not None]

    def aggregate(self) -> Dict[str, Optional[float]]:
        out: Dict[str, Optional[float]] = {}
        for key in ('ratio_vs_lp', 'ratio_vs_opt'):
            vals = self._values(key)
            out[f'max_{key}'] = max(vals) if vals else None
            out[f'mean_{key}'] = float(np.mean(vals)) if vals else None
        out['failed'] = sum(1 for r in self.rows if r['status'] != 'ok')
        return out

    def to_json(self) -> dict:
        return {'rows': self.rows, 'aggregate': self.aggregate()}

    def write_csv(self, path: str) -> None:
        with open(path, 'w', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=REPORT_COLUMNS)
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: ('' if row.get(k) is None else row[k]) for k in REPORT_COLUMNS})

    def write_json(self, path: str) -> None:
        with open(path, 'w') as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=True)
            f.write('\n')


def _ratio(cost: Optional[float], base: Optional[float]) -> Optional[float]:
    if cost is None or base is None:
        return None
    if base <= 1e-12:
        return 1.0 if cost <= 1e-9 else None
    return cost / base


def ratio_report(cases: Sequence[BenchCase], algorithms: Sequence[str],
                 runner: Callable[[BenchCase, str], Tuple[float, Optional[float]]],
                 brute: bool = True, workers: int = 1) -> RatioReport:
    """Run every algorithm on every case; rows keep input order whatever the completion order

    ``runner(case, algorithm)`` returns (expected cost, LP value or None).
    """
    def brute_opt(case: BenchCase) -> Tuple[Optional[float], Optional[str]]:
        if not brute:
            return None, None
        try:
            return brute_universal(case.problem, case.dist)[1], None
        except UniversalCoverError as e:
            return None, str(e)

    def row(job: Tuple[BenchCase, str, Optional[float], Optional[str]]) -> Dict[str, Any]:
        case, algo, opt, brute_error = job
        out = {'instance': case.name, 'algorithm': algo, 'cost': None, 'lp_value': None,
               'brute_opt': opt, 'ratio_vs_lp': None, 'ratio_vs_opt': None, 'status': 'ok'}
        try:
            cost, lp_value = runner(case, algo)
        except UniversalCoverError as e:
            logger.warning(f"Bench row {case.name}/{algo} failed: {e}")
            out['status'] = f'failed: {e}'
            return out
        out.update(cost=cost, lp_value=lp_value,
                   ratio_vs_lp=_ratio(cost, lp_value), ratio_vs_opt=_ratio(cost, opt))
        if brute_error:
            out['status'] = f'brute failed: {brute_error}'
        return out

    opts = [brute_opt(case) for case in cases]
    jobs = [(case, algo, opt, err) for case, (opt, err) in zip(cases, opts) for algo in algorithms]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, jobs))
    else:
        rows = [row(job) for job in jobs]
    logger.info(f"Ratio report: {len(rows)} rows over {len(cases)} instances")
    return RatioReport(rows=rows)
