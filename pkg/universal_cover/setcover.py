"""Universal stochastic set cover, multicover and non-metric facility location

The configuration LP has one column y[S,B] per covering set S and served
subset B of S. It is solved through its dual: a cutting-plane master over the
element prices alpha (plus per-set capacity prices beta in multicover mode),
separated by minimizing the submodular function

    h_S(B) = c(S) g(B) + sum_{u in B} d(u,S) g({u}) - sum_{u in B} alpha_u + beta_S

The cut pool then becomes the column set of a restricted primal solve.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from universal_cover.config import get_settings
from universal_cover.errors import (InfeasibleMappingError, InvalidInputError, NotEvaluableError,
                                    SizeLimitError, SolverError)
from universal_cover.lpcore import Constraint, LinearProgram, cutting_plane, solve_lp
from universal_cover.model import Distribution, ElementSet, Instance, empirical_from_matrix
from universal_cover.submodular import SubmodularOracle, minimize, minimize_ratio
from universal_cover.utils import TOL, harmonic, rng_stream

logger = logging.getLogger('universal_cover')

SEPARATION_TOL = 1e-7
MASS_TOL = 1e-6
ROUNDING_ATTEMPTS = 1000
FULL_LP_MAX_COLUMNS = 200_000
CERTIFICATE_MAX_SUBSETS = 1 << 22


@dataclass(frozen=True)
class Column:
    set_id: str
    elements: ElementSet
    y: float


@dataclass
class FractionalCover:
    """Configuration LP solution: weighted (S,B) columns plus dual prices"""
    columns: List[Column]
    duals: np.ndarray
    value: float
    betas: Optional[np.ndarray] = None
    dual_value: Optional[float] = None
    rounds: int = 0

    def mass(self, u: int, set_id: Optional[str] = None) -> float:
        """Total weight of columns serving u (restricted to one set if given)"""
        return float(sum(c.y for c in self.columns
                         if u in c.elements and (set_id is None or c.set_id == set_id)))

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "columns": [{"set": c.set_id, "B": sorted(c.elements), "y": c.y} for c in self.columns],
            "duals": [float(a) for a in self.duals],
        }


@dataclass(frozen=True)
class Mapping:
    """phi(u): r(u) distinct set ids per element, in assignment order"""
    assignment: Tuple[Tuple[str, ...], ...]
    attempts: int = field(default=1, compare=False)

    @classmethod
    def single(cls, sets: Sequence[str], attempts: int = 1) -> "Mapping":
        return cls(tuple((s,) for s in sets), attempts)

    def preimages(self) -> Dict[str, FrozenSet[int]]:
        """Set id -> elements mapped into it"""
        pre: Dict[str, set] = {}
        for u, ids in enumerate(self.assignment):
            for s in ids:
                pre.setdefault(s, set()).add(u)
        return {s: frozenset(els) for s, els in pre.items()}

    def to_json(self) -> dict:
        return {"assignment": {str(u): list(ids) for u, ids in enumerate(self.assignment)}}


@dataclass(frozen=True)
class ConnectionCosts:
    """d(u,S) per (element, set position); paid when u is requested"""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise InvalidInputError("Connection costs must be an (elements x sets) matrix")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise InvalidInputError("Connection costs must be finite and non-negative")
        object.__setattr__(self, 'matrix', m)

    def check(self, inst: Instance) -> None:
        if self.matrix.shape != (inst.n, inst.m):
            raise InvalidInputError(f"Connection costs have shape {self.matrix.shape}, "
                                    f"expected {(inst.n, inst.m)}")

    def d(self, u: int, j: int) -> float:
        return float(self.matrix[u, j])


@dataclass(frozen=True)
class NmflProblem:
    """Non-metric facility location: facilities as sets over clients plus connection costs"""
    instance: Instance
    conn: ConnectionCosts

    def __post_init__(self):
        self.conn.check(self.instance)


@dataclass
class GreedyResult:
    mapping: Mapping
    alpha: np.ndarray
    beta: np.ndarray
    paid: float
    cost: float
    prices: List[List[float]]


def _require_exact(dist: Distribution) -> None:
    if not dist.exact:
        raise NotEvaluableError()


def _check_dims(inst: Instance, dist: Distribution, conn: Optional[ConnectionCosts]) -> None:
    if dist.n != inst.n:
        raise InvalidInputError(f"Distribution is over {dist.n} elements, instance has {inst.n}")
    if conn is not None:
        conn.check(inst)


def column_cost(inst: Instance, dist: Distribution, j: int, elements: ElementSet,
                conn: Optional[ConnectionCosts] = None) -> float:
    """c(S) g(B) plus the connection charge of B"""
    cost = inst.sets[j].cost * dist.g(elements)
    if conn is not None:
        cost += sum(conn.d(u, j) * dist.g((u,)) for u in elements)
    return cost


def check_mapping(inst: Instance, mapping: Mapping) -> None:
    """Raise InfeasibleMappingError unless phi(u) is r(u) distinct sets containing u"""
    if len(mapping.assignment) > inst.n:
        raise InvalidInputError(f"Mapping assigns {len(mapping.assignment)} elements, instance has {inst.n}")
    if len(mapping.assignment) < inst.n:
        missing = len(mapping.assignment)
        raise InfeasibleMappingError(f"Mapping covers {len(mapping.assignment)} of {inst.n} elements; "
                                     f"element {missing} is unassigned", key=missing)
    for u, ids in enumerate(mapping.assignment):
        if len(set(ids)) != len(ids):
            raise InfeasibleMappingError(f"Element {u} is assigned the same set twice", key=u)
        if len(ids) < inst.requirements[u]:
            raise InfeasibleMappingError(f"Element {u} needs {inst.requirements[u]} sets, "
                                         f"mapping gives {len(ids)}", key=u)
        for s in ids:
            if s not in inst.index:
                raise InfeasibleMappingError(f"Element {u} is mapped to unknown set '{s}'", key=u)
            if u not in inst.get(s).elements:
                raise InfeasibleMappingError(f"Element {u} is mapped to set '{s}' which does not contain it", key=u)


def mapping_cost(inst: Instance, dist: Distribution, mapping: Mapping,
                 conn: Optional[ConnectionCosts] = None) -> float:
    """Exact expected cost: sum_S c(S) g(phi^-1(S)) plus connection charges"""
    check_mapping(inst, mapping)
    total = 0.0
    for s, pre in sorted(mapping.preimages().items()):
        total += inst.get(s).cost * dist.g(pre)
    if conn is not None:
        for u, ids in enumerate(mapping.assignment):
            for s in ids:
                total += conn.d(u, inst.index[s]) * dist.g((u,))
    return total


def separation_sc(inst: Instance, j: int, alpha: np.ndarray, dist: Distribution,
                  conn: Optional[ConnectionCosts] = None, beta: float = 0.0,
                  method: Optional[str] = None) -> Optional[Tuple[ElementSet, float]]:
    """Most violated dual constraint of set j, as (B, violation), or None"""
    s = inst.sets[j]

    def h(subset: FrozenSet[int]) -> float:
        if not subset:
            return beta
        return column_cost(inst, dist, j, subset, conn) - sum(alpha[u] for u in subset) + beta

    B, value = minimize(SubmodularOracle(s.elements, h), method=method)
    if value < -SEPARATION_TOL:
        return B, -value
    return None


def _cut(inst: Instance, dist: Distribution, j: int, elements: ElementSet,
         conn: Optional[ConnectionCosts], multicover: bool) -> Constraint:
    coeffs = {u: 1.0 for u in elements}
    if multicover:
        coeffs[inst.n + j] = -1.0
    return Constraint(coeffs, '<=', column_cost(inst, dist, j, elements, conn), tag=(j, elements))


def _restricted_primal(inst: Instance, dist: Distribution, tags: Sequence[Tuple[int, ElementSet]],
                       conn: Optional[ConnectionCosts], multicover: bool, name: str):
    costs = np.array([column_cost(inst, dist, j, B, conn) for j, B in tags])
    lp = LinearProgram(objective=costs, sense='min', name=name)
    for u in range(inst.n):
        lp.add(Constraint({k: 1.0 for k, (_, B) in enumerate(tags) if u in B}, '>=',
                          float(inst.requirements[u]), tag=('cover', u)))
    if multicover:
        for j in range(inst.m):
            coeffs = {k: 1.0 for k, (jj, _) in enumerate(tags) if jj == j}
            lp.add(Constraint(coeffs, '<=', 1.0, tag=('capacity', j)))
    return lp, solve_lp(lp)


def _columns(inst: Instance, tags: Sequence[Tuple[int, ElementSet]], y: np.ndarray) -> List[Column]:
    return [Column(inst.sets[j].id, B, float(v)) for (j, B), v in zip(tags, y) if v > 1e-12]


def check_strong_duality(primal_value: float, dual_value: float, rel_tol: float = 1e-6, **diagnostics) -> None:
    """Raise SolverError unless the two values agree within rel_tol (relative, floored at 1)"""
    gap = abs(primal_value - dual_value)
    if gap > rel_tol * max(1.0, abs(dual_value)):
        raise SolverError(f"Restricted primal value {primal_value:.12g} differs from dual value {dual_value:.12g}",
                          diagnostics={'primal': primal_value, 'dual': dual_value, 'gap': gap, **diagnostics})


def solve_conf_lp(inst: Instance, dist: Distribution, conn: Optional[ConnectionCosts] = None,
                  method: Optional[str] = None) -> FractionalCover:
    """Configuration LP by cutting planes on its dual plus a restricted primal solve

    The master starts from the singleton cuts (S,{u}) and, for multicover, the
    full-set cuts (S,S); both are genuine dual rows and keep the master bounded.
    """
    _require_exact(dist)
    _check_dims(inst, dist, conn)
    inst.check_feasible()
    n, m = inst.n, inst.m
    multicover = inst.is_multicover
    logger.info(f"Solving configuration LP: n={n}, m={m}, multicover={multicover}, "
                f"connection_costs={conn is not None}")

    if n == 0:
        return FractionalCover(columns=[], duals=np.zeros(0), value=0.0,
                               betas=np.zeros(m) if multicover else None, dual_value=0.0)

    objective = np.concatenate([np.array(inst.requirements, dtype=float),
                                -np.ones(m) if multicover else np.zeros(0)])
    master = LinearProgram(objective=objective, sense='max', name='dp-sc')
    seeds: List[Constraint] = []
    for j, s in enumerate(inst.sets):
        for u in sorted(s.elements):
            seeds.append(_cut(inst, dist, j, frozenset((u,)), conn, multicover))
        if multicover and len(s.elements) > 1:
            seeds.append(_cut(inst, dist, j, s.elements, conn, multicover))
    seen = set()
    for cut in seeds:
        if cut.tag not in seen:
            seen.add(cut.tag)
            master.add(cut)

    def separator(x: np.ndarray) -> List[Constraint]:
        alpha = x[:n]
        found = []
        for j in range(m):
            beta = float(x[n + j]) if multicover else 0.0
            hit = separation_sc(inst, j, alpha, dist, conn, beta=beta, method=method)
            if hit is not None:
                logger.debug(f"Set '{inst.sets[j].id}' violated by {hit[1]:.3e} on {sorted(hit[0])}")
                found.append(_cut(inst, dist, j, hit[0], conn, multicover))
        return found

    result = cutting_plane(master, separator, size_hint=n)
    tags = [c.tag for c in master.constraints]
    lp, primal = _restricted_primal(inst, dist, tags, conn, multicover, 'conf-lp-restricted')
    check_strong_duality(primal.value, result.value, rounds=result.rounds)
    frac = FractionalCover(
        columns=_columns(inst, tags, primal.x),
        duals=np.asarray(result.x[:n], dtype=float),
        value=primal.value,
        betas=np.asarray(result.x[n:], dtype=float) if multicover else None,
        dual_value=result.value,
        rounds=result.rounds,
    )
    return normalize_cover(frac, inst, dist, conn)


def solve_conf_lp_full(inst: Instance, dist: Distribution,
                       conn: Optional[ConnectionCosts] = None) -> FractionalCover:
    """Configuration LP over every (S,B) column"""
    _require_exact(dist)
    _check_dims(inst, dist, conn)
    inst.check_feasible()
    total = sum((1 << len(s.elements)) - 1 for s in inst.sets)
    if total > FULL_LP_MAX_COLUMNS:
        raise SizeLimitError(f"Full configuration LP needs {total} columns (cap {FULL_LP_MAX_COLUMNS})",
                             size=total, cap=FULL_LP_MAX_COLUMNS)
    tags = []
    for j, s in enumerate(inst.sets):
        els = sorted(s.elements)
        for k in range(1, len(els) + 1):
            tags.extend((j, frozenset(c)) for c in combinations(els, k))
    multicover = inst.is_multicover
    if inst.n == 0:
        return FractionalCover(columns=[], duals=np.zeros(0), value=0.0)
    lp, primal = _restricted_primal(inst, dist, tags, conn, multicover, 'conf-lp-full')
    return FractionalCover(
        columns=_columns(inst, tags, primal.x),
        duals=primal.duals[:inst.n].copy(),
        value=primal.value,
        betas=-primal.duals[inst.n:].copy() if multicover else None,
        dual_value=primal.value,
    )


def _uncross(cols: Dict[ElementSet, float]) -> Dict[ElementSet, float]:
    """Replace one set's columns by a chain B_1 > B_2 > ... serving every u with the same mass

    Uncrossing (A,B) -> (A|B, A&B) keeps the coverage and, c g being submodular,
    never raises the cost; its limit is the chain below, whose total mass is
    the largest per-element mass.
    """
    mass: Dict[int, float] = {}
    for B, y in cols.items():
        for u in B:
            mass[u] = mass.get(u, 0.0) + y
    levels = sorted({m for m in mass.values() if m > 1e-12}, reverse=True)
    chain: Dict[ElementSet, float] = {}
    for k, level in enumerate(levels):
        below = levels[k + 1] if k + 1 < len(levels) else 0.0
        chain[frozenset(u for u, m in mass.items() if m >= level)] = level - below
    return chain


def normalize_cover(frac: FractionalCover, inst: Instance, dist: Distribution,
                    conn: Optional[ConnectionCosts] = None) -> FractionalCover:
    """Trim over-covered elements so each u carries mass exactly r(u)

    Surplus on u is removed by moving weight from a column (S,B) to (S,B-{u});
    g is monotone, so the value never increases. Without capacity rows a set
    may then still carry total mass above 1; its columns are uncrossed into a
    chain of mass at most 1, which randomized rounding samples from directly.
    """
    cols: Dict[Tuple[str, ElementSet], float] = {}
    for c in frac.columns:
        cols[(c.set_id, c.elements)] = cols.get((c.set_id, c.elements), 0.0) + c.y
    for u in range(inst.n):
        excess = sum(y for (_, B), y in cols.items() if u in B) - inst.requirements[u]
        if excess <= 0:
            continue
        # shrink the latest-listed columns first
        for key in reversed([k for k in cols if u in k[1]]):
            if excess <= 0:
                break
            y = cols[key]
            t = min(y, excess)
            cols[key] = y - t
            smaller = (key[0], key[1] - {u})
            cols[smaller] = cols.get(smaller, 0.0) + t
            excess -= t
    by_set: Dict[str, Dict[ElementSet, float]] = {}
    for (s, B), y in cols.items():
        if B and y > 1e-12:
            by_set.setdefault(s, {})[B] = y
    if not inst.is_multicover:
        for s, group in by_set.items():
            if sum(group.values()) > 1.0 + MASS_TOL:
                logger.debug(f"Set '{s}' carries mass {sum(group.values()):.9g}; uncrossing {len(group)} columns")
                by_set[s] = _uncross(group)
    columns = [Column(s, B, y) for s, group in by_set.items() for B, y in group.items() if y > 1e-12]
    value = sum(column_cost(inst, dist, inst.index[c.set_id], c.elements, conn) * c.y for c in columns)
    for u in range(inst.n):
        mass = sum(c.y for c in columns if u in c.elements)
        if mass < inst.requirements[u] - MASS_TOL:
            raise SolverError(f"Element {u} carries mass {mass:.9f} after normalization",
                              diagnostics={'element': u})
    return FractionalCover(columns=columns, duals=frac.duals, value=value, betas=frac.betas,
                           dual_value=frac.dual_value, rounds=frac.rounds)


def max_dual_violation(inst: Instance, dist: Distribution, alpha: np.ndarray,
                       beta: Optional[np.ndarray] = None,
                       conn: Optional[ConnectionCosts] = None) -> float:
    """Largest sum_{u in B} alpha_u - beta_S - cost(S,B) over all (S,B); 0 if none is positive"""
    worst = 0.0
    for j, B in _all_columns(inst):
        b = float(beta[j]) if beta is not None else 0.0
        worst = max(worst, sum(alpha[u] for u in B) - b - column_cost(inst, dist, j, B, conn))
    return worst


def _all_columns(inst: Instance):
    total = sum(1 << len(s.elements) for s in inst.sets)
    if total > CERTIFICATE_MAX_SUBSETS:
        raise SizeLimitError(f"Dual scan needs {total} subsets (cap {CERTIFICATE_MAX_SUBSETS})",
                             size=total, cap=CERTIFICATE_MAX_SUBSETS)
    for j, s in enumerate(inst.sets):
        els = sorted(s.elements)
        for k in range(1, len(els) + 1):
            for combo in combinations(els, k):
                yield j, frozenset(combo)


def _sampling_table(frac: FractionalCover, inst: Instance):
    """Per set position: (subsets, cumulative probabilities) with residual mass on the empty set"""
    table = []
    for s in inst.sets:
        cols = [c for c in frac.columns if c.set_id == s.id]
        ys = np.array([c.y for c in cols], dtype=float)
        total = ys.sum()
        probs = ys / total if total > 1.0 else ys
        table.append(([c.elements for c in cols], np.cumsum(probs)))
    return table


def round_randomized(frac: FractionalCover, inst: Instance, dist: Distribution, seed: int,
                     conn: Optional[ConnectionCosts] = None,
                     max_attempts: int = ROUNDING_ATTEMPTS) -> Mapping:
    """Las Vegas randomized rounding of a configuration LP solution

    Every attempt samples q = ceil(2 ln n) columns per set, keeps the first
    assignment of each element (round-major, sets in instance order) and is
    accepted once all elements are covered at cost <= max(4 ln n, 1) * LP.
    """
    _require_exact(dist)
    _check_dims(inst, dist, conn)
    if inst.is_multicover:
        raise InvalidInputError("Randomized rounding supports r(u) = 1 only; use greedy for multicover")
    n = inst.n
    if n == 0:
        return Mapping((), attempts=0)
    q = max(1, math.ceil(2 * math.log(n)))
    bound = max(4 * math.log(n), 1.0) * frac.value
    table = _sampling_table(frac, inst)
    rng = rng_stream(seed, 'round-randomized')
    for attempt in range(1, max_attempts + 1):
        assigned: List[Optional[str]] = [None] * n
        for _ in range(q):
            for j, (subsets, cum) in enumerate(table):
                k = int(np.searchsorted(cum, rng.random(), side='right'))
                if k >= len(subsets):
                    continue
                for u in subsets[k]:
                    if assigned[u] is None:
                        assigned[u] = inst.sets[j].id
        if any(a is None for a in assigned):
            logger.debug(f"Rounding attempt {attempt}: {assigned.count(None)} elements uncovered")
            continue
        mapping = Mapping.single(assigned, attempts=attempt)
        cost = mapping_cost(inst, dist, mapping, conn)
        if cost <= bound + TOL:
            logger.info(f"Randomized rounding accepted attempt {attempt}: cost={cost:.9g}, bound={bound:.9g}")
            return mapping
        logger.debug(f"Rounding attempt {attempt}: cost {cost:.9g} above bound {bound:.9g}")
    raise SolverError(f"Randomized rounding failed in {max_attempts} attempts",
                      diagnostics={'q': q, 'bound': bound})


def round_frequency(frac: FractionalCover, inst: Instance, dist: Distribution,
                    f: Optional[int] = None) -> Mapping:
    """Map u to the first set (instance order) serving it with mass >= 1/f"""
    if inst.is_multicover:
        raise InvalidInputError("Frequency rounding supports r(u) = 1 only")
    f = f or inst.max_frequency
    if inst.max_frequency > f:
        raise InvalidInputError(f"Instance has element frequency {inst.max_frequency} > f={f}")
    assigned = []
    for u in range(inst.n):
        chosen = None
        for j in inst.containing[u]:
            if frac.mass(u, inst.sets[j].id) >= 1.0 / f - TOL:
                chosen = inst.sets[j].id
                break
        if chosen is None:
            raise InvalidInputError(f"No set serves element {u} with mass >= 1/{f}; fractional cover is infeasible")
        assigned.append(chosen)
    logger.info(f"Frequency rounding with f={f} mapped {inst.n} elements")
    return Mapping.single(assigned)


def greedy_multicover(inst: Instance, dist: Distribution, method: Optional[str] = None) -> GreedyResult:
    """Greedy by cost-effectiveness c(S) g(B)/|B| with dual-fitting prices"""
    _require_exact(dist)
    _check_dims(inst, dist, None)
    inst.check_feasible()
    n, m = inst.n, inst.m
    remaining = [set(s.elements) for s in inst.sets]
    covered_by: List[List[str]] = [[] for _ in range(n)]
    prices: List[List[float]] = [[] for _ in range(n)]
    # price of the copy of u served by set j
    served_price: Dict[Tuple[int, int], float] = {}
    paid = 0.0
    steps = 0
    while any(len(covered_by[u]) < inst.requirements[u] for u in range(n)):
        best = None
        for j in range(m):
            if not remaining[j]:
                continue
            cost = inst.sets[j].cost
            oracle = SubmodularOracle(frozenset(remaining[j]), lambda B, c=cost: c * dist.g(B))
            B, ratio = minimize_ratio(oracle, method=method)
            if best is None or ratio < best[2] - 1e-12:
                best = (j, B, ratio)
        if best is None:
            raise SolverError("Greedy ran out of candidate sets before covering every element",
                              diagnostics={'steps': steps})
        j, B, ratio = best
        steps += 1
        paid += inst.sets[j].cost * dist.g(B)
        remaining[j] -= B
        for u in B:
            covered_by[u].append(inst.sets[j].id)
            prices[u].append(ratio)
            served_price[(u, j)] = ratio
            if len(covered_by[u]) >= inst.requirements[u]:
                for R in remaining:
                    R.discard(u)
        logger.debug(f"Greedy step {steps}: set '{inst.sets[j].id}' serves {sorted(B)} at {ratio:.9g}")

    alpha = np.array([prices[u][inst.requirements[u] - 1] for u in range(n)], dtype=float)
    beta = np.zeros(m)
    for (u, j), p in served_price.items():
        beta[j] += alpha[u] - p
    mapping = Mapping(tuple(tuple(ids) for ids in covered_by))
    cost = mapping_cost(inst, dist, mapping)
    logger.info(f"Greedy multicover finished in {steps} steps: paid={paid:.9g}, cost={cost:.9g}")
    return GreedyResult(mapping=mapping, alpha=alpha, beta=beta, paid=paid, cost=cost, prices=prices)


def greedy_certificate_violation(inst: Instance, dist: Distribution,
                                 alpha: np.ndarray, beta: np.ndarray) -> float:
    """Largest violation of (alpha/H_n, beta/H_n) against the multicover dual rows"""
    h = harmonic(inst.n) or 1.0
    worst = 0.0
    for j, B in _all_columns(inst):
        lhs = (sum(alpha[u] for u in B) - beta[j]) / h
        worst = max(worst, lhs - inst.sets[j].cost * dist.g(B))
    return worst


def saa_sample_size(n: int, m: int, eps: float = 0.5, max_cost: Optional[float] = None,
                    min_cost: Optional[float] = None, cap: Optional[int] = None) -> int:
    """Samples needed for |g_hat - g| <= eps*g on every B with probability 1 - 1/n^2

    Cardinality form: 6/eps^2 * n (n ln m + 2 ln n). Given costs, the weighted
    form uses W = max_cost / min_cost: 6/eps^2 * W n (n ln m + 2 ln n + ln W).
    """
    if n < 1 or m < 1:
        raise InvalidInputError("Sample size needs n >= 1 and m >= 1")
    if not 0 < eps < 1:
        raise InvalidInputError(f"epsilon must lie in (0,1), got {eps}")
    base = n * math.log(m) + 2 * math.log(n)
    if max_cost is not None and min_cost is not None and min_cost > 0:
        w = max(max_cost / min_cost, 1.0)
        size = 6.0 / eps ** 2 * w * n * (base + math.log(w))
    else:
        size = 6.0 / eps ** 2 * n * base
    size = max(1, math.ceil(size))
    cap = cap if cap is not None else get_settings().saa_cap
    if size > cap:
        logger.warning(f"SAA sample size {size} exceeds cap {cap}; using {cap}")
        return cap
    return size


def saa_solve(inst: Instance, dist: Distribution, samples: int, inner: str = 'lp-round',
              seed: int = 0, conn: Optional[ConnectionCosts] = None,
              method: Optional[str] = None) -> Mapping:
    """Solve against the empirical distribution of ``samples`` draws"""
    if samples < 1:
        raise InvalidInputError(f"SAA needs at least one sample, got {samples}")
    if inner not in ('lp-round', 'greedy'):
        raise InvalidInputError(f"Unknown SAA inner solver '{inner}'")
    _check_dims(inst, dist, conn)
    matrix = dist.sample_matrix(rng_stream(seed, 'saa-samples'), samples)
    empirical = empirical_from_matrix(matrix)
    logger.info(f"SAA drew {samples} samples, {len(empirical.sets)} distinct scenarios; inner={inner}")
    if inner == 'greedy':
        return greedy_multicover(inst, empirical, method=method).mapping
    frac = solve_conf_lp(inst, empirical, conn, method=method)
    return round_randomized(frac, inst, empirical, seed, conn)
