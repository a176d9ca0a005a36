"""Submodular minimization: exact enumeration, Fujishige-Wolfe, ratio minimization

Ties between minimizers go to the smaller set, then to the lexicographically
smaller sorted id tuple, for every method.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple
import logging

import numpy as np

from universal_cover.config import get_settings
from universal_cover.errors import InvalidInputError, SizeLimitError, SolverError

logger = logging.getLogger('universal_cover')

BRUTE_MAX_GROUND = 22
WOLFE_FALLBACK_GROUND = 18
VALUE_EPS = 1e-12
RATIO_TOL = 1e-9

# Fujishige-Wolfe tolerances
Z1 = 1e-12
Z2 = 1e-10


@dataclass
class SubmodularOracle:
    """Set function on subsets of ``ground`` given as an evaluation procedure"""
    ground: FrozenSet[int]
    value: Callable[[FrozenSet[int]], float]
    _memo: Dict[FrozenSet[int], float] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.ground = frozenset(self.ground)

    def __call__(self, subset: Iterable[int]) -> float:
        key = frozenset(subset)
        if key not in self._memo:
            self._memo[key] = float(self.value(key))
        return self._memo[key]

    @property
    def evaluations(self) -> int:
        return len(self._memo)


def _key(subset: FrozenSet[int]) -> Tuple[int, Tuple[int, ...]]:
    return len(subset), tuple(sorted(subset))


def _best_of(f: SubmodularOracle, candidates: Iterable[FrozenSet[int]]) -> Tuple[FrozenSet[int], float]:
    """Minimum over candidates with the package tie-break"""
    best, best_val = None, float('inf')
    for c in candidates:
        v = f(c)
        if best is None or v < best_val - VALUE_EPS or (abs(v - best_val) <= VALUE_EPS and _key(c) < _key(best)):
            best, best_val = c, v
    return best, best_val


def minimize_brute(f: SubmodularOracle) -> Tuple[FrozenSet[int], float]:
    """Exact minimizer by enumerating every subset of the ground set"""
    ground = sorted(f.ground)
    if len(ground) > BRUTE_MAX_GROUND:
        raise SizeLimitError(f"Brute-force minimization over {len(ground)} elements exceeds cap "
                             f"{BRUTE_MAX_GROUND}", size=len(ground), cap=BRUTE_MAX_GROUND)
    best = frozenset()
    best_val = f(best)
    # (cardinality, lex) order: a later subset only wins when strictly better
    for k in range(1, len(ground) + 1):
        for combo in combinations(ground, k):
            v = f(combo)
            if v < best_val - VALUE_EPS:
                best, best_val = frozenset(combo), v
    return best, best_val


def _greedy_vertex(order: np.ndarray, items: List[int], f: SubmodularOracle, base: float) -> np.ndarray:
    """Vertex of the base polytope of f - f(empty) for the given linear order"""
    x = np.empty(len(items), dtype=float)
    prev = base
    prefix = []
    for i in order:
        prefix.append(items[i])
        cur = f(prefix)
        x[i] = cur - prev
        prev = cur
    return x


def _affine_minimizer(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Barycentric weights and the min-norm point of the affine hull of ``points``"""
    m = points.shape[0]
    gram = points @ points.T
    system = np.zeros((m + 1, m + 1))
    system[0, 1:] = 1.0
    system[1:, 0] = 1.0
    system[1:, 1:] = gram
    rhs = np.zeros(m + 1)
    rhs[0] = 1.0
    sol = np.linalg.lstsq(system, rhs, rcond=None)[0]
    weights = sol[1:]
    return weights, weights @ points


def _min_norm_point(f: SubmodularOracle, items: List[int], max_iter: int) -> np.ndarray:
    base = f(())
    n = len(items)
    x = _greedy_vertex(np.arange(n), items, f, base)
    points = x.reshape(1, n)
    weights = np.array([1.0])
    iterations = 0
    while True:
        iterations += 1
        if iterations > max_iter:
            raise SolverError(f"Fujishige-Wolfe did not converge in {max_iter} iterations",
                              best=x, diagnostics={'iterations': iterations})
        q = _greedy_vertex(np.argsort(x, kind='mergesort'), items, f, base)
        if np.any(np.all(np.abs(points - q) < Z2, axis=1)):
            break
        scale = max(float(q @ q), float(np.max(np.einsum('ij,ij->i', points, points))))
        if x @ q >= x @ x - Z1 * scale:
            break
        points = np.vstack((points, q))
        weights = np.append(weights, 0.0)
        while True:
            iterations += 1
            if iterations > max_iter:
                raise SolverError(f"Fujishige-Wolfe did not converge in {max_iter} iterations",
                                  best=x, diagnostics={'iterations': iterations})
            b, y = _affine_minimizer(points)
            if np.all(b >= -Z2):
                weights, x = np.clip(b, 0.0, None), y
                break
            idx = np.nonzero(weights - b > Z2)[0]
            theta = float(np.min(weights[idx] / (weights - b)[idx])) if idx.size else 1.0
            weights = theta * b + (1 - theta) * weights
            keep = weights > Z2
            points, weights = points[keep], weights[keep]
            weights = weights / weights.sum()
            x = weights @ points
    return x


def minimize_wolfe(f: SubmodularOracle, max_iter: int = 10_000) -> Tuple[FrozenSet[int], float]:
    """Minimum-norm-point minimizer

    The level sets of the min-norm point are scanned, then a single-element
    add/remove pass polishes the result against floating point drift.
    """
    items = sorted(f.ground)
    if not items:
        return frozenset(), f(())
    try:
        x = _min_norm_point(f, items, max_iter)
    except SolverError as e:
        if len(items) <= WOLFE_FALLBACK_GROUND:
            logger.warning(f"{e}; falling back to enumeration over {len(items)} elements")
            return minimize_brute(f)
        best_x = e.best
        order = np.argsort(best_x, kind='mergesort')
        e.best = _best_of(f, (frozenset(items[i] for i in order[:k]) for k in range(len(items) + 1)))
        raise
    order = np.argsort(x, kind='mergesort')
    candidates = [frozenset(items[i] for i in order[:k]) for k in range(len(items) + 1)]
    candidates.append(frozenset(items[i] for i in range(len(items)) if x[i] < -Z2))
    best, best_val = _best_of(f, candidates)

    improved = True
    while improved:
        improved = False
        neighbours = [best - {u} for u in best] + [best | {u} for u in items if u not in best]
        cand, val = _best_of(f, neighbours)
        if cand is not None and val < best_val - VALUE_EPS:
            best, best_val = cand, val
            improved = True
    return best, best_val


def minimize(f: SubmodularOracle, method: Optional[str] = None) -> Tuple[FrozenSet[int], float]:
    """Minimize a submodular function over all subsets of its ground set (including the empty set)"""
    settings = get_settings()
    method = method or settings.sfm_method
    if method == 'auto':
        method = 'brute' if len(f.ground) <= settings.brute_cutoff else 'wolfe'
    if method == 'brute':
        return minimize_brute(f)
    if method == 'wolfe':
        return minimize_wolfe(f)
    raise InvalidInputError(f"Unknown minimization method '{method}'")


def minimize_ratio(f: SubmodularOracle, method: Optional[str] = None,
                   history: Optional[List[float]] = None,
                   max_iter: int = 1000) -> Tuple[FrozenSet[int], float]:
    """Minimize f(X)/|X| over nonempty X by Dinkelbach iteration

    Each step minimizes f(X) - lam*|X| and moves lam to the ratio of the
    minimizer; the sequence of lam is strictly decreasing.
    """
    if not f.ground:
        raise InvalidInputError("minimize_ratio needs a nonempty ground set")
    best = f.ground
    lam = f(best) / len(best)
    if history is not None:
        history.append(lam)
    for _ in range(max_iter):
        current = lam
        shifted = SubmodularOracle(f.ground, lambda s, c=current: f(s) - c * len(s))
        candidate, value = minimize(shifted, method=method)
        if not candidate or value >= -RATIO_TOL:
            return best, lam
        ratio = f(candidate) / len(candidate)
        if ratio >= lam - VALUE_EPS:
            return best, lam
        best, lam = candidate, ratio
        if history is not None:
            history.append(lam)
    raise SolverError(f"Ratio minimization did not converge in {max_iter} steps", best=(best, lam))
