"""Problem instances, request distributions and the coverage probability g

g(B) is the probability that a random request set X intersects B. It is the
kernel of every objective in the package: a covering object that serves the
elements B is paid for exactly when one of them is requested.

Element sets are ``frozenset`` of ids in [0, n). Distributions hold a boolean
scenario incidence matrix (numpy) and, for n <= G_TABLE_MAX_N, a lazily built
table of g over all 2^n subsets indexed by bitmask, which turns each g call in
separation and brute force into a lookup. A scenario list whose table would
cost more than G_TABLE_MAX_WORK updates is evaluated per query instead.
"""
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np

from universal_cover.errors import InfeasibleInstanceError, InvalidInputError, NotEvaluableError

logger = logging.getLogger('universal_cover')

ElementSet = FrozenSet[int]

# Largest universe for which the full g table is materialized
G_TABLE_MAX_N = 20
# Largest scenarios x 2^n product a scenario table is built for; above it g is evaluated per query
G_TABLE_MAX_WORK = 1 << 26
# |sum(prob) - 1| accepted (and renormalized) on load
PROB_SUM_TOL = 1e-6


def element_set(elements: Iterable[int], n: Optional[int] = None) -> ElementSet:
    """Build an element set, checking ids against the universe size"""
    result = frozenset(int(u) for u in elements)
    if n is not None:
        bad = [u for u in result if u < 0 or u >= n]
        if bad:
            raise InvalidInputError(f"Element ids {sorted(bad)} outside universe [0,{n})")
    return result


def to_mask(elements: Iterable[int]) -> int:
    """Bitmask of an element set"""
    mask = 0
    for u in elements:
        mask |= 1 << u
    return mask


@dataclass(frozen=True)
class CoverSet:
    """A covering object: id, non-negative cost and the elements it can serve"""
    id: str
    cost: float
    elements: ElementSet


@dataclass(frozen=True)
class Instance:
    """Universe {0..n-1}, weighted covering sets and coverage requirements r(u)"""
    n: int
    sets: Tuple[CoverSet, ...]
    requirements: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInputError(f"Universe size must be non-negative, got {self.n}")
        if not self.requirements:
            object.__setattr__(self, 'requirements', tuple([1] * self.n))
        if len(self.requirements) != self.n:
            raise InvalidInputError(f"Expected {self.n} requirements, got {len(self.requirements)}")
        if any(r < 1 for r in self.requirements):
            raise InvalidInputError("Requirements r(u) must be positive integers")
        seen = set()
        for s in self.sets:
            if s.id in seen:
                raise InvalidInputError(f"Duplicate set id '{s.id}'")
            seen.add(s.id)
            if not np.isfinite(s.cost) or s.cost < 0:
                raise InvalidInputError(f"Set '{s.id}' has invalid cost {s.cost}")
            element_set(s.elements, self.n)

    @property
    def m(self) -> int:
        return len(self.sets)

    @cached_property
    def index(self) -> Dict[str, int]:
        """Set id -> position"""
        return {s.id: i for i, s in enumerate(self.sets)}

    def get(self, set_id: str) -> CoverSet:
        try:
            return self.sets[self.index[set_id]]
        except KeyError:
            raise InvalidInputError(f"Unknown set id '{set_id}'")

    @cached_property
    def containing(self) -> Tuple[Tuple[int, ...], ...]:
        """For every element, the indices of the sets containing it"""
        rows: List[List[int]] = [[] for _ in range(self.n)]
        for j, s in enumerate(self.sets):
            for u in s.elements:
                rows[u].append(j)
        return tuple(tuple(r) for r in rows)

    @property
    def max_frequency(self) -> int:
        return max((len(r) for r in self.containing), default=0)

    @property
    def is_multicover(self) -> bool:
        return any(r > 1 for r in self.requirements)

    def check_feasible(self) -> None:
        """Raise InfeasibleInstanceError if some u lies in fewer than r(u) sets"""
        for u in range(self.n):
            if len(self.containing[u]) < self.requirements[u]:
                raise InfeasibleInstanceError(
                    f"Element {u} needs {self.requirements[u]} sets but only "
                    f"{len(self.containing[u])} contain it", element=u)

    def to_json(self) -> dict:
        data = {"n": self.n,
                "sets": [{"id": s.id, "cost": s.cost, "elements": sorted(s.elements)} for s in self.sets]}
        if self.is_multicover:
            data["requirements"] = list(self.requirements)
        return data


def make_instance(n: int, sets: Sequence[Tuple[str, float, Iterable[int]]],
                  requirements: Optional[Sequence[int]] = None) -> Instance:
    """Convenience constructor from (id, cost, elements) triples"""
    return Instance(
        n=n,
        sets=tuple(CoverSet(str(sid), float(cost), element_set(els, n)) for sid, cost, els in sets),
        requirements=tuple(int(r) for r in requirements) if requirements else (),
    )


class Distribution:
    """Distribution of the random request set X over subsets of {0..n-1}"""
    kind = 'abstract'

    def __init__(self, n: int):
        self.n = int(n)

    @property
    def exact(self) -> bool:
        """Whether g can be evaluated exactly"""
        return True

    def g(self, elements: Iterable[int]) -> float:
        raise NotImplementedError

    def g_mask(self, mask: int) -> float:
        raise NotImplementedError

    def sample_matrix(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Boolean (count x n) matrix of independent draws"""
        raise NotImplementedError

    @property
    def has_table(self) -> bool:
        """Whether g and g_mask read from the precomputed table"""
        return self.n <= G_TABLE_MAX_N

    @cached_property
    def table(self) -> np.ndarray:
        """g over all subsets, indexed by bitmask (only for n <= G_TABLE_MAX_N)"""
        if self.n > G_TABLE_MAX_N:
            raise InvalidInputError(f"g table needs n <= {G_TABLE_MAX_N}, got {self.n}")
        return self._build_table()

    def _build_table(self) -> np.ndarray:
        raise NotImplementedError


class ScenarioDist(Distribution):
    """Explicit list of (probability, request set) scenarios"""
    kind = 'scenario'

    def __init__(self, n: int, scenarios: Sequence[Tuple[float, Iterable[int]]]):
        super().__init__(n)
        if not scenarios:
            raise InvalidInputError("Scenario distribution needs at least one scenario")
        probs = np.array([float(p) for p, _ in scenarios], dtype=float)
        if np.any(~np.isfinite(probs)) or np.any(probs <= 0) or np.any(probs > 1 + PROB_SUM_TOL):
            raise InvalidInputError("Scenario probabilities must lie in (0,1]")
        total = probs.sum()
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InvalidInputError(f"Scenario probabilities sum to {total}, expected 1")
        self.probs = probs / total
        self.sets: Tuple[ElementSet, ...] = tuple(element_set(els, n) for _, els in scenarios)
        self.incidence = np.zeros((len(self.sets), self.n), dtype=bool)
        for k, s in enumerate(self.sets):
            if s:
                self.incidence[k, sorted(s)] = True
        self.masks = [to_mask(s) for s in self.sets]
        self._cumulative = np.cumsum(self.probs)

    def g(self, elements: Iterable[int]) -> float:
        idx = sorted(elements)
        if not idx:
            return 0.0
        if self.has_table:
            return float(self.table[to_mask(idx)])
        return float(self.probs[self.incidence[:, idx].any(axis=1)].sum())

    def g_mask(self, mask: int) -> float:
        if self.has_table:
            return float(self.table[mask])
        return float(sum(p for p, x in zip(self.probs, self.masks) if x & mask))

    @property
    def has_table(self) -> bool:
        return self.n <= G_TABLE_MAX_N and len(self.sets) << self.n <= G_TABLE_MAX_WORK

    def _build_table(self) -> np.ndarray:
        masks = np.arange(1 << self.n, dtype=np.int64)
        table = np.zeros(1 << self.n, dtype=float)
        for p, x in zip(self.probs, self.masks):
            if x:
                table += p * ((masks & x) != 0)
        return table

    def sample(self, rng: np.random.Generator) -> ElementSet:
        k = int(np.searchsorted(self._cumulative, rng.random(), side='right'))
        return self.sets[min(k, len(self.sets) - 1)]

    def sample_matrix(self, rng: np.random.Generator, count: int) -> np.ndarray:
        picks = np.searchsorted(self._cumulative, rng.random(count), side='right')
        picks = np.minimum(picks, len(self.sets) - 1)
        return self.incidence[picks]

    def to_json(self) -> dict:
        return {"type": "scenario",
                "scenarios": [{"prob": float(p), "elements": sorted(s)} for p, s in zip(self.probs, self.sets)]}


class IndependentDist(Distribution):
    """Each element u is requested independently with probability p_u"""
    kind = 'independent'

    def __init__(self, probs: Sequence[float]):
        super().__init__(len(probs))
        self.probs = np.array([float(p) for p in probs], dtype=float)
        if np.any(~np.isfinite(self.probs)) or np.any(self.probs < 0) or np.any(self.probs > 1):
            raise InvalidInputError("Activation probabilities must lie in [0,1]")

    def g(self, elements: Iterable[int]) -> float:
        idx = sorted(elements)
        if not idx:
            return 0.0
        if self.has_table:
            return float(self.table[to_mask(idx)])
        return float(1.0 - np.prod(1.0 - self.probs[idx]))

    def g_mask(self, mask: int) -> float:
        if self.has_table:
            return float(self.table[mask])
        return self.g([u for u in range(self.n) if mask >> u & 1])

    def _build_table(self) -> np.ndarray:
        masks = np.arange(1 << self.n, dtype=np.int64)
        miss = np.ones(1 << self.n, dtype=float)
        for u, p in enumerate(self.probs):
            miss[((masks >> u) & 1) == 1] *= (1.0 - p)
        return 1.0 - miss

    def sample(self, rng: np.random.Generator) -> ElementSet:
        return frozenset(np.flatnonzero(rng.random(self.n) < self.probs).tolist())

    def sample_matrix(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.random((count, self.n)) < self.probs

    def to_json(self) -> dict:
        return {"type": "independent", "probs": [float(p) for p in self.probs]}


class SamplerDist(Distribution):
    """Black-box oracle: only draws are available

    ``draw`` receives a numpy Generator and returns an iterable of element ids.
    ``calls`` counts draws; sampling cost is not modelled beyond that.
    """
    kind = 'sampler'

    def __init__(self, n: int, draw: Callable[[np.random.Generator], Iterable[int]]):
        super().__init__(n)
        self._draw = draw
        self.calls = 0

    @property
    def exact(self) -> bool:
        return False

    def g(self, elements: Iterable[int]) -> float:
        raise NotEvaluableError()

    def g_mask(self, mask: int) -> float:
        raise NotEvaluableError()

    def _build_table(self) -> np.ndarray:
        raise NotEvaluableError()

    def sample(self, rng: np.random.Generator) -> ElementSet:
        self.calls += 1
        return element_set(self._draw(rng), self.n)

    def sample_matrix(self, rng: np.random.Generator, count: int) -> np.ndarray:
        out = np.zeros((count, self.n), dtype=bool)
        for i in range(count):
            s = self.sample(rng)
            if s:
                out[i, sorted(s)] = True
        return out


def as_sampler(dist: Distribution) -> SamplerDist:
    """Hide an exact distribution behind the oracle interface"""
    return SamplerDist(dist.n, dist.sample)


def eval_g(dist: Distribution, elements: Iterable[int]) -> float:
    """g(B) = P[B intersects X]; 0 for the empty set"""
    return dist.g(elements)


def g_table(dist: Distribution) -> np.ndarray:
    """g over every subset of the universe, indexed by bitmask"""
    return dist.table


def sample_scenario(dist: Distribution, seed: int) -> ElementSet:
    """One request set, a deterministic function of (dist, seed)"""
    return dist.sample(np.random.default_rng(seed))


def sample_many(dist: Distribution, seed: int, count: int) -> np.ndarray:
    """Boolean (count x n) matrix of seeded draws"""
    if count < 0:
        raise InvalidInputError(f"Sample count must be non-negative, got {count}")
    return dist.sample_matrix(np.random.default_rng(seed), count)


def empirical_dist(samples: Sequence[Iterable[int]], n: Optional[int] = None) -> ScenarioDist:
    """Scenario distribution putting mass multiplicity/N on each distinct sample

    Its g equals the empirical estimate (1/N) * #{i : A_i meets B}.
    """
    if len(samples) == 0:
        raise InvalidInputError("empirical_dist needs at least one sample")
    frozen = [frozenset(int(u) for u in s) for s in samples]
    if n is None:
        n = max((max(s) for s in frozen if s), default=-1) + 1
    counts = Counter(frozen)
    # first-seen order keeps the result deterministic
    ordered = list(dict.fromkeys(frozen))
    total = len(frozen)
    return ScenarioDist(n, [(counts[s] / total, s) for s in ordered])


def empirical_from_matrix(matrix: np.ndarray) -> ScenarioDist:
    """empirical_dist for a boolean sample matrix"""
    if matrix.shape[0] == 0:
        raise InvalidInputError("empirical_dist needs at least one sample")
    rows, counts = np.unique(matrix, axis=0, return_counts=True)
    total = matrix.shape[0]
    return ScenarioDist(matrix.shape[1],
                        [(c / total, np.flatnonzero(r).tolist()) for r, c in zip(rows, counts)])
