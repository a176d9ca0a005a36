"""Seeded random instance families for benchmarks and property tests

Every generator takes a ``numpy.random.Generator``; ``cases`` derives one per
problem family from a single seed so bench suites are reproducible.
"""
from typing import List, Optional, Tuple

import numpy as np

from universal_cover.edgecover import GraphEdge, GraphInstance, vertex_cover_instance
from universal_cover.errors import InvalidInputError
from universal_cover.facility import FlInstance
from universal_cover.model import CoverSet, IndependentDist, Instance, ScenarioDist
from universal_cover.multicut import Edge, McTreeInstance, Pair
from universal_cover.setcover import ConnectionCosts, NmflProblem
from universal_cover.submodular import SubmodularOracle
from universal_cover.utils import rng_stream
from universal_cover.verify import BenchCase


def _cost(rng: np.random.Generator) -> float:
    # quarter steps keep ties (and tie-breaks) in play
    return float(rng.integers(1, 17)) / 4.0


def random_setcover(rng: np.random.Generator, n: int, m: int, max_requirement: int = 1) -> Instance:
    """Random sets, then every element is patched into enough sets to be coverable r(u) times"""
    if n < 0 or m < 1:
        raise InvalidInputError("Random set cover needs n >= 0 and m >= 1")
    members = [set(np.flatnonzero(rng.random(n) < 0.4).tolist()) for _ in range(m)]
    requirements = [int(rng.integers(1, min(max_requirement, m) + 1)) for _ in range(n)]
    for u in range(n):
        holders = [j for j in range(m) if u in members[j]]
        missing = requirements[u] - len(holders)
        if missing > 0:
            others = [j for j in range(m) if u not in members[j]]
            for j in rng.choice(others, size=missing, replace=False):
                members[int(j)].add(u)
    sets = tuple(CoverSet(f"S{j + 1}", _cost(rng), frozenset(members[j])) for j in range(m))
    return Instance(n=n, sets=sets, requirements=tuple(requirements) if max_requirement > 1 else ())


def random_scenario_dist(rng: np.random.Generator, n: int, scenarios: int = 4) -> ScenarioDist:
    weights = rng.random(scenarios) + 0.05
    probs = weights / weights.sum()
    sets = [np.flatnonzero(rng.random(n) < 0.5).tolist() for _ in range(scenarios)]
    return ScenarioDist(n, list(zip(probs.tolist(), sets)))


def random_independent_dist(rng: np.random.Generator, n: int) -> IndependentDist:
    return IndependentDist(np.round(rng.random(n), 3))


def random_nmfl(rng: np.random.Generator, n: int, m: int) -> NmflProblem:
    inst = random_setcover(rng, n, m)
    return NmflProblem(inst, ConnectionCosts(np.round(rng.random((n, m)) * 2.0, 2)))


def random_graph(rng: np.random.Generator, num_vertices: int, max_edges: int) -> GraphInstance:
    """Random graph without isolated vertices (a random matching-ish backbone plus extra edges)"""
    if num_vertices < 2:
        raise InvalidInputError("Random graph needs at least two vertices")
    pairs = [(u, v) for u in range(num_vertices) for v in range(u + 1, num_vertices)]
    order = rng.permutation(len(pairs))
    chosen: List[Tuple[int, int]] = []
    covered = set()
    for k in order:
        u, v = pairs[k]
        if u not in covered or v not in covered:
            chosen.append((u, v))
            covered.update((u, v))
        if len(covered) == num_vertices:
            break
    for k in order:
        if len(chosen) >= max_edges:
            break
        if pairs[k] not in chosen:
            chosen.append(pairs[k])
    return GraphInstance(num_vertices, tuple(GraphEdge(u, v, _cost(rng)) for u, v in chosen))


def random_facility(rng: np.random.Generator, clients: int, facilities: int) -> FlInstance:
    """Clients and facilities as points in the unit square; Euclidean distances are metric"""
    cpts = rng.random((clients, 2))
    fpts = rng.random((facilities, 2))
    dist = np.linalg.norm(cpts[:, None, :] - fpts[None, :, :], axis=2)
    return FlInstance(probs=np.round(rng.random(clients), 3),
                      facility_ids=tuple(f"F{f + 1}" for f in range(facilities)),
                      open_costs=np.round(rng.random(facilities) * 2.0, 3),
                      dist=dist)


def random_tree_multicut(rng: np.random.Generator, nodes: int, pairs: int) -> McTreeInstance:
    if nodes < 2:
        raise InvalidInputError("Random tree needs at least two nodes")
    # node i hangs below a uniformly chosen earlier node
    edges = tuple(Edge(int(rng.integers(0, i)), i, _cost(rng)) for i in range(1, nodes))
    terminals = []
    for _ in range(pairs):
        s, t = rng.choice(nodes, size=2, replace=False)
        terminals.append(Pair(int(s), int(t), float(np.round(rng.random(), 3))))
    return McTreeInstance(num_nodes=nodes, edges=edges, pairs=tuple(terminals))


def random_submodular(rng: np.random.Generator, size: int, integral: bool = False) -> SubmodularOracle:
    """c * g(B) plus a modular term, the shape of every separation objective"""
    dist = random_scenario_dist(rng, size, scenarios=int(rng.integers(1, 5)))
    scale = float(rng.integers(1, 6))
    weights = rng.integers(-4, 5, size=size).astype(float) if integral else rng.normal(0.0, 1.0, size)
    def value(subset) -> float:
        idx = sorted(subset)
        g = dist.g(idx)
        return scale * g - float(weights[idx].sum()) if idx else 0.0

    return SubmodularOracle(tuple(range(size)), value)


FAMILIES = ('setcover', 'multicover', 'vertexcover', 'edgecover', 'nmfl', 'facility', 'multicut-tree')


def cases(problem: str, count: int, size: int, seed: int = 0, scenarios: Optional[int] = None):
    """``count`` BenchCase rows of the given family with roughly ``size`` elements"""
    if problem not in FAMILIES:
        raise InvalidInputError(f"Unknown problem family '{problem}'")
    if count < 0 or size < 2:
        raise InvalidInputError("Random suites need count >= 0 and size >= 2")
    rng = rng_stream(seed, f'generate-{problem}')
    out = []
    for k in range(count):
        name = f"{problem}-{size}-{k}"
        if problem in ('setcover', 'multicover'):
            inst = random_setcover(rng, size, max(2, size - 1), max_requirement=2 if problem == 'multicover' else 1)
            out.append(BenchCase(name, inst, random_scenario_dist(rng, size, scenarios or 4)))
        elif problem == 'nmfl':
            prob = random_nmfl(rng, size, max(2, size - 1))
            out.append(BenchCase(name, prob, random_scenario_dist(rng, size, scenarios or 4)))
        elif problem == 'vertexcover':
            g = random_graph(rng, size, size + 2)
            inst = vertex_cover_instance(g)
            out.append(BenchCase(name, inst, random_scenario_dist(rng, inst.n, scenarios or 4)))
        elif problem == 'edgecover':
            g = random_graph(rng, size, size + 2)
            out.append(BenchCase(name, g, random_independent_dist(rng, size)))
        elif problem == 'facility':
            inst = random_facility(rng, size, max(2, size - 1))
            out.append(BenchCase(name, inst, inst.distribution))
        else:
            inst = random_tree_multicut(rng, size + 1, max(1, size - 1))
            out.append(BenchCase(name, inst, inst.distribution))
    return out
