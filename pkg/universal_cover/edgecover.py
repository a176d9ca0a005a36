"""Universal stochastic edge cover (exact) and the graph lowerings to set cover

Edge cover reduces to deterministic weighted edge cover: edge uv costs
c_e g({u,v}) when it serves both endpoints, and c_e g({v}) when it serves v
alone. The one-endpoint options become edges (v, a) to a gadget vertex a,
which is tied to a second gadget vertex b by a free edge.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple
import logging

import numpy as np

from universal_cover.errors import InfeasibleInstanceError, InvalidInputError, SizeLimitError
from universal_cover.model import CoverSet, Distribution, Instance
from universal_cover.setcover import Mapping

logger = logging.getLogger('universal_cover')

MAX_EXACT_VERTICES = 18

EDGE, LOOP, GADGET = 'edge', 'loop', 'gadget'


@dataclass(frozen=True)
class GraphEdge:
    u: int
    v: int
    cost: float
    origin: Optional[int] = None
    kind: str = EDGE


@dataclass(frozen=True)
class GraphInstance:
    """Undirected graph with edge costs; parallel edges keep the cheapest copy"""
    num_vertices: int
    edges: Tuple[GraphEdge, ...]

    def __post_init__(self):
        if self.num_vertices < 0:
            raise InvalidInputError("Vertex count must be non-negative")
        best: Dict[Tuple[int, int], GraphEdge] = {}
        order: List[Tuple[int, int]] = []
        for k, e in enumerate(self.edges):
            if not (0 <= e.u < self.num_vertices and 0 <= e.v < self.num_vertices):
                raise InvalidInputError(f"Edge {k} ({e.u},{e.v}) references a missing vertex")
            if e.u == e.v:
                raise InvalidInputError(f"Edge {k} is a loop")
            if not np.isfinite(e.cost) or e.cost < 0:
                raise InvalidInputError(f"Edge {k} has invalid cost {e.cost}")
            key = (min(e.u, e.v), max(e.u, e.v))
            if key not in best:
                order.append(key)
                best[key] = e
            elif e.cost < best[key].cost:
                best[key] = e
        object.__setattr__(self, 'edges', tuple(best[k] for k in order))

    def incident(self, v: int) -> List[int]:
        return [k for k, e in enumerate(self.edges) if v in (e.u, e.v)]

    def set_id(self, k: int) -> str:
        e = self.edges[k]
        return f"{min(e.u, e.v)}-{max(e.u, e.v)}"


def make_graph(num_vertices: int, edges: Sequence[Tuple[int, int, float]]) -> GraphInstance:
    return GraphInstance(num_vertices, tuple(GraphEdge(int(u), int(v), float(c)) for u, v, c in edges))


def _check_covered(g: GraphInstance) -> None:
    for v in range(g.num_vertices):
        if not g.incident(v):
            raise InfeasibleInstanceError(f"Vertex {v} is isolated and cannot be covered", element=v)


def reduce_edge_cover(g: GraphInstance, dist: Distribution) -> GraphInstance:
    """Deterministic edge cover instance whose optimum is the universal optimum of (g, dist)"""
    if dist.n != g.num_vertices:
        raise InvalidInputError(f"Distribution is over {dist.n} vertices, graph has {g.num_vertices}")
    _check_covered(g)
    a, b = g.num_vertices, g.num_vertices + 1
    edges = [GraphEdge(e.u, e.v, e.cost * dist.g((e.u, e.v)), origin=k, kind=EDGE)
             for k, e in enumerate(g.edges)]
    loops: Dict[int, GraphEdge] = {}
    for k, e in enumerate(g.edges):
        for v in (e.u, e.v):
            cand = GraphEdge(v, a, e.cost * dist.g((v,)), origin=k, kind=LOOP)
            if v not in loops or cand.cost < loops[v].cost:
                loops[v] = cand
    edges.extend(loops[v] for v in sorted(loops))
    edges.append(GraphEdge(a, b, 0.0, kind=GADGET))
    return GraphInstance(g.num_vertices + 2, tuple(edges))


def solve_edge_cover_exact(g: GraphInstance) -> FrozenSet[int]:
    """Minimum-cost edge cover by dynamic programming over covered-vertex sets"""
    V = g.num_vertices
    if V > MAX_EXACT_VERTICES:
        raise SizeLimitError(f"Exact edge cover supports at most {MAX_EXACT_VERTICES} vertices, got {V}",
                             size=V, cap=MAX_EXACT_VERTICES)
    _check_covered(g)
    full = (1 << V) - 1
    incident = [g.incident(v) for v in range(V)]
    masks = [(1 << e.u) | (1 << e.v) for e in g.edges]

    @lru_cache(maxsize=None)
    def best(covered: int) -> Tuple[float, Tuple[int, ...]]:
        if covered == full:
            return 0.0, ()
        v = next(i for i in range(V) if not covered >> i & 1)
        result = None
        for k in incident[v]:
            cost, rest = best(covered | masks[k])
            cost += g.edges[k].cost
            if result is None or cost < result[0] - 1e-12:
                result = (cost, (k,) + rest)
        return result

    cost, chosen = best(0)
    best.cache_clear()
    logger.debug(f"Exact edge cover on {V} vertices: cost={cost:.9g}, edges={sorted(chosen)}")
    return frozenset(chosen)


def universal_edge_cover(g: GraphInstance, dist: Distribution) -> Mapping:
    """Optimal universal mapping vertex -> covering edge (set ids as in edge_cover_instance)"""
    reduced = reduce_edge_cover(g, dist)
    chosen = solve_edge_cover_exact(reduced)
    both: Dict[int, int] = {}
    single: Dict[int, int] = {}
    for k in sorted(chosen):
        e = reduced.edges[k]
        if e.kind == EDGE:
            for v in (e.u, e.v):
                both.setdefault(v, e.origin)
        elif e.kind == LOOP:
            single.setdefault(e.u, e.origin)
    assignment = []
    for v in range(g.num_vertices):
        origin = both.get(v, single.get(v))
        if origin is None:
            raise InfeasibleInstanceError(f"Vertex {v} left uncovered by the reduced solution", element=v)
        assignment.append(g.set_id(origin))
    logger.info(f"Universal edge cover solved exactly on {g.num_vertices} vertices")
    return Mapping.single(assignment)


def edge_cover_instance(g: GraphInstance) -> Instance:
    """Vertices become elements, each edge a set covering its endpoints"""
    return Instance(
        n=g.num_vertices,
        sets=tuple(CoverSet(g.set_id(k), e.cost, frozenset((e.u, e.v))) for k, e in enumerate(g.edges)),
    )


def vertex_cover_instance(g: GraphInstance, vertex_costs: Optional[Sequence[float]] = None) -> Instance:
    """Edges become elements, each vertex a set covering its incident edges"""
    if vertex_costs is not None and len(vertex_costs) != g.num_vertices:
        raise InvalidInputError(f"Expected {g.num_vertices} vertex costs, got {len(vertex_costs)}")
    costs = [1.0] * g.num_vertices if vertex_costs is None else [float(c) for c in vertex_costs]
    return Instance(
        n=len(g.edges),
        sets=tuple(CoverSet(str(v), costs[v], frozenset(g.incident(v))) for v in range(g.num_vertices)),
    )
