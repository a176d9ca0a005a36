"""Universal stochastic multicut on trees, independent activation

Every client is a terminal pair (s, t) with activation probability p; on a
tree its only path P_c must contain an edge of phi(c). Edges are bought
(paid once) for the big clients through the primal-dual multicut algorithm
and rented (paid p_c c_e) by the small ones.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Sequence, Tuple
import logging
import math

import networkx as nx
import numpy as np

from universal_cover.errors import InfeasibleMappingError, InvalidInputError, UnsupportedProblemError
from universal_cover.lpcore import Constraint, LinearProgram, solve_lp
from universal_cover.model import IndependentDist
from universal_cover.utils import TOL

logger = logging.getLogger('universal_cover')

BIG_THRESHOLD = 2.0 / 3.0
NON_TREE_MESSAGE = ("multicut is only supported on trees; general graphs need a Raecke tree decomposition "
                    "(distribution over decomposition trees), which is not implemented")


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    cost: float


@dataclass(frozen=True)
class Pair:
    s: int
    t: int
    p: float


@dataclass(frozen=True)
class McTreeInstance:
    """Tree on nodes 0..num_nodes-1 with edge costs and terminal pairs"""
    num_nodes: int
    edges: Tuple[Edge, ...]
    pairs: Tuple[Pair, ...]

    def __post_init__(self):
        if self.num_nodes < 1:
            raise InvalidInputError("Multicut instance needs at least one node")
        seen = set()
        for k, e in enumerate(self.edges):
            if not (0 <= e.u < self.num_nodes and 0 <= e.v < self.num_nodes):
                raise InvalidInputError(f"Edge {k} ({e.u},{e.v}) references a missing node")
            if e.u == e.v:
                raise InvalidInputError(f"Edge {k} is a loop")
            if not np.isfinite(e.cost) or e.cost < 0:
                raise InvalidInputError(f"Edge {k} has invalid cost {e.cost}")
            key = (min(e.u, e.v), max(e.u, e.v))
            if key in seen:
                raise UnsupportedProblemError(f"Parallel edge {key}: {NON_TREE_MESSAGE}")
            seen.add(key)
        for k, pr in enumerate(self.pairs):
            if not (0 <= pr.s < self.num_nodes and 0 <= pr.t < self.num_nodes):
                raise InvalidInputError(f"Pair {k} references a missing node")
            if pr.s == pr.t:
                raise InvalidInputError(f"Pair {k} has s = t = {pr.s}")
            if not 0 <= pr.p <= 1:
                raise InvalidInputError(f"Pair {k} has probability {pr.p} outside [0,1]")
        if not nx.is_tree(self.graph):
            raise UnsupportedProblemError(NON_TREE_MESSAGE)

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.num_nodes))
        for k, e in enumerate(self.edges):
            g.add_edge(e.u, e.v, id=k, cost=e.cost)
        return g

    @cached_property
    def paths(self) -> Tuple[Tuple[int, ...], ...]:
        """Edge ids of the unique s-t path of every pair"""
        result = []
        for pr in self.pairs:
            nodes = nx.shortest_path(self.graph, pr.s, pr.t)
            result.append(tuple(self.graph.edges[a, b]['id'] for a, b in zip(nodes, nodes[1:])))
        return tuple(result)

    @cached_property
    def node_paths(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(nx.shortest_path(self.graph, pr.s, pr.t)) for pr in self.pairs)

    @property
    def probs(self) -> np.ndarray:
        return np.array([pr.p for pr in self.pairs], dtype=float)

    @property
    def distribution(self) -> IndependentDist:
        return IndependentDist(self.probs)


@dataclass
class McFractional:
    x: np.ndarray
    xbar: Dict[Tuple[int, int], float]
    value: float


@dataclass(frozen=True)
class McMapping:
    """phi(c) as a set of edge ids per client; ``bought`` marks the big-side clients"""
    cuts: Tuple[FrozenSet[int], ...]
    bought: FrozenSet[int] = field(default=frozenset(), compare=False)

    def to_json(self, inst: McTreeInstance) -> dict:
        return {"cuts": {str(c): [[inst.edges[e].u, inst.edges[e].v] for e in sorted(cut)]
                         for c, cut in enumerate(self.cuts)}}


def solve_lp_mc_tree(inst: McTreeInstance) -> McFractional:
    """LP-MC: buy x_e for everyone or rent xbar_{c,e} at p_c c_e, one row per client"""
    m = len(inst.edges)
    rent_vars: Dict[Tuple[int, int], int] = {}
    for c, path in enumerate(inst.paths):
        for e in path:
            rent_vars[(c, e)] = m + len(rent_vars)
    objective = np.zeros(m + len(rent_vars))
    for e, edge in enumerate(inst.edges):
        objective[e] = edge.cost
    for (c, e), j in rent_vars.items():
        objective[j] = inst.pairs[c].p * inst.edges[e].cost
    lp = LinearProgram(objective=objective, sense='min', name='lp-mc')
    for c, path in enumerate(inst.paths):
        coeffs = {}
        for e in path:
            coeffs[e] = 1.0
            coeffs[rent_vars[(c, e)]] = 1.0
        lp.add(Constraint(coeffs, '>=', 1.0, tag=('cut', c)))
    result = solve_lp(lp)
    logger.info(f"LP-MC solved: {len(inst.edges)} edges, {len(inst.pairs)} pairs, value={result.value:.9g}")
    return McFractional(x=result.x[:m].copy(),
                        xbar={key: float(result.x[j]) for key, j in rent_vars.items()},
                        value=result.value)


def multicut_tree_lp(inst: McTreeInstance, clients: Sequence[int]) -> float:
    """Optimal value of the classical multicut LP restricted to ``clients``"""
    clients = list(clients)
    if not clients:
        return 0.0
    lp = LinearProgram(objective=np.array([e.cost for e in inst.edges]), sense='min', name='multicut-tree')
    for c in clients:
        lp.add(Constraint({e: 1.0 for e in inst.paths[c]}, '>=', 1.0))
    return solve_lp(lp).value


def gvy_tree_multicut(inst: McTreeInstance, clients: Sequence[int]) -> FrozenSet[int]:
    """Primal-dual multicut on a tree with reverse delete

    Vertices are visited by decreasing depth from node 0; each uncut pair whose
    path peaks at the current vertex raises its dual until a path edge is
    tight, and the tight edges join the solution in id order.
    """
    clients = list(clients)
    if not clients:
        return frozenset()
    depth = nx.single_source_shortest_path_length(inst.graph, 0)
    top = {c: min(inst.node_paths[c], key=lambda v: (depth[v], v)) for c in clients}
    residual = np.array([e.cost for e in inst.edges], dtype=float)
    chosen: List[int] = []
    chosen_set = set()
    for v in sorted(range(inst.num_nodes), key=lambda v: (-depth[v], v)):
        for c in clients:
            if top[c] != v or chosen_set.intersection(inst.paths[c]):
                continue
            path = inst.paths[c]
            delta = min(residual[e] for e in path)
            for e in path:
                residual[e] -= delta
            for e in sorted(path):
                if residual[e] <= TOL and e not in chosen_set:
                    chosen.append(e)
                    chosen_set.add(e)
    for e in reversed(list(chosen)):
        rest = chosen_set - {e}
        if all(rest.intersection(inst.paths[c]) for c in clients):
            chosen_set = rest
    logger.debug(f"Primal-dual multicut kept {sorted(chosen_set)} for {len(clients)} pairs")
    return frozenset(chosen_set)


def split_pairs(inst: McTreeInstance, frac: McFractional) -> Tuple[List[int], List[int]]:
    """Pairs buying at least 2/3 along their path go big, the rest small"""
    big, small = [], []
    for c, path in enumerate(inst.paths):
        if sum(frac.x[e] for e in path) >= BIG_THRESHOLD - TOL:
            big.append(c)
        else:
            small.append(c)
    return big, small


def round_mc_tree(inst: McTreeInstance, frac: McFractional) -> McMapping:
    """Buy a primal-dual multicut for the big pairs; each small pair rents its cheapest path edge"""
    big, small = split_pairs(inst, frac)
    bought = gvy_tree_multicut(inst, big)
    cuts: List[FrozenSet[int]] = [frozenset()] * len(inst.pairs)
    for c in big:
        cuts[c] = bought.intersection(inst.paths[c])
    for c in small:
        cuts[c] = frozenset((min(inst.paths[c], key=lambda e: (inst.edges[e].cost, e)),))
    logger.info(f"Multicut rounding: {len(big)} big pairs bought {len(bought)} edges, {len(small)} small pairs rent")
    return McMapping(tuple(cuts), bought=frozenset(big))


def check_mc_mapping(inst: McTreeInstance, mapping: McMapping) -> None:
    if len(mapping.cuts) < len(inst.pairs):
        missing = len(mapping.cuts)
        raise InfeasibleMappingError(f"Pair {missing} has no cut", key=missing)
    for c, cut in enumerate(mapping.cuts[:len(inst.pairs)]):
        if any(e < 0 or e >= len(inst.edges) for e in cut):
            raise InvalidInputError(f"Pair {c} uses an unknown edge")
        if not cut.intersection(inst.paths[c]):
            raise InfeasibleMappingError(f"Pair {c} ({inst.pairs[c].s},{inst.pairs[c].t}) is not separated", key=c)


def mc_expected_cost(inst: McTreeInstance, mapping: McMapping) -> float:
    """sum_e c_e g({c : e in phi(c)})"""
    check_mc_mapping(inst, mapping)
    users: Dict[int, List[int]] = {}
    for c, cut in enumerate(mapping.cuts):
        for e in cut:
            users.setdefault(e, []).append(c)
    total = 0.0
    for e, cs in sorted(users.items()):
        total += inst.edges[e].cost * (1.0 - math.prod(1.0 - inst.pairs[c].p for c in cs))
    return float(total)


def lp_mc_objective(inst: McTreeInstance, mapping: McMapping) -> float:
    """LP-MC objective of an integral solution: bought edges once, rented edges at p_c c_e"""
    check_mc_mapping(inst, mapping)
    bought = set()
    for c in mapping.bought:
        bought |= mapping.cuts[c]
    total = sum(inst.edges[e].cost for e in bought)
    for c, cut in enumerate(mapping.cuts):
        if c not in mapping.bought:
            total += inst.pairs[c].p * sum(inst.edges[e].cost for e in cut)
    return float(total)


def edge_id(inst: McTreeInstance, u: int, v: int) -> int:
    """Id of the tree edge {u,v}"""
    if not inst.graph.has_edge(u, v):
        raise InvalidInputError(f"({u},{v}) is not an edge of the tree")
    return inst.graph.edges[u, v]['id']
