"""Universal stochastic metric facility location, independent activation

Pipeline: solve LP-FL (buy variables x, rent variables xbar), split clients
at 3/4 and 1/4, serve the big side with a primal-dual whose client duals grow
at speed p_c, and send every small client to argmin_f o_f + d(c,f).
"""
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple
import logging
import math

import networkx as nx
import numpy as np

from universal_cover.errors import InfeasibleMappingError, InvalidInputError, UnsupportedProblemError
from universal_cover.lpcore import Constraint, LinearProgram, solve_lp
from universal_cover.model import Distribution, IndependentDist
from universal_cover.utils import TOL

logger = logging.getLogger('universal_cover')

BIG_THRESHOLD = 0.75
SMALL_THRESHOLD = 0.25
SCENARIO_FL_MESSAGE = ("metric facility location is only supported in the independent activation model; "
                       "no rounding procedure with a constant guarantee is known for scenario distributions "
                       "(an open problem)")


@dataclass(frozen=True)
class FlInstance:
    """Clients with activation probabilities, facilities with opening costs, distances d[c,f]"""
    probs: np.ndarray
    facility_ids: Tuple[str, ...]
    open_costs: np.ndarray
    dist: np.ndarray
    metric: bool = True

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        costs = np.asarray(self.open_costs, dtype=float)
        d = np.asarray(self.dist, dtype=float)
        if np.any(~np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise InvalidInputError("Client probabilities must lie in [0,1]")
        if np.any(~np.isfinite(costs)) or np.any(costs < 0):
            raise InvalidInputError("Opening costs must be finite and non-negative")
        if len(self.facility_ids) != costs.size:
            raise InvalidInputError("Facility ids and opening costs differ in length")
        if len(set(self.facility_ids)) != len(self.facility_ids):
            raise InvalidInputError("Facility ids must be unique")
        if d.shape != (probs.size, costs.size):
            raise InvalidInputError(f"Distance matrix has shape {d.shape}, expected {(probs.size, costs.size)}")
        if np.any(~np.isfinite(d)) or np.any(d < 0):
            raise InvalidInputError("Distances must be finite and non-negative")
        if costs.size == 0 and probs.size > 0:
            raise InvalidInputError("Facility location needs at least one facility")
        object.__setattr__(self, 'probs', probs)
        object.__setattr__(self, 'open_costs', costs)
        object.__setattr__(self, 'dist', d)
        object.__setattr__(self, 'facility_ids', tuple(str(f) for f in self.facility_ids))

    @property
    def num_clients(self) -> int:
        return self.probs.size

    @property
    def num_facilities(self) -> int:
        return self.open_costs.size

    @property
    def distribution(self) -> IndependentDist:
        return IndependentDist(self.probs)


@dataclass
class FlFractional:
    x: np.ndarray
    xbar: np.ndarray
    value: float


@dataclass(frozen=True)
class FlMapping:
    """phi(c) as a facility index per client; ``bought`` marks the big-side clients"""
    assignment: Tuple[int, ...]
    bought: FrozenSet[int] = field(default=frozenset(), compare=False)

    def to_json(self, inst: FlInstance) -> dict:
        return {"assignment": {str(c): inst.facility_ids[f] for c, f in enumerate(self.assignment)}}


def require_independent(dist: Optional[Distribution]) -> None:
    """Reject distributions other than independent activation"""
    if dist is not None and dist.kind != 'independent':
        raise UnsupportedProblemError(SCENARIO_FL_MESSAGE)


def validate_metric(inst: FlInstance, tol: float = 1e-9) -> None:
    """Check that d extends to a metric on clients and facilities

    The extension exists iff no client-facility distance exceeds the shortest
    path between the two in the bipartite distance graph.
    """
    nc, nf = inst.num_clients, inst.num_facilities
    graph = nx.Graph()
    graph.add_nodes_from(range(nc + nf))
    for c in range(nc):
        for f in range(nf):
            graph.add_edge(c, nc + f, weight=float(inst.dist[c, f]))
    shortest = nx.floyd_warshall_numpy(graph, nodelist=list(range(nc + nf)))
    for c in range(nc):
        for f in range(nf):
            if inst.dist[c, f] > shortest[c, nc + f] + tol:
                raise InvalidInputError(f"Distances are not metric: d(client {c}, facility "
                                        f"'{inst.facility_ids[f]}') = {inst.dist[c, f]} exceeds a path of "
                                        f"length {shortest[c, nc + f]}")


def solve_lp_fl(inst: FlInstance) -> FlFractional:
    """LP-FL with max_c x[c,f] linearized by an auxiliary variable per facility"""
    nc, nf = inst.num_clients, inst.num_facilities
    x_idx = lambda c, f: c * nf + f
    xbar_idx = lambda c, f: nc * nf + c * nf + f
    aux_idx = lambda f: 2 * nc * nf + f
    objective = np.zeros(2 * nc * nf + nf)
    for c in range(nc):
        for f in range(nf):
            conn = inst.probs[c] * inst.dist[c, f]
            objective[x_idx(c, f)] = conn
            objective[xbar_idx(c, f)] = inst.open_costs[f] * inst.probs[c] + conn
    for f in range(nf):
        objective[aux_idx(f)] = inst.open_costs[f]
    lp = LinearProgram(objective=objective, sense='min', name='lp-fl')
    for c in range(nc):
        coeffs = {}
        for f in range(nf):
            coeffs[x_idx(c, f)] = 1.0
            coeffs[xbar_idx(c, f)] = 1.0
        lp.add(Constraint(coeffs, '>=', 1.0, tag=('serve', c)))
    for f in range(nf):
        for c in range(nc):
            lp.add(Constraint({aux_idx(f): 1.0, x_idx(c, f): -1.0}, '>=', 0.0, tag=('max', f, c)))
    result = solve_lp(lp)
    x = result.x[:nc * nf].reshape(nc, nf)
    xbar = result.x[nc * nf:2 * nc * nf].reshape(nc, nf)
    logger.info(f"LP-FL solved: {nc} clients, {nf} facilities, value={result.value:.9g}")
    return FlFractional(x=x, xbar=xbar, value=result.value)


def split_clients(frac: FlFractional) -> Tuple[List[int], List[int]]:
    """Clients buying at least 3/4 go big; the rest rent more than 1/4 and go small"""
    big, small = [], []
    for c in range(frac.x.shape[0]):
        if frac.x[c].sum() >= BIG_THRESHOLD - TOL:
            big.append(c)
        else:
            small.append(c)
    return big, small


def primal_dual_distorted_fl(inst: FlInstance, clients: Sequence[int],
                             speeds: Optional[Sequence[float]] = None) -> Dict[int, int]:
    """Primal-dual facility location where client c's dual grows at speed p_c

    Time t is a common radius: c reaches facility f at t = d(c,f) and then pays
    p_c (t - d(c,f)) towards o_f. A facility opens once fully paid; active
    clients that reach an open facility freeze. Among the opened facilities a
    maximal conflict-free subset is kept in opening order (conflict: a client
    paid positively towards both) and every client goes to its nearest kept
    facility. Returns client -> facility index.
    """
    clients = list(clients)
    if not clients:
        return {}
    nf = inst.num_facilities
    speed = {c: float(inst.probs[c] if speeds is None else speeds[k]) for k, c in enumerate(clients)}
    d = inst.dist
    o = inst.open_costs
    active = set(clients)
    frozen_at: Dict[int, float] = {}
    opened: Dict[int, float] = {}
    t = 0.0

    def paid(f: int, now: float) -> Tuple[float, float]:
        amount, rate = 0.0, 0.0
        for c in clients:
            end = frozen_at.get(c, now)
            if end > d[c, f]:
                amount += speed[c] * (end - d[c, f])
            if c in active and now >= d[c, f] - TOL:
                rate += speed[c]
        return amount, rate

    def settle(now: float) -> None:
        changed = True
        while changed:
            changed = False
            for f in range(nf):
                if f not in opened and paid(f, now)[0] >= o[f] - TOL:
                    opened[f] = now
                    changed = True
            for c in sorted(active):
                if any(now >= d[c, f] - TOL for f in opened):
                    frozen_at[c] = now
                    active.discard(c)
                    changed = True

    settle(t)
    while active:
        candidates = [d[c, f] for c in active for f in range(nf) if d[c, f] > t + TOL]
        for f in range(nf):
            if f in opened:
                continue
            amount, rate = paid(f, t)
            if rate > 0:
                candidates.append(t + (o[f] - amount) / rate)
        if not candidates:
            # nobody is paying any more; open the cheapest facility to release the rest
            f = min((f for f in range(nf) if f not in opened), key=lambda f: (o[f], f))
            opened[f] = t
            for c in sorted(active):
                if t >= d[c, f] - TOL:
                    frozen_at[c] = t
                    active.discard(c)
            continue
        t = max(t, min(candidates))
        settle(t)

    order = sorted(opened, key=lambda f: (opened[f], f))
    kept: List[int] = []
    for f in order:
        conflict = any(
            speed[c] > 0 and frozen_at[c] - d[c, f] > TOL and frozen_at[c] - d[c, g] > TOL
            for g in kept for c in clients)
        if not conflict:
            kept.append(f)
    assignment = {c: min(kept, key=lambda f: (d[c, f], f)) for c in clients}
    logger.debug(f"Primal-dual opened {len(opened)} facilities, kept {sorted(kept)}")
    return assignment


def distorted_cost(inst: FlInstance, assignment: Dict[int, int]) -> float:
    """Opening cost of used facilities plus sum p_c d(c, phi(c))"""
    used = set(assignment.values())
    return float(sum(inst.open_costs[f] for f in used)
                 + sum(inst.probs[c] * inst.dist[c, f] for c, f in assignment.items()))


def distorted_fl_lp(inst: FlInstance, clients: Sequence[int]) -> float:
    """Optimal value of the distorted facility location LP over ``clients``"""
    clients = list(clients)
    if not clients:
        return 0.0
    nc, nf = len(clients), inst.num_facilities
    objective = np.zeros(nc * nf + nf)
    for k, c in enumerate(clients):
        for f in range(nf):
            objective[k * nf + f] = inst.probs[c] * inst.dist[c, f]
    objective[nc * nf:] = inst.open_costs
    lp = LinearProgram(objective=objective, sense='min', name='distorted-fl')
    for k in range(nc):
        lp.add(Constraint({k * nf + f: 1.0 for f in range(nf)}, '>=', 1.0))
        for f in range(nf):
            lp.add(Constraint({nc * nf + f: 1.0, k * nf + f: -1.0}, '>=', 0.0))
    return solve_lp(lp).value


def round_fl(inst: FlInstance, frac: FlFractional) -> FlMapping:
    """Big clients through the speed-distorted primal-dual, small clients to argmin o_f + d(c,f)"""
    big, small = split_clients(frac)
    assignment = primal_dual_distorted_fl(inst, big)
    for c in small:
        assignment[c] = min(range(inst.num_facilities),
                            key=lambda f: (inst.open_costs[f] + inst.dist[c, f], f))
    logger.info(f"Facility rounding: {len(big)} big clients, {len(small)} small clients")
    return FlMapping(tuple(assignment[c] for c in range(inst.num_clients)), bought=frozenset(big))


def check_fl_mapping(inst: FlInstance, mapping: FlMapping) -> None:
    if len(mapping.assignment) < inst.num_clients:
        missing = len(mapping.assignment)
        raise InfeasibleMappingError(f"Client {missing} is not assigned to a facility", key=missing)
    for c, f in enumerate(mapping.assignment):
        if f is None or f < 0 or f >= inst.num_facilities:
            raise InfeasibleMappingError(f"Client {c} is not assigned to a facility", key=c)


def fl_expected_cost(inst: FlInstance, mapping: FlMapping) -> float:
    """sum_f o_f g(phi^-1(f)) + sum_c p_c d(c, phi(c))"""
    check_fl_mapping(inst, mapping)
    preimage: Dict[int, List[int]] = {}
    for c, f in enumerate(mapping.assignment):
        preimage.setdefault(f, []).append(c)
    total = 0.0
    for f, cs in sorted(preimage.items()):
        total += inst.open_costs[f] * (1.0 - math.prod(1.0 - inst.probs[c] for c in cs))
    total += sum(inst.probs[c] * inst.dist[c, f] for c, f in enumerate(mapping.assignment))
    return float(total)


def lp_fl_objective(inst: FlInstance, mapping: FlMapping) -> float:
    """LP-FL objective of an integral solution: bought facilities in full, rented ones at p_c o_f"""
    check_fl_mapping(inst, mapping)
    bought = {mapping.assignment[c] for c in mapping.bought}
    total = sum(inst.open_costs[f] for f in bought)
    for c, f in enumerate(mapping.assignment):
        if c not in mapping.bought:
            total += inst.probs[c] * inst.open_costs[f]
        total += inst.probs[c] * inst.dist[c, f]
    return float(total)
