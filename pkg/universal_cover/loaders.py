"""JSON readers and writers for instances, distributions and mappings"""
import json
import logging
import os
from typing import Any, Dict, Optional

from universal_cover.edgecover import GraphEdge, GraphInstance
from universal_cover.errors import InvalidInputError
from universal_cover.facility import FlInstance, FlMapping
from universal_cover.model import CoverSet, Distribution, IndependentDist, Instance, ScenarioDist, element_set
from universal_cover.multicut import Edge, McMapping, McTreeInstance, Pair, edge_id
from universal_cover.setcover import ConnectionCosts, Mapping, NmflProblem

logger = logging.getLogger('universal_cover')


def read_json(path: str) -> Any:
    """Load a JSON document, turning decode errors into InvalidInputError"""
    logger.debug(f"Reading {path}")
    with open(path) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"{path}: invalid JSON ({e})")


def write_json(data: Any, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(data, f, indent=2)
        f.write('\n')
    logger.debug(f"Wrote {path}")


def _field(data: Dict[str, Any], key: str, what: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise InvalidInputError(f"{what} is missing '{key}'")
    return data[key]


def parse_instance(data: Dict[str, Any]) -> Instance:
    n = int(_field(data, 'n', 'Instance'))
    sets = []
    for k, s in enumerate(_field(data, 'sets', 'Instance')):
        sets.append(CoverSet(str(_field(s, 'id', f'Set {k}')), float(_field(s, 'cost', f'Set {k}')),
                             element_set(_field(s, 'elements', f'Set {k}'), n)))
    requirements = tuple(int(r) for r in data.get('requirements') or ())
    return Instance(n=n, sets=tuple(sets), requirements=requirements)


def load_instance(path: str) -> Instance:
    return parse_instance(read_json(path))


def load_nmfl(path: str) -> NmflProblem:
    """Set-cover file plus 'connection_costs' (row = element, column = set in file order)"""
    data = read_json(path)
    inst = parse_instance(data)
    return NmflProblem(inst, ConnectionCosts(_field(data, 'connection_costs', 'NMFL instance')))


def parse_distribution(data: Dict[str, Any], n: int) -> Distribution:
    kind = _field(data, 'type', 'Distribution')
    if kind == 'scenario':
        scenarios = [(float(_field(s, 'prob', 'Scenario')), _field(s, 'elements', 'Scenario'))
                     for s in _field(data, 'scenarios', 'Distribution')]
        return ScenarioDist(n, scenarios)
    if kind == 'independent':
        probs = _field(data, 'probs', 'Distribution')
        if len(probs) != n:
            raise InvalidInputError(f"Distribution has {len(probs)} probabilities, instance has {n} elements")
        return IndependentDist(probs)
    raise InvalidInputError(f"Unknown distribution type '{kind}' (expected 'scenario' or 'independent')")


def load_distribution(path: str, n: int) -> Distribution:
    return parse_distribution(read_json(path), n)


def parse_mapping(data: Dict[str, Any], n: int) -> Mapping:
    """{"assignment": {"<element>": ["<set_id>", ...]}}; absent elements map to nothing"""
    raw = _field(data, 'assignment', 'Mapping')
    if not isinstance(raw, dict):
        raise InvalidInputError("Mapping 'assignment' must be an object")
    assigned: Dict[int, tuple] = {}
    for key, ids in raw.items():
        try:
            u = int(key)
        except ValueError:
            raise InvalidInputError(f"Mapping key '{key}' is not an element id")
        if u < 0:
            raise InvalidInputError(f"Mapping key {u} is negative")
        assigned[u] = (str(ids),) if isinstance(ids, str) else tuple(str(s) for s in ids)
    size = max([n] + [u + 1 for u in assigned])
    return Mapping(tuple(assigned.get(u, ()) for u in range(size)))


def load_mapping(path: str, n: int) -> Mapping:
    return parse_mapping(read_json(path), n)


def parse_fl_instance(data: Dict[str, Any]) -> FlInstance:
    clients = _field(data, 'clients', 'FL instance')
    facilities = _field(data, 'facilities', 'FL instance')
    return FlInstance(
        probs=[float(_field(c, 'p', 'Client')) for c in clients],
        facility_ids=tuple(str(_field(f, 'id', 'Facility')) for f in facilities),
        open_costs=[float(_field(f, 'open_cost', 'Facility')) for f in facilities],
        dist=_field(data, 'dist', 'FL instance'),
        metric=bool(data.get('metric', True)),
    )


def load_fl_instance(path: str) -> FlInstance:
    return parse_fl_instance(read_json(path))


def fl_instance_to_json(inst: FlInstance) -> dict:
    return {"clients": [{"p": float(p)} for p in inst.probs],
            "facilities": [{"id": fid, "open_cost": float(c)} for fid, c in zip(inst.facility_ids, inst.open_costs)],
            "dist": inst.dist.tolist(), "metric": inst.metric}


def load_fl_mapping(path: str, inst: FlInstance) -> FlMapping:
    """{"assignment": {"<client>": "<facility_id>"}}; a missing client fails the feasibility check"""
    raw = _field(read_json(path), 'assignment', 'FL mapping')
    index = {fid: f for f, fid in enumerate(inst.facility_ids)}
    assignment = []
    for c in range(inst.num_clients):
        if str(c) not in raw:
            break
        fid = str(raw[str(c)])
        if fid not in index:
            raise InvalidInputError(f"Client {c} is mapped to unknown facility '{fid}'")
        assignment.append(index[fid])
    return FlMapping(tuple(assignment))


def _edge_fields(e: Dict[str, Any], k: int, what: str, default_cost: Optional[float] = None):
    """(u, v, cost) of the k-th edge record"""
    label = f"{what} edge {k}"
    if isinstance(e, dict) and default_cost is not None and 'cost' not in e:
        cost = default_cost
    else:
        cost = _field(e, 'cost', label)
    return int(_field(e, 'u', label)), int(_field(e, 'v', label)), float(cost)


def parse_mc_instance(data: Dict[str, Any]) -> McTreeInstance:
    edges = _field(data, 'edges', 'Multicut instance')
    pairs = data.get('pairs', [])
    return McTreeInstance(
        num_nodes=int(_field(data, 'nodes', 'Multicut instance')),
        edges=tuple(Edge(*_edge_fields(e, k, 'Multicut')) for k, e in enumerate(edges)),
        pairs=tuple(Pair(int(_field(p, 's', f'Pair {k}')), int(_field(p, 't', f'Pair {k}')),
                         float(_field(p, 'p', f'Pair {k}'))) for k, p in enumerate(pairs)),
    )


def load_mc_instance(path: str) -> McTreeInstance:
    return parse_mc_instance(read_json(path))


def mc_instance_to_json(inst: McTreeInstance) -> dict:
    return {"nodes": inst.num_nodes,
            "edges": [{"u": e.u, "v": e.v, "cost": e.cost} for e in inst.edges],
            "pairs": [{"s": p.s, "t": p.t, "p": p.p} for p in inst.pairs]}


def load_mc_mapping(path: str, inst: McTreeInstance) -> McMapping:
    """{"cuts": {"<client>": [[u, v], ...]}}"""
    raw = _field(read_json(path), 'cuts', 'Multicut mapping')
    cuts = []
    for c in range(len(inst.pairs)):
        if str(c) not in raw:
            break
        cuts.append(frozenset(edge_id(inst, int(u), int(v)) for u, v in raw[str(c)]))
    return McMapping(tuple(cuts))


def parse_graph(data: Dict[str, Any]) -> GraphInstance:
    edges = _field(data, 'edges', 'Graph')
    return GraphInstance(
        num_vertices=int(_field(data, 'nodes', 'Graph')),
        edges=tuple(GraphEdge(*_edge_fields(e, k, 'Graph', default_cost=1.0)) for k, e in enumerate(edges)),
    )


def load_graph(path: str):
    """Graph plus optional per-vertex costs"""
    data = read_json(path)
    costs: Optional[list] = data.get('vertex_costs')
    return parse_graph(data), costs


def graph_to_json(g: GraphInstance) -> dict:
    return {"nodes": g.num_vertices, "edges": [{"u": e.u, "v": e.v, "cost": e.cost} for e in g.edges]}
