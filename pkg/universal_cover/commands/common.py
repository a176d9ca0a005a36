"""Input loading and output helpers shared by the commands"""
import json
from typing import Any, List, Optional, Sequence, Tuple

import click
from tabulate import tabulate

from universal_cover.edgecover import GraphInstance, vertex_cover_instance
from universal_cover.errors import InvalidInputError
from universal_cover.facility import FlInstance, FlMapping
from universal_cover.loaders import (load_distribution, load_fl_instance, load_fl_mapping, load_graph, load_instance,
                                     load_mapping, load_mc_instance, load_mc_mapping, load_nmfl, write_json)
from universal_cover.model import Distribution, Instance
from universal_cover.multicut import McMapping, McTreeInstance
from universal_cover.setcover import NmflProblem
from universal_cover.solver import PROBLEMS
from universal_cover.utils import format_cost

problem_option = click.option('--problem', required=True, type=click.Choice(PROBLEMS), help='Problem kind')
instance_option = click.option('--instance', 'instance_path', required=True,
                               type=click.Path(exists=True, dir_okay=False), help='Instance JSON file')
dist_option = click.option('--dist', 'dist_path', type=click.Path(exists=True, dir_okay=False),
                           help='Distribution JSON file (facility and multicut instances carry their own)')
seed_option = click.option('--seed', default=0, type=int, show_default=True, help='Random seed')


def element_count(problem: Any) -> int:
    """Size of the universe the distribution ranges over"""
    if isinstance(problem, Instance):
        return problem.n
    if isinstance(problem, NmflProblem):
        return problem.instance.n
    if isinstance(problem, GraphInstance):
        return problem.num_vertices
    if isinstance(problem, FlInstance):
        return problem.num_clients
    return len(problem.pairs)


def load_problem(kind: str, instance_path: str, dist_path: Optional[str]) -> Tuple[Any, Optional[Distribution]]:
    """Instance object of the given kind plus its distribution (if a file was given)"""
    if kind in ('setcover', 'multicover'):
        problem: Any = load_instance(instance_path)
    elif kind == 'vertexcover':
        graph, costs = load_graph(instance_path)
        problem = vertex_cover_instance(graph, costs)
    elif kind == 'edgecover':
        problem, _ = load_graph(instance_path)
    elif kind == 'nmfl':
        problem = load_nmfl(instance_path)
    elif kind == 'facility':
        problem = load_fl_instance(instance_path)
    elif kind == 'multicut-tree':
        problem = load_mc_instance(instance_path)
    else:
        raise InvalidInputError(f"Unknown problem kind '{kind}'")
    dist = load_distribution(dist_path, element_count(problem)) if dist_path else None
    if dist is None and kind not in ('facility', 'multicut-tree'):
        raise InvalidInputError(f"--dist is required for {kind}")
    return problem, dist


def load_problem_mapping(problem: Any, path: str):
    if isinstance(problem, FlInstance):
        return load_fl_mapping(path, problem)
    if isinstance(problem, McTreeInstance):
        return load_mc_mapping(path, problem)
    return load_mapping(path, element_count(problem))


def mapping_json(problem: Any, mapping: Any) -> dict:
    if isinstance(mapping, (FlMapping, McMapping)):
        return mapping.to_json(problem)
    return mapping.to_json()


def mapping_rows(problem: Any, mapping: Any) -> List[List[str]]:
    data = mapping_json(problem, mapping)
    if 'cuts' in data:
        return [[c, ', '.join(f"{u}-{v}" for u, v in edges)] for c, edges in data['cuts'].items()]
    return [[u, ids if isinstance(ids, str) else ', '.join(ids)] for u, ids in data['assignment'].items()]


def emit(payload: dict, output_format: str, output: Optional[str] = None, file_payload: Optional[dict] = None,
         title: Optional[str] = None, rows: Sequence[Sequence[Any]] = (), headers: Sequence[str] = (),
         summary: Sequence[Tuple[str, Any]] = ()) -> None:
    """Write ``file_payload`` (default ``payload``) to --output and print the result in the chosen format"""
    if output:
        write_json(file_payload if file_payload is not None else payload, output)
    if output_format == 'json':
        click.echo(json.dumps(payload, indent=2))
        return
    if title:
        click.echo(f"\n{'=' * 80}")
        click.echo(title)
        click.echo(f"{'=' * 80}\n")
    if rows:
        click.echo(tabulate(rows, headers=list(headers), tablefmt='grid'))
    elif headers:
        click.echo("No rows.")
    if summary:
        click.echo("")
        for label, value in summary:
            click.echo(f"{label}: {format_cost(value) if isinstance(value, float) else value}")
    if output:
        click.echo(f"\n[SUCCESS] Wrote {output}")
