import click

from universal_cover.commands.common import (dist_option, emit, instance_option, load_problem, mapping_json,
                                             mapping_rows, problem_option, seed_option)
from universal_cover.facility import FlFractional
from universal_cover.loaders import write_json
from universal_cover.multicut import McFractional
from universal_cover.setcover import FractionalCover
from universal_cover.solver import CoverSolver, algorithm_matrix, check_algorithm
from universal_cover.utils import handle_errors, output_options


def fractional_json(frac) -> dict:
    """JSON dump of whichever LP solution the pipeline produced"""
    if isinstance(frac, FractionalCover):
        return frac.to_json()
    if isinstance(frac, FlFractional):
        return {"value": frac.value, "x": frac.x.tolist(), "xbar": frac.xbar.tolist()}
    if isinstance(frac, McFractional):
        return {"value": frac.value, "x": frac.x.tolist(),
                "xbar": [{"client": c, "edge": e, "y": y} for (c, e), y in sorted(frac.xbar.items())]}
    return {}


@click.command('solve', help=f"Compute a universal mapping and its expected cost.\n\nAlgorithms: {algorithm_matrix()}")
@problem_option
@click.option('--algo', 'algorithm', required=True, help='Algorithm (must suit the problem kind)')
@instance_option
@dist_option
@seed_option
@click.option('--emit-lp', 'emit_lp', type=click.Path(dir_okay=False, writable=True),
              help='Write the fractional LP solution as JSON')
@click.pass_context
@output_options
@handle_errors
def solve(ctx, problem, algorithm, instance_path, dist_path, seed, emit_lp, output, output_format):
    """Compute a universal mapping and its expected cost"""
    check_algorithm(problem, algorithm)
    instance, dist = load_problem(problem, instance_path, dist_path)
    click.echo(f"[INFO] Solving {problem} with {algorithm}...", err=True)
    result = CoverSolver(seed=seed).solve(problem, algorithm, instance, dist)

    if emit_lp:
        if result.fractional is None:
            click.echo(f"[INFO] {algorithm} solves no LP; nothing written to {emit_lp}", err=True)
        else:
            write_json(fractional_json(result.fractional), emit_lp)

    mapping = mapping_json(instance, result.mapping)
    payload = {"problem": problem, "algorithm": algorithm, "seed": seed,
               "cost": result.cost, "lp_value": result.lp_value, **mapping}
    summary = [('Expected cost', result.cost)]
    if result.lp_value is not None:
        summary.append(('LP value', result.lp_value))
    emit(payload, output_format, output=output, file_payload=mapping,
         title=f"Universal mapping: {problem} / {algorithm}",
         rows=mapping_rows(instance, result.mapping), headers=['Request', 'Assigned To'], summary=summary)
