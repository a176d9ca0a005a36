import click

from universal_cover.commands.common import (dist_option, emit, instance_option, load_problem, mapping_json,
                                             mapping_rows, problem_option)
from universal_cover.verify import brute_universal
from universal_cover.utils import handle_errors, output_options


@click.command('brute')
@problem_option
@instance_option
@dist_option
@click.pass_context
@output_options
@handle_errors
def brute(ctx, problem, instance_path, dist_path, output, output_format):
    """Optimal universal mapping by exhaustive enumeration"""
    instance, dist = load_problem(problem, instance_path, dist_path)
    click.echo(f"[INFO] Enumerating universal mappings for {problem}...", err=True)
    mapping, cost = brute_universal(instance, dist)
    data = mapping_json(instance, mapping)
    emit({"problem": problem, "cost": cost, **data}, output_format, output=output, file_payload=data,
         title=f"Optimal universal mapping: {problem}",
         rows=mapping_rows(instance, mapping), headers=['Request', 'Assigned To'],
         summary=[('Optimal expected cost', cost)])
