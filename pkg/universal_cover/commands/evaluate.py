import click

from universal_cover.commands.common import (dist_option, emit, instance_option, load_problem, load_problem_mapping,
                                             problem_option, seed_option)
from universal_cover.verify import expected_cost, monte_carlo_cost
from universal_cover.utils import handle_errors, output_options


@click.command('eval')
@problem_option
@instance_option
@dist_option
@click.option('--mapping', 'mapping_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Mapping JSON file')
@click.option('--monte-carlo', 'monte_carlo', type=int, help='Also estimate the cost from N seeded samples')
@seed_option
@click.pass_context
@output_options
@handle_errors
def evaluate(ctx, problem, instance_path, dist_path, mapping_path, monte_carlo, seed, output, output_format):
    """Expected cost of a given mapping"""
    instance, dist = load_problem(problem, instance_path, dist_path)
    mapping = load_problem_mapping(instance, mapping_path)
    cost = expected_cost(instance, mapping, dist)
    payload = {"problem": problem, "cost": cost}
    summary = [('Expected cost', cost)]
    if monte_carlo is not None:
        estimate = monte_carlo_cost(instance, mapping, dist, samples=monte_carlo, seed=seed)
        payload["monte_carlo"] = {"mean": estimate.mean, "stderr": estimate.stderr, "samples": estimate.samples}
        summary += [('Monte Carlo mean', estimate.mean), ('Standard error', estimate.stderr),
                    ('Samples', estimate.samples)]
    emit(payload, output_format, output=output, title=f"Evaluation: {problem}", summary=summary)
