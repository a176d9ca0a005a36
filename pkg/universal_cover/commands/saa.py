import click

from universal_cover.commands.common import dist_option, emit, instance_option, load_problem, mapping_rows
from universal_cover.solver import CoverSolver
from universal_cover.utils import handle_errors, output_options


@click.command('saa')
@click.option('--problem', required=True, type=click.Choice(['setcover', 'multicover']), help='Problem kind')
@click.option('--algo', 'algorithm', required=True, type=click.Choice(['lp-round', 'greedy']),
              help='Solver run on the empirical distribution')
@instance_option
@dist_option
@click.option('--samples', required=True, type=int, help='Number of oracle draws N')
@click.option('--seed', required=True, type=int, help='Random seed')
@click.option('--epsilon', default=0.5, show_default=True, type=float,
              help='Accuracy target used for the recommended sample size')
@click.pass_context
@output_options
@handle_errors
def saa(ctx, problem, algorithm, instance_path, dist_path, samples, seed, epsilon, output, output_format):
    """Solve from samples only (oracle model) and report the exact cost"""
    instance, dist = load_problem(problem, instance_path, dist_path)
    click.echo(f"[INFO] Drawing {samples} samples...", err=True)
    result = CoverSolver(seed=seed).saa(problem, algorithm, instance, dist, samples, epsilon)
    mapping = result.mapping.to_json()
    payload = {"problem": problem, "algorithm": algorithm, "seed": seed, "samples": samples,
               "recommended_samples": result.details['recommended_samples'], "cost": result.cost, **mapping}
    emit(payload, output_format, output=output, file_payload=mapping,
         title=f"SAA mapping: {problem} / {algorithm}",
         rows=mapping_rows(instance, result.mapping), headers=['Request', 'Assigned To'],
         summary=[('Expected cost', result.cost), ('Samples', samples),
                  ('Recommended samples', result.details['recommended_samples'])])
