import os

import click

from universal_cover.commands.common import emit, load_problem
from universal_cover.errors import InvalidInputError
from universal_cover.generators import cases as random_cases
from universal_cover.loaders import read_json
from universal_cover.solver import ALGORITHMS, PROBLEMS, CoverSolver, check_algorithm
from universal_cover.verify import BenchCase, ratio_report
from universal_cover.utils import format_cost, format_ratio, handle_errors, output_options


def load_suite(problem: str, path: str):
    """Suite file: {"cases": [{"name": str, "instance": path, "dist": path}]}, paths relative to the file"""
    base = os.path.dirname(os.path.abspath(path))
    entries = read_json(path).get('cases')
    if not isinstance(entries, list):
        raise InvalidInputError(f"{path}: expected a 'cases' list")
    suite = []
    for k, entry in enumerate(entries):
        if 'instance' not in entry:
            raise InvalidInputError(f"{path}: case {k} has no 'instance'")
        dist_path = os.path.join(base, entry['dist']) if entry.get('dist') else None
        instance, dist = load_problem(problem, os.path.join(base, entry['instance']), dist_path)
        suite.append(BenchCase(entry.get('name', f"case-{k}"), instance, dist))
    return suite


@click.command('bench')
@click.option('--problem', required=True, type=click.Choice(PROBLEMS), help='Problem kind')
@click.option('--algo', 'algorithms', multiple=True, help='Algorithm (repeatable; default: all for the problem)')
@click.option('--suite', 'suite_path', type=click.Path(exists=True, dir_okay=False), help='Suite JSON file')
@click.option('--random', 'random_count', type=int, help='Number of random instances to generate')
@click.option('--size', default=5, show_default=True, type=int, help='Size of the random instances')
@click.option('--seed', default=0, show_default=True, type=int, help='Random seed')
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False, writable=True), help='Write the report as CSV')
@click.option('--json', 'json_path', type=click.Path(dir_okay=False, writable=True), help='Write the report as JSON')
@click.option('--workers', default=1, show_default=True, type=int, help='Rows run concurrently')
@click.option('--no-brute', is_flag=True, help='Skip the brute-force optimum')
@click.pass_context
@output_options
@handle_errors
def bench(ctx, problem, algorithms, suite_path, random_count, size, seed, csv_path, json_path, workers, no_brute,
          output, output_format):
    """Approximation ratios against the LP value and the brute-force optimum"""
    if (suite_path is None) == (random_count is None):
        raise InvalidInputError("Give exactly one of --suite or --random")
    algorithms = list(algorithms) or list(ALGORITHMS[problem])
    for algorithm in algorithms:
        check_algorithm(problem, algorithm)
    suite = load_suite(problem, suite_path) if suite_path else random_cases(problem, random_count, size, seed)
    click.echo(f"[INFO] Benchmarking {len(suite)} instances x {len(algorithms)} algorithms...", err=True)
    solver = CoverSolver(seed=seed, with_lp=True)
    report = ratio_report(suite, algorithms, solver.bench_runner(problem), brute=not no_brute, workers=workers)
    if csv_path:
        report.write_csv(csv_path)
    if json_path:
        report.write_json(json_path)

    rows = [[r['instance'], r['algorithm'], format_cost(r['cost']), format_cost(r['lp_value']),
             format_cost(r['brute_opt']), format_ratio(r['ratio_vs_lp']), format_ratio(r['ratio_vs_opt']), r['status']]
            for r in report.rows]
    aggregate = report.aggregate()
    emit(report.to_json(), output_format, output=output,
         title=f"Ratio report: {problem}",
         rows=rows, headers=['Instance', 'Algorithm', 'Cost', 'LP', 'Brute OPT', 'vs LP', 'vs OPT', 'Status'],
         summary=[('Max ratio vs LP', format_ratio(aggregate['max_ratio_vs_lp'])),
                  ('Max ratio vs OPT', format_ratio(aggregate['max_ratio_vs_opt'])),
                  ('Failed rows', aggregate['failed'])])
