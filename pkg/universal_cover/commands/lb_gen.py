import os

import click

from universal_cover.commands.common import emit
from universal_cover.loaders import write_json
from universal_cover.verify import expected_cost, lb_instance
from universal_cover.utils import handle_errors, output_options


@click.command('lb-gen')
@click.option('--n', 'n', required=True, type=int, help='Number of non-dummy elements (>= 2)')
@click.option('--big-cost', required=True, type=float, help='Cost M of the big set (>= 4)')
@click.option('--output-dir', required=True, type=click.Path(file_okay=False), help='Directory for the emitted files')
@click.pass_context
@output_options
@handle_errors
def lb_gen(ctx, n, big_cost, output_dir, output, output_format):
    """Emit the two-branch lower-bound family with its closed-form costs"""
    family = lb_instance(n, big_cost)
    os.makedirs(output_dir, exist_ok=True)
    files = {
        'instance.json': family.instance.to_json(),
        'dist_singleton_branch.json': family.singleton_branch.to_json(),
        'dist_big_branch.json': family.big_branch.to_json(),
        'mapping_singleton.json': family.phi_singleton.to_json(),
        'mapping_big.json': family.phi_big.to_json(),
        'closed_forms.json': family.closed_forms,
    }
    for name, data in files.items():
        write_json(data, os.path.join(output_dir, name))

    evaluated = {
        'singleton_mapping_singleton_branch': expected_cost(family.instance, family.phi_singleton, family.singleton_branch),
        'big_mapping_big_branch': expected_cost(family.instance, family.phi_big, family.big_branch),
        'singleton_mapping_big_branch': expected_cost(family.instance, family.phi_singleton, family.big_branch),
        'big_mapping_singleton_branch': expected_cost(family.instance, family.phi_big, family.singleton_branch),
    }
    rows = [[key, f"{family.closed_forms[key]:.12f}", f"{value:.12f}"] for key, value in evaluated.items()]
    emit({"n": n, "big_cost": big_cost, "files": sorted(files), "closed_forms": family.closed_forms,
          "evaluated": evaluated},
         output_format, output=output,
         title=f"Lower-bound family: n={n}, M={big_cost:g}",
         rows=rows, headers=['Mapping / Branch', 'Closed Form', 'Evaluated'],
         summary=[('Files written to', output_dir)])
