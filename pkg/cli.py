#!/usr/bin/env python3
"""
Universal Cover CLI - Main entry point
"""
import os
import sys
import logging
from dataclasses import replace
from typing import List, Optional

import click
from dotenv import load_dotenv

from universal_cover.config import LP_BACKENDS, SFM_METHODS, get_settings, set_settings

# Load environment variables from .env file
load_dotenv()

# Setup logging - log file in project root unless overridden
project_root = os.path.dirname(os.path.abspath(__file__))
log_file = os.getenv('UNIVERSAL_COVER_LOG_FILE') or os.path.join(project_root, 'universal_cover.log')
logging.basicConfig(
    level=logging.DEBUG,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(log_file),
        logging.StreamHandler(sys.stderr) if os.getenv('DEBUG') else logging.NullHandler()
    ]
)
logger = logging.getLogger('universal_cover')


@click.group()
@click.option('--sfm-method', type=click.Choice(SFM_METHODS), help='Submodular minimization method')
@click.option('--lp-backend', type=click.Choice(LP_BACKENDS), help='LP solver backend')
@click.pass_context
def cli(ctx, sfm_method, lp_backend):
    """Universal Cover CLI - universal stochastic covering problems

    Solve, evaluate and certify universal mappings for set cover, multicover,
    vertex and edge cover, facility location and multicut on trees.
    """
    ctx.ensure_object(dict)
    try:
        settings = get_settings()
    except ValueError as e:
        click.echo(f"[ERROR] {e}", err=True)
        ctx.exit(1)
    overrides = {k: v for k, v in (('sfm_method', sfm_method), ('lp_backend', lp_backend)) if v}
    if overrides:
        settings = replace(settings, **overrides)
        set_settings(settings)
    ctx.obj['settings'] = settings
    logger.debug(f"CLI invoked: {ctx.invoked_subcommand} with settings {settings}")


# Import and register commands
from universal_cover.commands import bench, brute, evaluate, lb_gen, saa, solve

cli.add_command(solve.solve)
cli.add_command(evaluate.evaluate)
cli.add_command(brute.brute)
cli.add_command(saa.saa)
cli.add_command(lb_gen.lb_gen)
cli.add_command(bench.bench)


def run(argv: Optional[List[str]] = None) -> int:
    """Run the CLI on ``argv`` and return the exit code (usage errors map to 1)"""
    try:
        rv = cli.main(args=argv, prog_name='universal-cover', standalone_mode=False)
    except click.UsageError as e:
        click.echo(f"[ERROR] {e.format_message()}", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("[ERROR] Aborted", err=True)
        return 1
    return rv if isinstance(rv, int) else 0


if __name__ == '__main__':
    sys.exit(run())
