"""Utility functions for Universal Cover"""
from typing import Iterable, Optional
import functools
import logging
import math
import zlib

import click
import numpy as np

from universal_cover.errors import UniversalCoverError

logger = logging.getLogger('universal_cover')

# Absolute tolerance for probability/cost comparisons
TOL = 1e-9


def format_cost(value: Optional[float]) -> str:
    """Format a cost with enough digits to round-trip through 'eval'"""
    if value is None:
        return "N/A"
    return f"{value:.12f}"


def format_ratio(value: Optional[float]) -> str:
    """Format an approximation ratio for tables"""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "N/A"
    return f"{value:.4f}"


def format_elements(elements: Iterable[int]) -> str:
    """Format an element set as {a,b,c}"""
    return "{" + ",".join(str(u) for u in sorted(elements)) + "}"


def harmonic(n: int) -> float:
    """n-th harmonic number H_n (H_0 = 0)"""
    return sum(1.0 / i for i in range(1, n + 1))


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named stream derived from one seed

    Every consumer of randomness asks for its own stream, so modules never
    share generator state and a single --seed reproduces the whole run.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode('utf-8'))]))


def output_options(func):
    """
    Decorator to add --output and --format options to a command.
    """
    func = click.option('--format', 'output_format', type=click.Choice(['json', 'table']), default='json',
                        help='Output format for stdout')(func)
    func = click.option('--output', type=click.Path(dir_okay=False, writable=True),
                        help='Write the result JSON to this file')(func)
    return func


def handle_errors(func):
    """
    Decorator mapping package errors to single-line diagnostics and exit codes.

    Exit codes: 1 usage or unsupported input, 2 infeasible, 3 solver failure.
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except UniversalCoverError as e:
            logger.exception(f"{ctx.command_path} failed: {e}")
            click.echo(f"[ERROR] {e}", err=True)
            ctx.exit(e.exit_code)
        except (OSError, ValueError, KeyError, TypeError) as e:
            logger.exception(f"{ctx.command_path} failed on input: {e}")
            click.echo(f"[ERROR] {e}", err=True)
            ctx.exit(1)

    return wrapper
