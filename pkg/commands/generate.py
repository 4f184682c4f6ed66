import logging
import os
import time

import click

from commands.common import build_spec, describe, emit, experiment_options, reports_errors, resolve_configuration
from config import Config
from services.report_service import save_configuration
from services.split_service import is_perfect_split

logger = logging.getLogger(__name__)


@click.command('generate')
@experiment_options
@reports_errors
def generate_cmd(**flags):
    """Generate a configuration and write it as JSON."""
    started = time.perf_counter()
    spec = build_spec('generate', **flags)
    config, family = resolve_configuration(spec)
    name = f"{spec.kind.value}_N{config.N}_r{config.r}_d{config.d}_seed{spec.seed}.json"
    path = save_configuration(config, os.path.join(spec.out or Config.OUTPUT_DIR, name))
    results = {'configuration': describe(config), 'path': path, 'kind': spec.kind.value}
    if family is not None:
        results['family'] = list(family)
        results['perfect_split'] = is_perfect_split(family, config)
    emit(spec, results, started)
