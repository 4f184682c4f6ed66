import time

import click

from commands.common import build_spec, describe, emit, experiment_options, reports_errors, resolve_configuration
from models import GeneratorKind
from services.split_service import max_pairs_split_by_hyperplane, split_capacity


@click.command('capacity')
@experiment_options
@reports_errors
def capacity_cmd(**flags):
    """Split capacity f(N) with its certificate (and N' for pairs)."""
    started = time.perf_counter()
    spec = build_spec('capacity', **flags)
    config, _ = resolve_configuration(spec)
    result = split_capacity(config, spec.mode, spec.trials, spec.seed, spec.budget_families)
    results = {
        'configuration': describe(config),
        'f': result.f,
        'exhaustive': result.exhaustive,
        'families_examined': result.families_examined,
        'certificate': result.certificate,
    }
    if config.r == 2:
        results['n_prime'] = max_pairs_split_by_hyperplane(config).count
    if spec.kind is GeneratorKind.CLUSTERED:
        results['within_rd'] = result.f <= config.r * config.d
    emit(spec, results, started, rows=[{**describe(config), 'f': result.f, 'mode': spec.mode}],
         columns=['N', 'r', 'd', 'f', 'mode'])
