import time

import click

from commands.common import build_spec, describe, emit, experiment_options, reports_errors, resolve_configuration
from services.probabilistic_service import search_tolerant_partition
from services.tolerance_service import TOLERANCE_CSV_COLUMNS


@click.command('search')
@experiment_options
@click.option('--target', type=int, help='tolerance to reach')
@reports_errors
def search_cmd(**flags):
    """Random colourful choices until one reaches the target tolerance."""
    started = time.perf_counter()
    spec = build_spec('search', **flags)
    config, _ = resolve_configuration(spec)
    target = spec.target if spec.target is not None else 0
    report = search_tolerant_partition(config, target, spec.trials, spec.seed, spec.budget_subsets)
    results = {
        'configuration': describe(config),
        'target': target,
        'found': report.found,
        'trials': report.trials,
        'tolerances': report.tolerances,
        'best_trial': report.best_trial,
        'best_partition': report.best_partition,
        'best_report': report.best_report,
    }
    rows = [report.best_report.as_row(config, report.best_partition)] if report.best_report else []
    emit(spec, results, started, rows=rows, columns=TOLERANCE_CSV_COLUMNS)
