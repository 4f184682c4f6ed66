import logging
import math
import time

import click

from commands.common import build_spec, describe, emit, experiment_options, reports_errors, resolve_configuration
from services.configuration import ColorfulPartition
from services.formulas import p_r
from services.tolerance_service import (
    TOLERANCE_CSV_COLUMNS,
    best_partition_tolerance,
    hyperplane_break_bound,
    partition_tolerance,
    q_bound,
)

logger = logging.getLogger(__name__)


@click.command('tolerance')
@experiment_options
@reports_errors
def tolerance_cmd(**flags):
    """Exact tolerance of the identity partition and of the best colourful partition."""
    started = time.perf_counter()
    spec = build_spec('tolerance', **flags)
    config, family = resolve_configuration(spec)

    identity = ColorfulPartition.identity(config.N, config.r)
    identity_report = partition_tolerance(config, identity, spec.budget_subsets)
    best, best_report = best_partition_tolerance(config, budget_subsets=spec.budget_subsets)

    results = {
        'configuration': describe(config),
        'identity': {'partition': identity, 'report': identity_report},
        'best': {'partition': best, 'report': best_report},
    }
    if family is not None:
        # perfect splits cap every partition's tolerance near p_r N; record both roundings
        bound = p_r(config.r) * config.N
        results['perfect_split_bound'] = {
            'p_r_N': bound,
            'ceil_minus_one': math.ceil(bound) - 1,
            'floor': math.floor(bound),
            'within_ceil_minus_one': best_report.tolerance <= math.ceil(bound) - 1,
        }
    if config.r > config.d + 1:
        results['q_bound'] = q_bound(config, best_report.tolerance)
    if config.r == 2:
        breaking = hyperplane_break_bound(config, best)
        results['hyperplane_break'] = {
            'removed': list(breaking.removed),
            'bound': breaking.bound,
            'n_prime': breaking.n_prime,
            'consistent': breaking.size >= best_report.tolerance + 1,
        }

    rows = [identity_report.as_row(config, identity), best_report.as_row(config, best)]
    emit(spec, results, started, rows=rows, columns=TOLERANCE_CSV_COLUMNS)
