import time

import click

from commands.common import build_spec, emit, experiment_options, reports_errors
from services.tolerance_service import SURVEY_KINDS, survey_q_breaking

SURVEY_CSV_COLUMNS = ["N", "r", "d", "kind", "seed", "tolerance", "ratio", "breaks_within_q"]


@click.command('survey')
@experiment_options
@click.option('--kinds', type=click.Choice(SURVEY_KINDS), multiple=True,
              help='generators to alternate between (default: random and clustered)')
@reports_errors
def survey_cmd(kinds=(), **flags):
    """Search generated configurations (r > d+1) for one that q(r, d)·N removals always break."""
    started = time.perf_counter()
    spec = build_spec('survey', **flags)
    report = survey_q_breaking(spec.N, spec.r, spec.d, spec.trials, spec.seed, tuple(kinds) or SURVEY_KINDS,
                               budget_subsets=spec.budget_subsets)
    results = {
        'configuration': {'N': spec.N, 'r': spec.r, 'd': spec.d},
        'q': report.q,
        'q_N': report.q_N,
        'samples': len(report.entries),
        'smallest': report.smallest,
        'witnesses': report.witnesses,
        'entries': report.entries,
    }
    rows = [{'N': spec.N, 'r': spec.r, 'd': spec.d, **{k: getattr(e, k) for k in SURVEY_CSV_COLUMNS[3:]}}
            for e in report.entries]
    emit(spec, results, started, rows=rows, columns=SURVEY_CSV_COLUMNS)
