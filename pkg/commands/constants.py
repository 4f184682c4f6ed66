import time

import click

from commands.common import build_spec, emit, reports_errors
from services.formulas import BoundInputs, breaking_bound, constants_table, tolerance_bound

CONSTANTS_CSV_COLUMNS = ["r", "d", "p_r", "q", "avoidance", "row_counts", "p_r_decimal", "q_decimal"]


@click.command('constants')
@click.option('--r-max', type=int, default=6, show_default=True)
@click.option('--d-max', type=int, default=3, show_default=True)
@click.option('-N', 'N', type=int, help='with -f: evaluate the tolerance bounds for N classes')
@click.option('-f', 'f', type=int, help='split capacity to plug into the bounds')
@click.option('-r', 'r', type=int, default=2, show_default=True)
@click.option('-d', 'd', type=int, default=2, show_default=True)
@click.option('--out', type=click.Path(file_okay=False))
@click.option('--format', 'format', type=click.Choice(['json', 'csv', 'both']))
@reports_errors
def constants_cmd(r_max, d_max, N, f, r, d, out, format):
    """Table of p_r and q(r, d); optionally the tolerance bounds for given N, r, d, f."""
    started = time.perf_counter()
    spec = build_spec('constants', r=r, d=d, N=N, out=out, format=format)
    rows = constants_table(r_max, d_max)
    results = {'table': rows}
    if N is not None and f is not None:
        inputs = BoundInputs(N, r, d, f)
        results['bounds'] = {
            'N': N, 'r': r, 'd': d, 'f': f,
            'constant': inputs.constant,
            'tolerance_bound': tolerance_bound(inputs),
            'breaking_bound': breaking_bound(N, r, f),
        }
    emit(spec, results, started, rows=rows, columns=CONSTANTS_CSV_COLUMNS)
