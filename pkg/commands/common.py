import logging
import sys
import time
from functools import wraps

import click
import orjson
from pydantic import ValidationError

from config import Config
from models import ExperimentSpec, GeneratorKind, RunReport
from services.configuration import Configuration
from services.errors import (
    BudgetExceededError,
    CertificateError,
    GeometryError,
    InternalInconsistencyError,
)
from services.report_service import dumps, load_configuration, write_report
from services.split_service import (
    generate_clustered_config,
    generate_nested_pairs,
    generate_perfect_split,
    generate_random_config,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PROPERTY_VIOLATION = 2
EXIT_BUDGET = 3
EXIT_INPUT_ERROR = 4


def experiment_options(f):
    """Flags shared by every command; ``--spec`` supplies defaults the flags override."""
    options = [
        click.option('--spec', 'spec_path', type=click.Path(dir_okay=False), help='JSON experiment spec'),
        click.option('--kind', type=click.Choice([k.value for k in GeneratorKind]), help='configuration generator'),
        click.option('-N', 'N', type=int, help='number of colour classes'),
        click.option('-r', 'r', type=int, help='points per class (parts)'),
        click.option('-d', 'd', type=int, help='dimension'),
        click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='configuration JSON file'),
        click.option('--seed', type=int, help='master seed'),
        click.option('--trials', type=int, help='random trials'),
        click.option('--mode', type=click.Choice(['exact', 'monte_carlo'])),
        click.option('--budget-subsets', type=int, help='removal-set evaluations per tolerance call'),
        click.option('--budget-families', type=int, help='candidate families in exact capacity search'),
        click.option('--out', type=click.Path(file_okay=False), help='report directory'),
        click.option('--format', 'format', type=click.Choice(['json', 'csv', 'both'])),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def build_spec(command, spec_path=None, **flags) -> ExperimentSpec:
    data = {}
    if spec_path:
        try:
            with open(spec_path, 'rb') as fh:
                data = orjson.loads(fh.read())
        except (OSError, orjson.JSONDecodeError) as e:
            raise GeometryError(f"cannot read spec {spec_path}: {e}") from None
    data.update({k: v for k, v in flags.items() if v is not None})
    data['command'] = command
    if data.get('config_path') and 'kind' not in data:
        data['kind'] = GeneratorKind.FROM_FILE.value
    return ExperimentSpec.model_validate(data)


def resolve_configuration(spec: ExperimentSpec):
    """(configuration, family or None); the family is only known for perfect splits."""
    if spec.kind is GeneratorKind.FROM_FILE:
        return load_configuration(spec.config_path), None
    if spec.kind is GeneratorKind.PERFECT_SPLIT:
        return generate_perfect_split(spec.N, spec.r, spec.d, spec.seed)
    if spec.kind is GeneratorKind.CLUSTERED:
        return generate_clustered_config(spec.N, spec.r, spec.d, seed=spec.seed), None
    if spec.kind is GeneratorKind.NESTED_PAIRS:
        return generate_nested_pairs(spec.N, spec.d), None
    return generate_random_config(spec.N, spec.r, spec.d, spec.seed), None


def describe(config: Configuration):
    return {'N': config.N, 'r': config.r, 'd': config.d}


def emit(spec: ExperimentSpec, results, started, success=True, rows=None, columns=None):
    report = RunReport(
        command=spec.command,
        success=success,
        spec=spec.model_dump(mode='json'),
        seed=spec.seed,
        version=Config.VERSION,
        results=results,
        wall_time=time.perf_counter() - started,
    )
    fmt = spec.format.value
    write_report(report, spec.out or Config.OUTPUT_DIR, fmt, rows, columns)
    click.echo(dumps(results).decode())
    return report


def _fail(command, error, details, code):
    click.echo(orjson.dumps({'success': False, 'command': command, 'error': error, 'details': details}).decode())
    sys.exit(code)


def reports_errors(f):
    """Map library errors onto the exit status contract."""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        command = click.get_current_context().info_name
        try:
            return f(*args, **kwargs)
        except BudgetExceededError as e:
            logger.warning(f"{command}: budget exhausted: {e}")
            _fail(command, 'Budget exhausted', f"{e} (estimate={e.estimate}, partial={e.partial})", EXIT_BUDGET)
        except (ValidationError, GeometryError, CertificateError) as e:
            logger.error(f"{command}: invalid input: {e}")
            _fail(command, 'Invalid input', str(e), EXIT_INPUT_ERROR)
        except InternalInconsistencyError as e:
            logger.error(f"{command}: verification failed: {e}")
            _fail(command, 'Property violation', str(e), EXIT_PROPERTY_VIOLATION)
    return decorated_function
