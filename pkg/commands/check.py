import logging
import math
import time
from itertools import permutations, product

import click

from commands.common import (
    EXIT_PROPERTY_VIOLATION,
    build_spec,
    describe,
    emit,
    experiment_options,
    reports_errors,
    resolve_configuration,
)
from config import Config
from extensions import Stream, rng_stream
from services.configuration import ColorfulPartition, Configuration
from services.errors import BudgetExceededError, GeometryError, InternalInconsistencyError
from services.exact_geometry import HalfSpace, closed_union_covers_space, open_intersection_empty
from services.sarkaria_lift import (
    capture_equivalence_check,
    hit_matrix,
    lift,
    project,
    pushdown_halfspace,
)
from services.split_service import helly_subfamily, max_pairs_split_by_hyperplane, split_capacity

logger = logging.getLogger(__name__)


def _suite(checked, failures):
    return {'passed': not failures, 'checked': checked, 'failures': failures[:20]}


def capture_equivalence_suite(config: Configuration, budget=None):
    """Hulls meet iff the lifted choice captures the origin, for every colourful partition."""
    r = config.r
    perms = list(permutations(range(r)))
    space = math.factorial(r) ** max(config.N - 1, 0)
    budget = budget or Config.PARTITION_BUDGET
    if space > budget:
        raise BudgetExceededError(f"{space} partitions exceed the budget of {budget}", estimate=space)
    checked, failures = 0, []
    for rest in product(perms, repeat=config.N - 1):
        partition = ColorfulPartition((tuple(range(r)),) + rest)
        try:
            capture_equivalence_check(config, partition)
        except InternalInconsistencyError as e:
            failures.append(str(e))
        checked += 1
    return _suite(checked, failures)


def random_origin_halfspaces(n, count, seed, spread=5):
    if n < 1:
        raise GeometryError(f"origin half-spaces need a positive dimension, got {n}")
    rng = rng_stream(seed, Stream.CHECK, n)
    out = []
    while len(out) < count:
        normal = [int(v) for v in rng.integers(-spread, spread + 1, size=n)]
        if any(normal):
            out.append(HalfSpace.make(normal, 0))
    return out


def pushdown_suite(config: Configuration, halfspaces):
    """Pushdowns of open origin half-spaces never share a point; their closures cover Q^d."""
    failures = []
    for H in halfspaces:
        family = pushdown_halfspace(H, config.r, config.d)
        if not open_intersection_empty(family):
            failures.append(f"pushdown of {H.normal} has a common point")
        if not closed_union_covers_space(pushdown_halfspace(H.closure(), config.r, config.d)):
            failures.append(f"closed pushdown of {H.normal} misses a point")
        if config.r > config.d + 1 and helly_subfamily(family, config.d) is None:
            failures.append(f"pushdown of {H.normal} has no empty subfamily of size d+1")
    return _suite(len(halfspaces), failures)


def hit_matrix_suite(config: Configuration, halfspaces):
    """Every closed origin half-space induces a hit matrix meeting both covering conditions."""
    failures = []
    checked = 0
    for H in halfspaces:
        for c, points in enumerate(config.classes):
            T = hit_matrix(points, H.closure())
            checked += 1
            if not T.satisfies_conditions(config.d):
                failures.append(f"class {c}, normal {H.normal}: {T.entries}")
    return _suite(checked, failures)


def left_inverse_suite(config: Configuration):
    failures = []
    for c, points in enumerate(config.classes):
        for x in points:
            for i in range(config.r):
                if project(lift(x, i, config.r), i, config.r) != x:
                    failures.append(f"class {c}, index {i}")
    return _suite(config.N * config.r * config.r, failures)


def pair_capacity_suite(config: Configuration, budget=None):
    """For pairs the split capacity equals the best single-hyperplane count."""
    f = split_capacity(config, budget=budget).f
    n_prime = max_pairs_split_by_hyperplane(config).count
    failures = [] if f == n_prime else [f"f={f} but N'={n_prime}"]
    return {**_suite(1, failures), 'f': f, 'n_prime': n_prime}


@click.command('check')
@experiment_options
@reports_errors
def check_cmd(**flags):
    """Run the property suites on a configuration; exit 2 if any fails."""
    started = time.perf_counter()
    spec = build_spec('check', **flags)
    config, _ = resolve_configuration(spec)
    n = (config.r - 1) * (config.d + 1)
    halfspaces = random_origin_halfspaces(n, min(spec.trials, 200), spec.seed)

    suites = {
        'left_inverse': left_inverse_suite(config),
        'pushdown': pushdown_suite(config, halfspaces),
        'hit_matrix': hit_matrix_suite(config, halfspaces),
    }
    try:
        suites['capture_equivalence'] = capture_equivalence_suite(config)
    except BudgetExceededError as e:
        suites['capture_equivalence'] = {'passed': True, 'skipped': str(e)}
    if config.r == 2:
        try:
            suites['pair_capacity'] = pair_capacity_suite(config, spec.budget_families)
        except BudgetExceededError as e:
            suites['pair_capacity'] = {'passed': True, 'skipped': str(e)}

    passed = all(s['passed'] for s in suites.values())
    for name, s in suites.items():
        if not s['passed']:
            logger.error(f"check suite {name} failed: {s['failures']}")
    emit(spec, {'configuration': describe(config), 'suites': suites, 'passed': passed}, started, success=passed)
    if not passed:
        raise SystemExit(EXIT_PROPERTY_VIOLATION)
