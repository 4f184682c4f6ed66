import logging
import math
import time

import click

from commands.common import build_spec, describe, emit, experiment_options, reports_errors, resolve_configuration
from services.formulas import breaking_bound, p_r
from services.probabilistic_service import adversary_attack, random_colorful_choice
from services.report_service import load_certificate
from services.sarkaria_lift import choice_to_partition
from services.split_service import SplitCertificate, can_split, split_capacity

logger = logging.getLogger(__name__)

ATTACK_CSV_COLUMNS = ["N", "r", "d", "f", "removed", "bound", "mean_removals", "labeling"]


def certificate_for_family(config, family) -> SplitCertificate:
    matchings = {}
    for c, points in enumerate(config.classes):
        verdict = can_split(family, points)
        if verdict:
            matchings[c] = verdict.matching
    return SplitCertificate(tuple(family), matchings, tuple(sorted(matchings)))


@click.command('attack')
@experiment_options
@click.option('--certificate', 'certificate_path', type=click.Path(exists=True, dir_okay=False),
              help='split certificate JSON; computed from the configuration when omitted')
@click.option('--rule', type=click.Choice(['matching', 'containment']),
              help='removal rule; containment by default for perfect splits')
@reports_errors
def attack_cmd(certificate_path=None, rule=None, **flags):
    """Break a random colourful partition with the best labelling of a splitting family."""
    started = time.perf_counter()
    spec = build_spec('attack', **flags)
    config, family = resolve_configuration(spec)
    if certificate_path:
        certificate = load_certificate(certificate_path)
    elif family is not None:
        certificate = certificate_for_family(config, family)
    else:
        certificate = split_capacity(config, spec.mode, spec.trials, spec.seed, spec.budget_families).certificate

    partition = choice_to_partition(random_colorful_choice(config, spec.seed), config)
    rule = rule or ('containment' if family is not None else 'matching')
    report = adversary_attack(config, partition, certificate, rule)
    bound = breaking_bound(config.N, config.r, report.f)
    results = {
        'configuration': describe(config),
        'partition': partition,
        'certificate': certificate,
        'attack': report,
        'breaking_bound': bound,
        'within_bound': len(report.removed_classes) <= bound,
    }
    if family is not None:
        results['within_p_r_N'] = len(report.removed_classes) <= math.ceil(p_r(config.r) * config.N)
    row = {
        **describe(config),
        'f': report.f,
        'removed': len(report.removed_classes),
        'bound': bound,
        'mean_removals': report.mean_removals,
        'labeling': " ".join(map(str, report.labeling)),
    }
    emit(spec, results, started, rows=[row], columns=ATTACK_CSV_COLUMNS)
