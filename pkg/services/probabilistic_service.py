"""Derandomised versions of the two random procedures: the random colourful
choice behind tolerant partitions and the random labelling behind the attack.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import List, Optional, Sequence, Tuple

import numpy as np

from extensions import Stream, progress, rng_stream
from services.configuration import ColorfulChoice, ColorfulPartition, Configuration
from services.errors import GeometryError, InternalInconsistencyError
from services.exact_geometry import HalfSpace, to_point
from services.formulas import HitMatrix, hit_probability
from services.sarkaria_lift import choice_to_partition, hit_matrix, lift
from services.split_service import SplitCertificate, validate_certificate
from services.tolerance_service import ToleranceReport, is_tverberg, partition_tolerance

logger = logging.getLogger(__name__)


def class_stream(seed: int, trial: int, c: int) -> np.random.Generator:
    return rng_stream(seed, Stream.CHOICE, trial, c)


def random_colorful_choice(config: Configuration, seed: int, trial: int = 0) -> ColorfulChoice:
    """One uniform permutation per class; class c of trial t always draws from stream (t, c)."""
    return ColorfulChoice(tuple(
        tuple(int(j) for j in class_stream(seed, trial, c).permutation(config.r))
        for c in range(config.N)))


@dataclass
class SearchReport:
    seed: int
    target: int
    trials: int = 0
    tolerances: List[int] = field(default_factory=list)
    best_trial: Optional[int] = None
    best_partition: Optional[ColorfulPartition] = None
    best_report: Optional[ToleranceReport] = None

    @property
    def found(self) -> bool:
        return self.best_report is not None and self.best_report.tolerance >= self.target


def search_tolerant_partition(config: Configuration, target: int, trials: int, seed: int,
                              budget: int = None) -> SearchReport:
    """Sample colourful choices until one has tolerance >= target or trials run out.

    The best partition is the highest tolerance, then the lowest trial index.
    """
    report = SearchReport(seed=seed, target=target)
    seen = {}
    for trial in progress(range(trials), desc="trials"):
        partition = choice_to_partition(random_colorful_choice(config, seed, trial), config)
        if partition.assignment not in seen:
            seen[partition.assignment] = partition_tolerance(config, partition, budget)
        tolerance_report = seen[partition.assignment]
        report.trials += 1
        report.tolerances.append(tolerance_report.tolerance)
        if report.best_report is None or tolerance_report.tolerance > report.best_report.tolerance:
            report.best_trial = trial
            report.best_partition = partition
            report.best_report = tolerance_report
        if report.found:
            break
    logger.info(f"Search for tolerance {target}: best {report.best_report.tolerance if report.best_report else None} "
                f"after {report.trials} trials (seed={seed}, found={report.found})")
    return report


def _survives(config, partition, certificate, c, labeling, rule):
    r = config.r
    if rule == "matching":
        matching = certificate.matchings[c]
        return all(partition.assignment[c][matching[labeling[l]]] == l for l in range(r))
    if rule == "containment":
        family = certificate.family
        return all(family[labeling[l]].contains(config.classes[c][partition.point_in_part(c, l)])
                   for l in range(r))
    raise GeometryError(f"unknown removal rule {rule!r}")


def labeling_removals(config: Configuration, partition: ColorfulPartition, certificate: SplitCertificate,
                      rule: str = "matching") -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Classes removed under every labelling, in ``itertools.permutations`` order.

    ``labeling[l]`` is the family member that takes label l. Unsplit classes
    always go. Under ``matching`` a split class survives only when each matched
    point already sits in the part of its half-space's label; under
    ``containment`` it survives when every point of part l lies in the member
    labelled l.
    """
    split = set(certificate.split_class_indices)
    out = []
    for labeling in permutations(range(config.r)):
        removed = tuple(c for c in range(config.N)
                        if c not in split or not _survives(config, partition, certificate, c, labeling, rule))
        out.append((labeling, removed))
    return out


@dataclass(frozen=True)
class AttackReport:
    labeling: Tuple[int, ...]
    removed_classes: Tuple[int, ...]
    removed_unsplittable: Tuple[int, ...]
    broken_verified: bool
    f: int
    rule: str
    mean_removals: Fraction
    expected_removals: Optional[Fraction]


def adversary_attack(config: Configuration, partition: ColorfulPartition,
                     certificate: SplitCertificate, rule: str = "matching") -> AttackReport:
    """Best labelling of a splitting family against a fixed partition.

    The first labelling with the fewest removals wins. Survivors are checked to
    sit inside their labelled half-spaces and the partition to be broken.
    Under ``matching`` the mean over labellings must equal (N - f) + f(1 - 1/r!).

    Raises:
        CertificateError: if the family intersects or a matching is broken
    """
    partition.check_against(config)
    validate_certificate(certificate, config)
    r, N = config.r, config.N
    f = len(certificate.split_class_indices)

    outcomes = labeling_removals(config, partition, certificate, rule)
    labeling, removed = min(outcomes, key=lambda item: len(item[1]))

    family = certificate.family
    for c in range(N):
        if c in removed:
            continue
        for l in range(r):
            point = config.classes[c][partition.point_in_part(c, l)]
            if not family[labeling[l]].contains(point):
                raise InternalInconsistencyError(f"survivor of part {l} in class {c} escaped its half-space")
    if is_tverberg(config, partition, frozenset(removed)):
        raise InternalInconsistencyError(f"attack with labelling {labeling} left a Tverberg partition")

    mean = Fraction(sum(len(rem) for _, rem in outcomes), math.factorial(r))
    expected = None
    if rule == "matching":
        expected = (N - f) + f * (1 - Fraction(1, math.factorial(r)))
        if mean != expected:
            raise InternalInconsistencyError(f"mean removals {mean} differ from {expected}")
    split = set(certificate.split_class_indices)
    report = AttackReport(labeling, removed, tuple(c for c in removed if c not in split), True, f, rule,
                          mean, expected)
    logger.info(f"Attack ({rule}) removed {len(removed)} of {N} classes (f={f}, mean over labellings {mean})")
    return report


@dataclass(frozen=True)
class HitEstimate:
    value: Fraction
    matrix: HitMatrix
    exact: bool
    trials: int = 0


def estimate_hit_expectation(points: Sequence, H: HalfSpace, mode: str = "exact", trials: int = 2000,
                             seed: int = 0) -> HitEstimate:
    """Chance that a uniform colourful choice of the class's r-block meets the closure of H."""
    points = [to_point(p) for p in points]
    r = len(points)
    if H.offset != 0:
        raise GeometryError("hit expectation needs a half-space through the origin")
    closed = H.closure()
    T = hit_matrix(points, closed)
    if mode == "exact":
        # a colourful choice hits iff its permutation meets a 1 of T
        return HitEstimate(hit_probability(T), T, True)
    if mode == "monte_carlo":
        rng = rng_stream(seed, Stream.HIT)
        hits = 0
        for _ in range(trials):
            sigma = rng.permutation(r)
            if any(closed.contains(lift(points[i], int(sigma[i]), r)) for i in range(r)):
                hits += 1
        return HitEstimate(Fraction(hits, trials), T, False, trials)
    raise GeometryError(f"unknown hit-expectation mode {mode!r}")
