import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Dict, FrozenSet, Optional, Tuple

from config import Config
from extensions import Stream, progress, rng_stream
from services.configuration import ColorfulPartition, Configuration
from services.errors import BudgetExceededError, GeometryError, InternalInconsistencyError
from services.exact_geometry import HalfSpace, convex_hulls_intersect
from services.formulas import q
from services.split_service import generate_clustered_config, generate_random_config, max_pairs_split_by_hyperplane

logger = logging.getLogger(__name__)

TOLERANCE_CSV_COLUMNS = ["N", "r", "d", "tolerance", "break_size", "break_set", "evaluations", "partition"]


def is_tverberg(config: Configuration, partition: ColorfulPartition, removed=frozenset()) -> bool:
    """Do the hulls of the parts still meet once the ``removed`` classes are gone?

    A part left empty counts as broken.
    """
    partition.check_against(config)
    return bool(convex_hulls_intersect(partition.parts(config, frozenset(removed))))


@dataclass(frozen=True)
class ToleranceReport:
    tolerance: int
    break_set: Tuple[int, ...]
    evaluations: int
    reason: str = ""

    def as_row(self, config: Configuration, partition: ColorfulPartition) -> Dict:
        return {
            "N": config.N,
            "r": config.r,
            "d": config.d,
            "tolerance": self.tolerance,
            "break_size": len(self.break_set),
            "break_set": " ".join(map(str, self.break_set)),
            "evaluations": self.evaluations,
            "partition": ";".join("".join(map(str, perm)) for perm in partition.assignment),
        }


class _BreakSearch:
    """Ascending-cardinality search for the smallest removal set that breaks a partition.

    Results are memoised by the surviving class set, so repeated calls over
    growing caps never redo an LP.
    """

    def __init__(self, config, partition, budget=None):
        partition.check_against(config)
        self.config = config
        self.partition = partition
        self.budget = budget or Config.SUBSET_BUDGET
        self.evaluations = 0
        self._memo: Dict[FrozenSet[int], bool] = {}

    def holds(self, removed) -> bool:
        surviving = frozenset(range(self.config.N)) - frozenset(removed)
        if surviving not in self._memo:
            self.evaluations += 1
            if self.evaluations > self.budget:
                raise BudgetExceededError(
                    f"break search exceeded {self.budget} evaluations",
                    estimate=2 ** self.config.N)
            self._memo[surviving] = is_tverberg(self.config, self.partition, frozenset(removed))
        return self._memo[surviving]

    def run(self, start=0, cap=None) -> Optional[Tuple[int, ...]]:
        N = self.config.N
        cap = N if cap is None else min(cap, N)
        for size in range(start, cap + 1):
            try:
                for removed in combinations(range(N), size):
                    if not self.holds(removed):
                        return removed
            except BudgetExceededError as e:
                # every set smaller than ``size`` was cleared
                e.partial = size - 1
                raise
        return None


def minimum_break(config: Configuration, partition: ColorfulPartition, cap: int = None,
                  budget: int = None) -> Optional[Tuple[int, ...]]:
    """Lexicographically first smallest breaking set of size <= cap, or None."""
    return _BreakSearch(config, partition, budget).run(cap=cap)


def partition_tolerance(config: Configuration, partition: ColorfulPartition, budget: int = None) -> ToleranceReport:
    search = _BreakSearch(config, partition, budget)
    break_set = search.run()
    if break_set is None:
        raise InternalInconsistencyError("removing every class must break any partition")
    reason = "not tverberg" if not break_set else f"removing {len(break_set)} classes breaks it"
    return ToleranceReport(len(break_set) - 1, break_set, search.evaluations, reason)


def _partitions(N, r):
    perms = list(permutations(range(r)))
    identity = tuple(range(r))
    for rest in product(perms, repeat=N - 1):
        yield ColorfulPartition((identity,) + rest)


def best_partition_tolerance(config: Configuration, budget_partitions: int = None,
                             budget_subsets: int = None) -> Tuple[ColorfulPartition, ToleranceReport]:
    """Most tolerant colourful partition, exhaustively.

    Relabelling parts preserves tolerance, so class 0 keeps the identity
    assignment. A partition is only searched past the current best tolerance,
    and ties keep the lexicographically first partition.
    """
    N, r = config.N, config.r
    budget_partitions = budget_partitions or Config.PARTITION_BUDGET
    space = math.factorial(r) ** (N - 1)
    if space > budget_partitions:
        raise BudgetExceededError(
            f"{space} colourful partitions exceed the budget of {budget_partitions}", estimate=space)

    logger.info(f"Exhaustive tolerance search over {space} partitions, N={N}, r={r}, d={config.d}")
    best: Optional[Tuple[ColorfulPartition, ToleranceReport]] = None
    for partition in progress(_partitions(N, r), total=space, desc="partitions"):
        search = _BreakSearch(config, partition, budget_subsets)
        floor = -1 if best is None else best[1].tolerance
        if search.run(cap=floor + 1) is not None:
            continue
        break_set = search.run(start=floor + 2)
        report = ToleranceReport(len(break_set) - 1, break_set, search.evaluations,
                                 f"removing {len(break_set)} classes breaks it")
        best = (partition, report)
        logger.debug(f"best tolerance now {report.tolerance} at {partition.assignment}")
        if report.tolerance == N - 1:
            break

    if best is None:
        partition = ColorfulPartition.identity(N, r)
        best = (partition, partition_tolerance(config, partition, budget_subsets))
    logger.info(f"Best tolerance {best[1].tolerance} with partition {best[0].assignment}")
    return best


@dataclass(frozen=True)
class BreakReport:
    removed: Tuple[int, ...]
    bound: int
    n_prime: int
    halfspace: HalfSpace
    orientation: int  # the part that is kept inside the open side

    @property
    def size(self) -> int:
        return len(self.removed)


def hyperplane_break_bound(config: Configuration, partition: ColorfulPartition) -> BreakReport:
    """Break a pair partition with at most N - ceil(N'/2) removals.

    Take a hyperplane splitting N' pairs, drop every unsplit pair, then keep only
    the split pairs whose inside point went to the majority part.
    """
    if config.r != 2:
        raise GeometryError(f"hyperplane breaking applies to pairs only, got r={config.r}")
    partition.check_against(config)
    best = max_pairs_split_by_hyperplane(config)
    H = best.halfspace
    split = set(best.split_classes)

    inside_part = {}
    for c in split:
        i = 0 if H.contains(config.classes[c][0]) else 1
        inside_part[c] = partition.assignment[c][i]
    disagree = [sorted(c for c in split if inside_part[c] != side) for side in (0, 1)]
    orientation = 0 if len(disagree[0]) <= len(disagree[1]) else 1
    removed = tuple(sorted(set(range(config.N)) - split | set(disagree[orientation])))

    if is_tverberg(config, partition, frozenset(removed)):
        raise InternalInconsistencyError(f"hyperplane removal {removed} left a Tverberg partition")
    bound = config.N - math.ceil(best.count / 2)
    if len(removed) > bound:
        raise InternalInconsistencyError(f"removed {len(removed)} classes, bound is {bound}")
    return BreakReport(removed, bound, best.count, H, orientation)


def q_bound(config: Configuration, tolerance: int) -> Dict:
    """Compare a best tolerance with q(r, d)·N; only defined when r > d + 1."""
    if config.r <= config.d + 1:
        raise GeometryError(f"q(r, d) needs r > d + 1, got r={config.r}, d={config.d}")
    value = q(config.r, config.d)
    bound = value * config.N
    return {
        "q": value,
        "q_N": bound,
        "ceil_minus_one": math.ceil(bound) - 1,
        "within_ceil_minus_one": tolerance <= math.ceil(bound) - 1,
    }


@dataclass(frozen=True)
class SurveyEntry:
    kind: str
    seed: int
    tolerance: int
    ratio: Fraction
    breaks_within_q: bool


@dataclass(frozen=True)
class QSurveyReport:
    N: int
    r: int
    d: int
    q: Fraction
    q_N: Fraction
    entries: Tuple[SurveyEntry, ...]

    @property
    def smallest(self) -> Optional[SurveyEntry]:
        """First entry with the smallest tolerance / N."""
        return min(self.entries, key=lambda e: e.ratio, default=None)

    @property
    def witnesses(self) -> Tuple[SurveyEntry, ...]:
        return tuple(e for e in self.entries if e.breaks_within_q)


SURVEY_KINDS = ("random", "clustered")


def survey_q_breaking(N: int, r: int, d: int, samples: int, seed: int = 0, kinds=SURVEY_KINDS,
                      budget_partitions: int = None, budget_subsets: int = None) -> QSurveyReport:
    """Look for configurations where removing q(r, d)·N classes breaks every colourful partition.

    Sample i is generated with kind ``kinds[i % len(kinds)]`` and a seed drawn
    from the survey stream; its exact best tolerance is compared with q·N.
    A witness is a configuration whose best tolerance is below q·N.
    """
    if r <= d + 1:
        raise GeometryError(f"the q(r, d) survey needs r > d + 1, got r={r}, d={d}")
    unknown = set(kinds) - set(SURVEY_KINDS)
    if not kinds or unknown:
        raise GeometryError(f"survey kinds must come from {SURVEY_KINDS}, got {kinds}")
    value = q(r, d)
    bound = value * N
    rng = rng_stream(seed, Stream.SURVEY, N, r, d)
    logger.info(f"q survey N={N}, r={r}, d={d}, q={value}, {samples} samples")

    entries = []
    for i in progress(range(samples), desc="survey"):
        kind = kinds[i % len(kinds)]
        config_seed = int(rng.integers(0, 2 ** 63))
        if kind == "random":
            config = generate_random_config(N, r, d, seed=config_seed)
        else:
            config = generate_clustered_config(N, r, d, seed=config_seed)
        _, report = best_partition_tolerance(config, budget_partitions, budget_subsets)
        within = report.tolerance <= math.ceil(bound) - 1
        entries.append(SurveyEntry(kind, config_seed, report.tolerance, Fraction(report.tolerance, N), within))
        logger.debug(f"survey sample {i} ({kind}, seed {config_seed}): tolerance {report.tolerance}")

    result = QSurveyReport(N, r, d, value, bound, tuple(entries))
    if result.smallest is not None:
        logger.info(f"Smallest tolerance/N {result.smallest.ratio}; {len(result.witnesses)} below q·N")
    return result
