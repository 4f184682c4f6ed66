"""Permutation constants and closed-form tolerance bounds.

p_r is the chance that a uniform permutation of [r] has a fixed point. q(r, d)
is the smallest chance that a uniform permutation hits a 1 of an r x r 0/1
matrix in which every column has a 1 and some d+1 rows already cover every
column; it is attained by the balanced single-1-per-column matrix.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Optional, Tuple

import mpmath
import numpy as np

from config import Config
from extensions import Stream, interval_context, progress, rng_stream
from services.errors import BudgetExceededError, GeometryError, InternalInconsistencyError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def derangements(r: int) -> int:
    if r < 0:
        raise GeometryError(f"derangements of a negative count ({r})")
    if r == 0:
        return 1
    if r == 1:
        return 0
    return (r - 1) * (derangements(r - 1) + derangements(r - 2))


def rencontres(r: int, k: int) -> int:
    """Permutations of [r] with exactly k fixed points."""
    if not 0 <= k <= r:
        return 0
    return math.comb(r, k) * derangements(r - k)


def p_r_inclusion_exclusion(r: int) -> Fraction:
    return 1 - sum((Fraction((-1) ** k, math.factorial(k)) for k in range(r + 1)), Fraction(0))


def p_r(r: int) -> Fraction:
    if r < 1:
        raise GeometryError(f"p_r needs r >= 1, got {r}")
    value = 1 - Fraction(derangements(r), math.factorial(r))
    if value != p_r_inclusion_exclusion(r):
        raise InternalInconsistencyError(f"derangement recurrence and inclusion-exclusion disagree at r={r}")
    return value


@dataclass(frozen=True)
class HitMatrix:
    entries: Tuple[Tuple[int, ...], ...]

    @property
    def r(self) -> int:
        return len(self.entries)

    @property
    def row_counts(self) -> Tuple[int, ...]:
        return tuple(sum(row) for row in self.entries)

    def row_masks(self):
        return [sum(1 << j for j, v in enumerate(row) if v) for row in self.entries]

    def column_has_one(self) -> bool:
        return all(any(row[j] for row in self.entries) for j in range(self.r))

    def single_one_per_column(self) -> bool:
        return all(sum(row[j] for row in self.entries) <= 1 for j in range(self.r))

    def covering_rows(self, d: int) -> Optional[Tuple[int, ...]]:
        """Lexicographically first set of at most d+1 rows covering every column."""
        full = (1 << self.r) - 1
        masks = self.row_masks()
        for rows in combinations(range(self.r), min(d + 1, self.r)):
            acc = 0
            for i in rows:
                acc |= masks[i]
            if acc == full:
                return rows
        return None

    def satisfies_conditions(self, d: int) -> bool:
        return self.column_has_one() and self.covering_rows(d) is not None

    def with_entry(self, i, j, value=1) -> "HitMatrix":
        rows = [list(row) for row in self.entries]
        rows[i][j] = value
        return HitMatrix(tuple(tuple(row) for row in rows))


def extremal_matrix(r: int, d: int) -> HitMatrix:
    """One 1 per column, all inside rows 0..d, row counts floor/ceil of r/(d+1),
    heavier rows first."""
    if r <= d + 1:
        raise GeometryError(f"extremal matrix needs r > d + 1, got r={r}, d={d}")
    base, extra = divmod(r, d + 1)
    rows = [[0] * r for _ in range(r)]
    column = 0
    for i in range(d + 1):
        for _ in range(base + (1 if i < extra else 0)):
            rows[i][column] = 1
            column += 1
    return HitMatrix(tuple(tuple(row) for row in rows))


def _elementary_symmetric(values):
    e = [1] + [0] * len(values)
    for v in values:
        for k in range(len(values), 0, -1):
            e[k] += e[k - 1] * v
    return e


def _hits_by_enumeration(masks, r, perms=None) -> int:
    perms = perms if perms is not None else permutations(range(r))
    hits = 0
    for sigma in perms:
        for i in range(r):
            if masks[i] >> sigma[i] & 1:
                hits += 1
                break
    return hits


def hit_probability(T: HitMatrix, mode: str = "enumerate") -> Fraction:
    """Probability that a uniform sigma meets a 1 at some (i, sigma(i))."""
    r = T.r
    if mode == "enumerate":
        if r > 10:
            raise GeometryError(f"enumeration is limited to r <= 10, got {r}")
        return Fraction(_hits_by_enumeration(T.row_masks(), r), math.factorial(r))
    if mode == "rook":
        if not T.single_one_per_column():
            raise GeometryError("rook mode needs at most one 1 per column")
        # ones sit in distinct columns, so k non-attacking rooks = k distinct rows
        e = _elementary_symmetric([c for c in T.row_counts if c])
        avoid = sum((-1) ** k * e[k] * math.factorial(r - k) for k in range(len(e)))
        return 1 - Fraction(avoid, math.factorial(r))
    raise GeometryError(f"unknown hit-probability mode {mode!r}")


def q(r: int, d: int) -> Fraction:
    return hit_probability(extremal_matrix(r, d), "rook")


def q_avoidance(r: int, d: int) -> Fraction:
    """Chance of missing every 1 of the extremal matrix (the inclusion-exclusion sum)."""
    return 1 - q(r, d)


def q_displayed_sum(r: int, d: int) -> Fraction:
    """sum_k (-1)^k C(d+1,k) (r/(d+1))^k (r-k)!/r!, defined when (d+1) | r."""
    if r <= d + 1 or r % (d + 1):
        raise GeometryError(f"the closed sum needs r > d + 1 and (d+1) | r, got r={r}, d={d}")
    m = r // (d + 1)
    return sum((Fraction((-1) ** k * math.comb(d + 1, k) * m ** k * math.factorial(r - k), math.factorial(r))
                for k in range(d + 2)), Fraction(0))


@dataclass(frozen=True)
class MatrixSearchResult:
    value: Fraction
    matrix: HitMatrix
    exhaustive: bool
    examined: int


def _matrix_from_code(code, r):
    total = r * r
    return HitMatrix(tuple(tuple((code >> (total - 1 - (i * r + j))) & 1 for j in range(r)) for i in range(r)))


def _random_valid_matrix(rng, r, d):
    rows = rng.choice(r, size=d + 1, replace=False)
    entries = np.zeros((r, r), dtype=np.int8)
    for j in range(r):
        entries[rows[rng.integers(d + 1)], j] = 1
    extra = rng.random((r, r)) < rng.random() * 0.5
    entries |= extra.astype(np.int8)
    return HitMatrix(tuple(tuple(int(v) for v in row) for row in entries))


def min_hit_over_valid_matrices(r: int, d: int, budget: int = None, seed: int = 0,
                                trials: int = 20000) -> MatrixSearchResult:
    """Minimise hit probability over matrices meeting both covering conditions.

    Exhaustive (lexicographically least minimiser) when 2^(r^2) fits the budget,
    otherwise a seeded random search flagged non-exhaustive.
    """
    if r <= d + 1:
        raise GeometryError(f"the matrix class is only interesting for r > d + 1, got r={r}, d={d}")
    budget = budget or Config.MATRIX_BUDGET
    space = 1 << (r * r)
    perms = list(permutations(range(r)))
    denominator = math.factorial(r)
    best = None

    if space <= budget:
        logger.info(f"Exhaustive matrix search over {space} matrices for r={r}, d={d}")
        full = (1 << r) - 1
        size = min(d + 1, r)
        for code in progress(range(space), desc="matrices"):
            masks = [0] * r
            for i in range(r):
                row_bits = (code >> ((r - 1 - i) * r)) & full
                # row-major code puts column 0 in the high bit; mirror into column masks
                masks[i] = int(format(row_bits, f"0{r}b")[::-1], 2)
            union = 0
            for m in masks:
                union |= m
            if union != full:
                continue
            if not any(_union(masks, rows) == full for rows in combinations(range(r), size)):
                continue
            value = Fraction(_hits_by_enumeration(masks, r, perms), denominator)
            if best is None or value < best[0]:
                best = (value, code)
        result = MatrixSearchResult(best[0], _matrix_from_code(best[1], r), True, space)
    else:
        if r > 10:
            raise BudgetExceededError(f"r={r} is beyond permutation enumeration", estimate=space)
        logger.warning(f"2^{r * r} matrices exceed budget {budget}; running {trials} random trials")
        rng = rng_stream(seed, Stream.MATRIX, r, d)
        for _ in progress(range(trials), desc="matrices"):
            T = _random_valid_matrix(rng, r, d)
            value = hit_probability(T)
            key = (value, T.entries)
            if best is None or key < best:
                best = key
        result = MatrixSearchResult(best[0], HitMatrix(best[1]), False, trials)

    logger.info(f"min hit for r={r}, d={d}: {result.value} (exhaustive={result.exhaustive})")
    return result


def _union(masks, rows):
    acc = 0
    for i in rows:
        acc |= masks[i]
    return acc


@dataclass(frozen=True)
class BoundInputs:
    N: int
    r: int
    d: int
    f: int

    def __post_init__(self):
        if self.N < 1 or not 0 <= self.f <= self.N:
            raise GeometryError(f"need N >= 1 and 0 <= f <= N, got N={self.N}, f={self.f}")
        if self.r < 2 or self.d < 1:
            raise GeometryError(f"need r >= 2 and d >= 1, got r={self.r}, d={self.d}")

    @property
    def n(self) -> int:
        return (self.r - 1) * (self.d + 1)

    @property
    def constant(self) -> Fraction:
        return p_r(self.r) if self.r <= self.d + 1 else q(self.r, self.d)


def _interval(ctx, value: Fraction):
    return ctx.mpf(value.numerator) / ctx.mpf(value.denominator)


def hoeffding_slack(inputs: BoundInputs, precision: int = None):
    """Outward-rounded enclosure of sqrt(n f ln(N r^2) / 2)."""
    ctx = interval_context(precision)
    inner = ctx.mpf(inputs.n * inputs.f) * ctx.log(ctx.mpf(inputs.N * inputs.r ** 2)) / 2
    return ctx.sqrt(inner) if inputs.f else ctx.mpf(0)


def tolerance_bound_interval(inputs: BoundInputs, precision: int = None):
    ctx = interval_context(precision)
    exact = Fraction(inputs.N) - (1 - inputs.constant) * inputs.f - 1
    return _interval(ctx, exact) - hoeffding_slack(inputs, precision)


def tolerance_bound(inputs: BoundInputs, precision: int = None) -> int:
    """Largest integer t the existence bound guarantees; negative means nothing.

    Floors the lower end of the enclosure, so the answer never overshoots.
    """
    bound = tolerance_bound_interval(inputs, precision)
    return int(mpmath.floor(mpmath.mpf(bound.a)))


def breaking_bound(N: int, r: int, f: int) -> Fraction:
    """Every colourful partition breaks after removing at most N - f/r! classes."""
    return N - Fraction(f, math.factorial(r))


def _decimal(value, digits=12):
    if value is None:
        return None
    return mpmath.nstr(mpmath.mpf(value.numerator) / value.denominator, digits)


def constants_table(r_max: int, d_max: int):
    """Rows (r, d, p_r, q, avoidance, row counts) for every 2 <= r <= r_max, 1 <= d <= d_max."""
    rows = []
    for r in range(2, r_max + 1):
        pr = p_r(r)
        for d in range(1, d_max + 1):
            if r > d + 1:
                T = extremal_matrix(r, d)
                qr = hit_probability(T, "rook")
                counts = [c for c in T.row_counts if c]
            else:
                qr, counts = None, []
            rows.append({
                "r": r,
                "d": d,
                "p_r": pr,
                "q": qr,
                "avoidance": None if qr is None else 1 - qr,
                "row_counts": counts,
                "p_r_decimal": _decimal(pr),
                "q_decimal": _decimal(qr),
            })
    return rows
