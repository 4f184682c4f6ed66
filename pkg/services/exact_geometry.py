"""Exact rational geometry: linear constraints, a Bland-rule simplex for
feasibility, and the convexity predicates built on top of it.

Everything here works over ``fractions.Fraction``. Nothing is ever rounded, so
strict inequalities and degenerate configurations are decided exactly.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Tuple

from services.errors import GeometryError, InternalInconsistencyError

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def to_point(values) -> Point:
    """Coerce any iterable of ints / strings / Fractions into a Point."""
    return tuple(Fraction(v) for v in values)


def dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), ZERO)


def _common_dimension(points, what="points") -> int:
    if not points:
        raise GeometryError(f"empty {what}")
    dims = {len(p) for p in points}
    if len(dims) != 1:
        raise GeometryError(f"{what} have mixed dimensions {sorted(dims)}")
    return dims.pop()


class Relation(str, Enum):
    GE = ">="
    GT = ">"
    EQ = "=="


@dataclass(frozen=True)
class Constraint:
    """One row ``coefficients . x  (>= | > | ==)  bound``."""

    coefficients: Tuple[Fraction, ...]
    bound: Fraction
    relation: Relation = Relation.GE

    @property
    def width(self) -> int:
        return len(self.coefficients)

    @property
    def strict(self) -> bool:
        return self.relation is Relation.GT

    def is_satisfied(self, x) -> bool:
        value = dot(self.coefficients, x)
        if self.relation is Relation.GT:
            return value > self.bound
        if self.relation is Relation.GE:
            return value >= self.bound
        return value == self.bound


def at_least(coefficients, bound, strict=False) -> Constraint:
    return Constraint(to_point(coefficients), Fraction(bound), Relation.GT if strict else Relation.GE)


def at_most(coefficients, bound, strict=False) -> Constraint:
    return at_least([-Fraction(c) for c in coefficients], -Fraction(bound), strict)


def equal_to(coefficients, bound) -> Constraint:
    return Constraint(to_point(coefficients), Fraction(bound), Relation.EQ)


@dataclass(frozen=True)
class LPResult:
    feasible: bool
    witness: Optional[Point] = None

    def __bool__(self):
        return self.feasible


class _Tableau:
    """Dense simplex tableau over Fractions, last column is the right-hand side.

    The objective lives in its own row and is pivoted along with the constraints.
    """

    def __init__(self, rows, rhs, basis):
        self.rows = [list(row) + [b] for row, b in zip(rows, rhs)]
        self.basis = list(basis)
        self.objective = None

    @property
    def width(self):
        return len(self.rows[0]) - 1 if self.rows else 0

    def set_cost(self, cost):
        objective = list(cost) + [ZERO]
        for row, var in zip(self.rows, self.basis):
            c = cost[var]
            if c:
                objective = [o - c * v for o, v in zip(objective, row)]
        self.objective = objective

    def pivot(self, r, c):
        pivot_row = self.rows[r]
        piv = pivot_row[c]
        pivot_row = [v / piv for v in pivot_row]
        self.rows[r] = pivot_row
        for k, row in enumerate(self.rows):
            if k != r and row[c]:
                f = row[c]
                self.rows[k] = [v - f * p for v, p in zip(row, pivot_row)]
        f = self.objective[c]
        if f:
            self.objective = [v - f * p for v, p in zip(self.objective, pivot_row)]
        self.basis[r] = c

    def minimize(self, allowed):
        # Bland's rule: lowest-index improving column, lowest-index basic variable on ratio ties.
        while True:
            entering = next((j for j in allowed if self.objective[j] < 0), None)
            if entering is None:
                return True
            best = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    key = (row[-1] / row[entering], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], entering)

    def value_of(self, var):
        for row, b in zip(self.rows, self.basis):
            if b == var:
                return row[-1]
        return ZERO


def _solve(constraints: Tuple[Constraint, ...]) -> LPResult:
    n = constraints[0].width
    strict = any(c.strict for c in constraints)
    inequality_rows = [k for k, c in enumerate(constraints) if c.relation is not Relation.EQ]

    # column layout: x+ | x- | s (strict only) | one surplus per inequality | t (s + t = 1)
    s_col = 2 * n
    surplus_start = 2 * n + (1 if strict else 0)
    t_col = surplus_start + len(inequality_rows)
    structural = t_col + (1 if strict else 0)

    rows, rhs = [], []
    surplus = {k: surplus_start + idx for idx, k in enumerate(inequality_rows)}
    for k, c in enumerate(constraints):
        row = [ZERO] * structural
        for j, a in enumerate(c.coefficients):
            row[j] = a
            row[n + j] = -a
        if c.relation is Relation.GT:
            row[s_col] = -ONE
        if k in surplus:
            row[surplus[k]] = -ONE
        rows.append(row)
        rhs.append(c.bound)
    if strict:
        row = [ZERO] * structural
        row[s_col] = ONE
        row[t_col] = ONE
        rows.append(row)
        rhs.append(ONE)

    m = len(rows)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
        rows[i] = rows[i] + [ONE if j == i else ZERO for j in range(m)]

    tableau = _Tableau(rows, rhs, range(structural, structural + m))
    tableau.set_cost([ZERO] * structural + [ONE] * m)
    tableau.minimize(range(structural + m))
    if -tableau.objective[-1] > 0:
        return LPResult(False)

    # drive zero-level artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tableau.rows):
        if tableau.basis[i] >= structural:
            row = tableau.rows[i]
            col = next((j for j in range(structural) if row[j] != 0), None)
            if col is None:
                del tableau.rows[i]
                del tableau.basis[i]
                continue
            tableau.pivot(i, col)
        i += 1

    if strict:
        cost = [ZERO] * (structural + m)
        cost[s_col] = -ONE
        tableau.set_cost(cost)
        if not tableau.minimize(range(structural)):
            raise InternalInconsistencyError("slack maximisation unbounded despite s <= 1")
        if tableau.value_of(s_col) <= 0:
            return LPResult(False)

    witness = tuple(tableau.value_of(j) - tableau.value_of(n + j) for j in range(n))
    return LPResult(True, witness)


@lru_cache(maxsize=200000)
def _solve_cached(constraints):
    return _solve(constraints)


def lp_feasible(constraints: Sequence[Constraint]) -> LPResult:
    """Decide a system of linear rows exactly.

    Strict rows are handled by maximising a common slack ``s <= 1`` subtracted
    from every strict row; the system is feasible iff the optimum is positive.
    Every feasible answer is re-checked against the original rows.
    """
    constraints = tuple(constraints)
    if not constraints:
        raise GeometryError("lp_feasible needs at least one row")
    widths = {c.width for c in constraints}
    if len(widths) != 1:
        raise GeometryError(f"rows have mixed widths {sorted(widths)}")

    result = _solve_cached(constraints)
    if result.feasible:
        bad = [c for c in constraints if not c.is_satisfied(result.witness)]
        if bad:
            raise InternalInconsistencyError(f"LP witness violates {len(bad)} row(s)")
    return result


def captures_origin(points: Sequence[Point]) -> bool:
    """True iff the origin lies in conv(points)."""
    d = _common_dimension(points)
    m = len(points)
    rows = [at_least([ONE if j == k else ZERO for j in range(m)], 0) for k in range(m)]
    rows.append(equal_to([ONE] * m, 1))
    for coord in range(d):
        rows.append(equal_to([p[coord] for p in points], 0))
    return lp_feasible(rows).feasible


class HullStatus(str, Enum):
    INTERSECT = "intersect"
    DISJOINT = "disjoint"
    EMPTY_PART = "empty_part"


@dataclass(frozen=True)
class HullIntersection:
    status: HullStatus
    witness: Optional[Point] = None

    def __bool__(self):
        return self.status is HullStatus.INTERSECT


def convex_hulls_intersect(parts: Sequence[Sequence[Point]]) -> HullIntersection:
    """Decide whether the convex hulls of ``parts`` share a point.

    An empty part is reported as ``EMPTY_PART`` rather than raised: removing
    colour classes routinely empties parts and that simply means "broken".
    """
    if not parts:
        raise GeometryError("no parts given")
    if any(len(part) == 0 for part in parts):
        return HullIntersection(HullStatus.EMPTY_PART)
    d = _common_dimension([p for part in parts for p in part])

    sizes = [len(part) for part in parts]
    width = d + sum(sizes)
    rows = []
    offset = d
    for part in parts:
        for k in range(len(part)):
            coeffs = [ZERO] * width
            coeffs[offset + k] = ONE
            rows.append(at_least(coeffs, 0))
        coeffs = [ZERO] * width
        for k in range(len(part)):
            coeffs[offset + k] = ONE
        rows.append(equal_to(coeffs, 1))
        for coord in range(d):
            coeffs = [ZERO] * width
            coeffs[coord] = -ONE
            for k, p in enumerate(part):
                coeffs[offset + k] = p[coord]
            rows.append(equal_to(coeffs, 0))
        offset += len(part)

    result = lp_feasible(rows)
    if not result.feasible:
        return HullIntersection(HullStatus.DISJOINT)
    return HullIntersection(HullStatus.INTERSECT, result.witness[:d])


@dataclass(frozen=True)
class HalfSpace:
    """``{x : <normal, x> > offset}`` (open) or ``>= offset`` (closed).

    A zero normal makes the set improper (empty or everything). Those only
    come out of pushdowns; use :meth:`make` for anything user supplied.
    """

    normal: Point
    offset: Fraction
    closed: bool = False

    @classmethod
    def make(cls, normal, offset, closed=False):
        normal = to_point(normal)
        if not normal or all(a == 0 for a in normal):
            raise GeometryError("half-space normal must be a nonzero vector")
        return cls(normal, Fraction(offset), closed)

    @property
    def dimension(self) -> int:
        return len(self.normal)

    @property
    def is_proper(self) -> bool:
        return any(a != 0 for a in self.normal)

    def value(self, x) -> Fraction:
        return dot(self.normal, x) - self.offset

    def contains(self, x) -> bool:
        v = self.value(x)
        return v >= 0 if self.closed else v > 0

    def complement(self) -> "HalfSpace":
        return HalfSpace(tuple(-a for a in self.normal), -self.offset, not self.closed)

    def closure(self) -> "HalfSpace":
        return replace(self, closed=True)

    def interior(self) -> "HalfSpace":
        return replace(self, closed=False)

    def as_constraint(self) -> Constraint:
        return Constraint(self.normal, self.offset, Relation.GE if self.closed else Relation.GT)

    def signature(self, points) -> Tuple[int, ...]:
        return tuple(1 if self.contains(p) else 0 for p in points)


HalfSpaceFamily = Tuple[HalfSpace, ...]


def family_dimension(family) -> int:
    if not family:
        raise GeometryError("half-space family is empty")
    dims = {h.dimension for h in family}
    if len(dims) != 1:
        raise GeometryError(f"half-spaces have mixed dimensions {sorted(dims)}")
    return dims.pop()


def intersection_empty(family) -> bool:
    """Emptiness of the intersection, each member taken with its own openness."""
    family_dimension(family)
    return not lp_feasible([h.as_constraint() for h in family]).feasible


def open_intersection_empty(family) -> bool:
    return intersection_empty([h.interior() for h in family])


def closed_union_covers_space(family) -> bool:
    # union of closures is everything iff the open complements share no point
    return open_intersection_empty([h.closure().complement() for h in family])


def _separation_lp(points, inside):
    """Strictly separate ``inside`` from the rest: returns (normal, offset) or None."""
    d = len(points[0])
    rows = []
    for p, flag in zip(points, inside):
        row = list(p) + [-ONE]
        if not flag:
            row = [-v for v in row]
        rows.append(at_least(row, 0, strict=True))
    result = lp_feasible(rows)
    if not result.feasible:
        return None
    return result.witness[:d], result.witness[d]


def _proper_witness(points, inside, normal, offset):
    if any(a != 0 for a in normal):
        return normal, offset
    # only one-sided dichotomies have a zero-normal solution; swap in e_1
    d = len(points[0])
    e1 = tuple(ONE if j == 0 else ZERO for j in range(d))
    xs = [p[0] for p in points] or [ZERO]
    if all(inside):
        return e1, min(xs) - 1
    return e1, max(xs) + 1


def enumerate_signatures(points: Sequence[Point]):
    """Map every realisable inside-set to one open half-space realising it.

    Keys are 0/1 tuples over ``points``. Points are added one at a time; a new
    point either falls strictly on a side of the current witness, sits on its
    hyperplane (then shifting the offset by half the smallest margin realises
    both sides), or the missing side is settled by a strict-separation LP.
    """
    points = [to_point(p) for p in points]
    d = _common_dimension(points)
    e1 = tuple(ONE if j == 0 else ZERO for j in range(d))

    frontier = [((), (e1, ZERO))]
    for k, x in enumerate(points):
        processed = points[:k]
        extended = []
        for inside, (normal, offset) in frontier:
            v = dot(normal, x) - offset
            if v == 0:
                margins = [abs(dot(normal, y) - offset) for y in processed]
                shift = min(margins) / 2 if margins else ONE
                extended.append((inside + (1,), (normal, offset - shift)))
                extended.append((inside + (0,), (normal, offset + shift)))
                continue
            here = 1 if v > 0 else 0
            extended.append((inside + (here,), (normal, offset)))
            other = inside + (1 - here,)
            found = _separation_lp(points[: k + 1], other)
            if found is not None:
                extended.append((other, _proper_witness(points[: k + 1], other, *found)))
        frontier = extended

    signatures = {}
    for inside, (normal, offset) in sorted(frontier):
        normal, offset = _proper_witness(points, inside, normal, offset)
        signatures[inside] = HalfSpace(tuple(normal), offset, False)
    logger.debug(f"{len(signatures)} realisable subsets over {len(points)} points in d={d}")
    return signatures


def enumerate_combinatorial_halfspaces(points: Sequence[Point]):
    """One open half-space per subset of ``points`` cut out by some open half-space."""
    return list(enumerate_signatures(points).values())


def solve_square(matrix, rhs=None):
    """Gauss-Jordan over Fractions. Returns the inverse (``rhs`` None) or the solution.

    Raises:
        GeometryError: if the matrix is singular
    """
    size = len(matrix)
    if rhs is None:
        aug = [list(map(Fraction, row)) + [ONE if i == j else ZERO for j in range(size)]
               for i, row in enumerate(matrix)]
    else:
        aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise GeometryError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    if rhs is None:
        return [row[size:] for row in aug]
    return [row[size] for row in aug]


def affinely_independent(points) -> bool:
    base = points[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in points[1:]]
    if not diffs:
        return True
    if len(diffs) > len(base):
        return False
    # rank via elimination on the difference rows
    rows = [list(r) for r in diffs]
    rank = 0
    for col in range(len(base)):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[rank])]
        rank += 1
    return rank == len(diffs)
