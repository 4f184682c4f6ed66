"""The tensor lift x -> v_i (x, 1)^T into Q^n, n = (r-1)(d+1), and the maps
that come with it: projections back down, r-blocks, colourful choices and the
pushdown of origin half-spaces.

Matrices in Q^{(r-1) x (d+1)} are flattened row-major: entry (k, j) sits at
index ``k*(d+1) + j``. Indices ``i`` of the simplex vectors are 0-based.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Tuple

from services.configuration import ColorfulChoice, ColorfulPartition, Configuration
from services.errors import GeometryError, InternalInconsistencyError
from services.exact_geometry import (
    ONE,
    ZERO,
    HalfSpace,
    Point,
    captures_origin,
    convex_hulls_intersect,
    solve_square,
    to_point,
)
from services.formulas import HitMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimplexVectors:
    r: int
    vectors: Tuple[Point, ...]

    def norm_sq(self, i) -> Fraction:
        return sum((a * a for a in self.vectors[i]), ZERO)


@lru_cache(maxsize=None)
def make_simplex_vectors(r: int) -> SimplexVectors:
    """Standard basis e_1..e_{r-1} plus v_r = -(e_1 + ... + e_{r-1})."""
    if r < 2:
        raise GeometryError(f"simplex vectors need r >= 2, got {r}")
    basis = [tuple(ONE if k == i else ZERO for k in range(r - 1)) for i in range(r - 1)]
    basis.append(tuple(-ONE for _ in range(r - 1)))
    return SimplexVectors(r, tuple(basis))


def _check_index(i, r):
    if not 0 <= i < r:
        raise GeometryError(f"simplex vector index {i} out of range for r={r}")


def lift(x: Sequence, i: int, r: int) -> Point:
    _check_index(i, r)
    v = make_simplex_vectors(r).vectors[i]
    x_bar = tuple(to_point(x)) + (ONE,)
    return tuple(vk * xj for vk in v for xj in x_bar)


def project(y: Sequence, i: int, r: int) -> Point:
    """Left inverse of ``lift(., i, r)``: drop the last coordinate of y^T v_i / |v_i|^2."""
    _check_index(i, r)
    y = to_point(y)
    if len(y) % (r - 1):
        raise GeometryError(f"vector of length {len(y)} is not an (r-1) x (d+1) matrix for r={r}")
    width = len(y) // (r - 1)
    sv = make_simplex_vectors(r)
    v, norm = sv.vectors[i], sv.norm_sq(i)
    column = [sum((y[k * width + j] * v[k] for k in range(r - 1)), ZERO) / norm for j in range(width)]
    return tuple(column[:-1])


def column_in_affine_space(y: Sequence, j: int, r: int) -> bool:
    """Membership of y in U_j = g_j(Q^d)."""
    y = to_point(y)
    return lift(project(y, j, r), j, r) == y


def u_functional(r: int, a: int, b: int) -> Point:
    """u in Q^{r-1} with <u, v_a> = 1, <u, v_b> = -1 and <u, v_k> = 0 otherwise."""
    _check_index(a, r)
    _check_index(b, r)
    if a == b:
        raise GeometryError("u_functional needs two distinct indices")
    vectors = make_simplex_vectors(r).vectors
    rows = [k for k in range(r) if k != b]
    rhs = [ONE if k == a else ZERO for k in rows]
    return tuple(solve_square([vectors[k] for k in rows], rhs))


@dataclass(frozen=True)
class RBlock:
    class_index: int
    grid: Tuple[Tuple[Point, ...], ...]

    @property
    def r(self):
        return len(self.grid)


def build_r_block(points: Sequence[Point], r: int = None, class_index: int = 0) -> RBlock:
    """Grid entry (i, j) = lift(x^i, j). Every row is checked to capture the origin."""
    r = len(points) if r is None else r
    if len(points) != r or r < 2:
        raise GeometryError(f"an r-block needs exactly r >= 2 points, got {len(points)} for r={r}")
    grid = tuple(tuple(lift(x, j, r) for j in range(r)) for x in points)
    for i, row in enumerate(grid):
        if not captures_origin(row):
            raise InternalInconsistencyError(f"row {i} of r-block {class_index} misses the origin")
    return RBlock(class_index, grid)


def choice_to_partition(choice: ColorfulChoice, config: Configuration) -> ColorfulPartition:
    if len(choice.permutations) != config.N:
        raise GeometryError(f"choice covers {len(choice.permutations)} blocks, configuration has {config.N}")
    partition = ColorfulPartition.of(choice.permutations, config.r)
    partition.check_against(config)
    return partition


def partition_to_choice(partition: ColorfulPartition) -> ColorfulChoice:
    return ColorfulChoice(partition.assignment)


def lifted_choice_points(config: Configuration, assignment) -> list:
    return [lift(config.classes[c][i], part, config.r)
            for c, perm in enumerate(assignment) for i, part in enumerate(perm)]


def capture_equivalence_check(config: Configuration, partition: ColorfulPartition) -> bool:
    """Lifted choice captures 0 in Q^n  <=>  the parts' hulls meet in Q^d.

    Both sides are decided by LP; disagreement means a bug somewhere in the stack.
    """
    partition.check_against(config)
    upstairs = captures_origin(lifted_choice_points(config, partition.assignment))
    downstairs = bool(convex_hulls_intersect(partition.parts(config)))
    if upstairs != downstairs:
        raise InternalInconsistencyError(
            f"lift captures origin = {upstairs} but hulls intersect = {downstairs} for {partition.assignment}")
    return upstairs


def _as_matrix(normal, r, d):
    width = d + 1
    return [normal[k * width:(k + 1) * width] for k in range(r - 1)]


def pushdown_halfspace(H: HalfSpace, r: int, d: int) -> Tuple[HalfSpace, ...]:
    """f_i(H cap U_i) for an origin half-space H = {<Z, y> > 0} of Q^n.

    Member i is ``sum_j x_j <v_i, Z_j> > -<v_i, Z_{d+1}>`` (same openness as H).
    A member may come out improper when v_i is orthogonal to every column of Z.
    """
    n = (r - 1) * (d + 1)
    if H.dimension != n:
        raise GeometryError(f"half-space lives in Q^{H.dimension}, expected Q^{n} for r={r}, d={d}")
    if H.offset != 0:
        raise GeometryError("pushdown needs a half-space whose boundary contains the origin")
    if not H.is_proper:
        raise GeometryError("pushdown of a zero normal is undefined")
    Z = _as_matrix(H.normal, r, d)
    family = []
    for v in make_simplex_vectors(r).vectors:
        column = [sum((v[k] * Z[k][j] for k in range(r - 1)), ZERO) for j in range(d + 1)]
        family.append(HalfSpace(tuple(column[:d]), -column[d], H.closed))
    return tuple(family)


def hit_matrix(points: Sequence[Point], H: HalfSpace) -> HitMatrix:
    """T(i, j) = 1 iff g_i(x_j) lies in H (rows: simplex index, columns: points)."""
    r = len(points)
    entries = tuple(tuple(1 if H.contains(lift(x, i, r)) else 0 for x in points) for i in range(r))
    return HitMatrix(entries)
