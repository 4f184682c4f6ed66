import logging
from dataclasses import dataclass
from typing import FrozenSet, List, Tuple

from services.errors import GeometryError
from services.exact_geometry import Point, to_point

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Configuration:
    """N colour classes of r points each in Q^d."""

    d: int
    r: int
    classes: Tuple[Tuple[Point, ...], ...]

    def __post_init__(self):
        if self.d < 1 or self.r < 2:
            raise GeometryError(f"need d >= 1 and r >= 2, got d={self.d}, r={self.r}")
        if not self.classes:
            raise GeometryError("a configuration needs at least one colour class")
        for c, points in enumerate(self.classes):
            if len(points) != self.r:
                raise GeometryError(f"class {c} has {len(points)} points, expected r={self.r}")
            for p in points:
                if len(p) != self.d:
                    raise GeometryError(f"class {c} holds a point of dimension {len(p)}, expected d={self.d}")

    @classmethod
    def from_lists(cls, d, r, classes):
        return cls(d, r, tuple(tuple(to_point(p) for p in points) for points in classes))

    @property
    def N(self) -> int:
        return len(self.classes)

    def all_points(self) -> List[Point]:
        return [p for points in self.classes for p in points]


def _check_permutations(perms, r, what):
    for c, perm in enumerate(perms):
        if sorted(perm) != list(range(r)):
            raise GeometryError(f"{what} for class {c} is not a permutation of range({r}): {perm}")


@dataclass(frozen=True)
class ColorfulPartition:
    """``assignment[c][i]`` is the part that receives point ``i`` of class ``c``.

    Every part gets exactly one point of every class. The tuple itself is the
    lexicographic encoding used for deterministic tie-breaks.
    """

    assignment: Tuple[Tuple[int, ...], ...]

    @classmethod
    def of(cls, assignment, r=None):
        assignment = tuple(tuple(int(j) for j in perm) for perm in assignment)
        if assignment:
            _check_permutations(assignment, r if r is not None else len(assignment[0]), "assignment")
        return cls(assignment)

    @classmethod
    def identity(cls, N, r):
        return cls(tuple(tuple(range(r)) for _ in range(N)))

    def check_against(self, config: Configuration):
        if len(self.assignment) != config.N:
            raise GeometryError(f"partition covers {len(self.assignment)} classes, configuration has {config.N}")
        _check_permutations(self.assignment, config.r, "assignment")

    def parts(self, config: Configuration, removed: FrozenSet[int] = frozenset()) -> List[List[Point]]:
        parts = [[] for _ in range(config.r)]
        for c, perm in enumerate(self.assignment):
            if c in removed:
                continue
            for i, part in enumerate(perm):
                parts[part].append(config.classes[c][i])
        return parts

    def point_in_part(self, c: int, part: int) -> int:
        return self.assignment[c].index(part)


@dataclass(frozen=True)
class ColorfulChoice:
    """Per r-block, ``permutations[c][i]`` is the column picked in row ``i``."""

    permutations: Tuple[Tuple[int, ...], ...]
