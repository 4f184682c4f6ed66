"""Split predicates, split capacity f(N), the r = 2 quantity N', and the
configurations that make these quantities extreme (perfect splits, clusters).
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, combinations_with_replacement
from typing import Dict, Optional, Sequence, Tuple

import networkx as nx

from config import Config
from extensions import Stream, progress, rng_stream
from services.configuration import Configuration
from services.errors import (
    BudgetExceededError,
    CertificateError,
    GeometryError,
    InternalInconsistencyError,
    PerfectSplitUnavailableError,
)
from services.exact_geometry import (
    ONE,
    ZERO,
    HalfSpace,
    at_least,
    affinely_independent,
    enumerate_signatures,
    equal_to,
    family_dimension,
    lp_feasible,
    open_intersection_empty,
    solve_square,
    to_point,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitVerdict:
    can_split: bool
    matching: Optional[Tuple[int, ...]] = None  # matching[k] = point held by half-space k
    hall_violator: Optional[Tuple[int, ...]] = None
    nonempty_intersection: bool = False

    def __bool__(self):
        return self.can_split


def _membership(family, points):
    """pattern[k] = bitmask of the points inside half-space k."""
    return tuple(sum(1 << i for i, p in enumerate(points) if h.contains(p)) for h in family)


@lru_cache(maxsize=None)
def perfect_matching(pattern: Tuple[int, ...], size: int) -> Optional[Tuple[int, ...]]:
    graph = nx.Graph()
    top = [("h", k) for k in range(len(pattern))]
    graph.add_nodes_from(top, bipartite=0)
    graph.add_nodes_from((("p", i) for i in range(size)), bipartite=1)
    graph.add_edges_from((("h", k), ("p", i)) for k, mask in enumerate(pattern)
                         for i in range(size) if mask >> i & 1)
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    if any(node not in matching for node in top) or size != len(pattern):
        return None
    return tuple(matching[("h", k)][1] for k in range(len(pattern)))


def hall_condition_holds(pattern: Tuple[int, ...]) -> bool:
    """Literal every-k-subsets test: any k half-spaces hold >= k points between them."""
    for k in range(1, len(pattern) + 1):
        for chosen in combinations(pattern, k):
            union = 0
            for mask in chosen:
                union |= mask
            if bin(union).count("1") < k:
                return False
    return True


def _hall_violator(pattern):
    for k in range(1, len(pattern) + 1):
        for chosen in combinations(range(len(pattern)), k):
            union = 0
            for idx in chosen:
                union |= pattern[idx]
            if bin(union).count("1") < k:
                return chosen
    return None


def can_split(family: Sequence[HalfSpace], points: Sequence) -> SplitVerdict:
    """Empty intersection plus a perfect point-to-half-space matching (Hall)."""
    points = [to_point(p) for p in points]
    if len(points) != len(family):
        raise GeometryError(f"{len(points)} points against {len(family)} half-spaces")
    if not open_intersection_empty(family):
        return SplitVerdict(False, nonempty_intersection=True)
    pattern = _membership(family, points)
    matching = perfect_matching(pattern, len(points))
    if matching is None:
        return SplitVerdict(False, hall_violator=_hall_violator(pattern))
    return SplitVerdict(True, matching=matching)


def is_perfect_split(family: Sequence[HalfSpace], config: Configuration) -> bool:
    if len(family) != config.r:
        raise GeometryError(f"a perfect split needs r={config.r} half-spaces, got {len(family)}")
    if not open_intersection_empty(family):
        return False
    return all(sum(1 for p in points if h.contains(p)) == config.r - 1
               for h in family for points in config.classes)


def helly_subfamily(family: Sequence[HalfSpace], d: int) -> Optional[Tuple[int, ...]]:
    """Indices of at most d+1 members whose open intersection is already empty."""
    for size in range(1, min(d + 1, len(family)) + 1):
        for chosen in combinations(range(len(family)), size):
            if open_intersection_empty([family[k] for k in chosen]):
                return chosen
    return None


def _jitter(rng, d, radius, steps=8):
    return tuple(Fraction(int(k), steps) * radius for k in rng.integers(-steps, steps + 1, size=d))


def generate_perfect_split(N: int, r: int, d: int, seed: int = 0):
    """Classes scattered around the vertices of a simplex, cut by H_i = {lambda_i < 1/r}.

    Vertices are p_j = e_j (j < r-1) and p_{r-1} = 0, so the barycentric
    functionals are lambda_j(x) = x_j and lambda_{r-1}(x) = 1 - sum x_j.
    """
    if r < 2:
        raise GeometryError(f"perfect splits need r >= 2, got {r}")
    if r > d + 1:
        raise PerfectSplitUnavailableError(
            f"no perfect split exists for r={r} > d+1={d + 1}: by Helly some d+1 of the half-spaces "
            f"already have empty intersection, and they miss at most d+1 < r points of a class")
    if N < 1:
        raise GeometryError(f"need N >= 1, got {N}")

    third = Fraction(1, r)
    family = []
    for i in range(r - 1):
        family.append(HalfSpace(tuple(-ONE if j == i else ZERO for j in range(d)), -third))
    family.append(HalfSpace(tuple(ONE if j < r - 1 else ZERO for j in range(d)), 1 - third))

    vertices = [tuple(ONE if j == i else ZERO for j in range(d)) for i in range(r - 1)]
    vertices.append(tuple(ZERO for _ in range(d)))
    radius = Fraction(1, 2 * r * d)
    rng = rng_stream(seed, Stream.PERFECT_SPLIT)
    classes = []
    for _ in range(N):
        classes.append(tuple(tuple(a + b for a, b in zip(p, _jitter(rng, d, radius))) for p in vertices))
    config = Configuration(d, r, tuple(classes))
    if not is_perfect_split(family, config):
        raise InternalInconsistencyError("generated configuration is not a perfect split")
    logger.info(f"Generated perfect split N={N}, r={r}, d={d}, seed={seed}")
    return config, tuple(family)


def moment_curve(N: int, d: int):
    return [tuple(Fraction(t ** k) for k in range(1, d + 1)) for t in range(1, N + 1)]


def cluster_radius(base_points) -> Fraction:
    """1/K small enough that no hyperplane meets d+1 of the l-inf boxes of that radius.

    For each (d+1)-subset with difference matrix M, a hyperplane within rho (in the
    l1-normalised sense) of all of them forces 1 <= 2 rho ||M^-1||_sum; K is chosen
    above 2 max ||M^-1||_sum.

    Raises:
        GeometryError: if some d+1 base points are affinely dependent
    """
    d = len(base_points[0])
    worst = ZERO
    for subset in combinations(base_points, d + 1):
        if not affinely_independent(subset):
            raise GeometryError("base points are degenerate: d+1 of them lie on a hyperplane")
        M = [[a - b for a, b in zip(p, subset[0])] for p in subset[1:]]
        worst = max(worst, sum((abs(v) for row in solve_square(M) for v in row), ZERO))
    K = math.floor(2 * worst) + 1 if worst else 2
    return Fraction(1, max(K, 2))


def generate_clustered_config(N: int, r: int, d: int, base_points=None, seed: int = 0) -> Configuration:
    """Each class is r points jittered inside a tiny box around its own base point."""
    base = [to_point(p) for p in base_points] if base_points is not None else moment_curve(N, d)
    if len(base) != N or any(len(p) != d for p in base):
        raise GeometryError(f"need {N} base points in dimension {d}")
    radius = cluster_radius(base)
    rng = rng_stream(seed, Stream.CLUSTERED)
    classes = tuple(tuple(tuple(a + b for a, b in zip(y, _jitter(rng, d, radius))) for _ in range(r)) for y in base)
    logger.info(f"Generated clustered configuration N={N}, r={r}, d={d}, radius={radius}")
    return Configuration(d, r, classes)


def generate_nested_pairs(N: int, d: int = 1) -> Configuration:
    """Pairs {-i e_1, i e_1}: every pair straddles the hyperplane x_1 = 0."""
    def point(t):
        return tuple(Fraction(t) if j == 0 else ZERO for j in range(d))
    return Configuration(d, 2, tuple((point(-i), point(i)) for i in range(1, N + 1)))


def generate_random_config(N: int, r: int, d: int, seed: int = 0, spread: int = 10,
                           denominator: int = 4) -> Configuration:
    rng = rng_stream(seed, Stream.RANDOM_CONFIG)
    classes = []
    for _ in range(N):
        nums = rng.integers(-spread * denominator, spread * denominator + 1, size=(r, d))
        dens = rng.integers(1, denominator + 1, size=(r, d))
        classes.append(tuple(tuple(Fraction(int(a), int(b)) for a, b in zip(nr, dr)) for nr, dr in zip(nums, dens)))
    return Configuration(d, r, tuple(classes))


@dataclass(frozen=True)
class SplitCertificate:
    family: Tuple[HalfSpace, ...]
    matchings: Dict[int, Tuple[int, ...]] = field(default_factory=dict)
    split_class_indices: Tuple[int, ...] = ()


def validate_certificate(certificate: SplitCertificate, config: Configuration):
    """Raises CertificateError unless the family is empty-intersection and every matching holds."""
    family = certificate.family
    if len(family) != config.r or family_dimension(family) != config.d:
        raise CertificateError(f"certificate needs {config.r} half-spaces in Q^{config.d}")
    if not open_intersection_empty(family):
        raise CertificateError("certificate family has a common point")
    for c in certificate.split_class_indices:
        matching = certificate.matchings.get(c)
        if matching is None or sorted(matching) != list(range(config.r)):
            raise CertificateError(f"class {c} has no bijective matching")
        for k, i in enumerate(matching):
            if not family[k].contains(config.classes[c][i]):
                raise CertificateError(f"class {c}: point {i} is not inside half-space {k}")


def _trivial_family(d, r):
    e1 = tuple(ONE if j == 0 else ZERO for j in range(d))
    minus = tuple(-a for a in e1)
    return tuple([HalfSpace(e1, ZERO), HalfSpace(minus, ZERO)] + [HalfSpace(e1, ZERO)] * (r - 2))


def _realize_empty_family(signatures, points, witnesses, d):
    """Half-spaces with exactly these inside-sets and an empty common intersection, or None.

    Motzkin: the open system is infeasible iff some rescaled support T has
    sum a_k = 0 and sum b_k >= 0; Helly caps |T| at d+1. Per T this is one LP.
    """
    r = len(signatures)
    width = d + 1
    for size in range(2, min(r, d + 1) + 1):
        for support in combinations(range(r), size):
            nvars = width * size
            rows = []
            for slot, k in enumerate(support):
                base = slot * width
                for p, inside in zip(points, signatures[k]):
                    row = [ZERO] * nvars
                    for j in range(d):
                        row[base + j] = p[j]
                    row[base + d] = -ONE
                    if inside:
                        rows.append(at_least(row, 0, strict=True))
                    else:
                        rows.append(at_least([-v for v in row], 0))
            for j in range(d):
                row = [ZERO] * nvars
                for slot in range(size):
                    row[slot * width + j] = ONE
                rows.append(equal_to(row, 0))
            row = [ZERO] * nvars
            for slot in range(size):
                row[slot * width + d] = ONE
            rows.append(at_least(row, 0))
            result = lp_feasible(rows)
            if not result.feasible:
                continue
            family = list(witnesses)
            for slot, k in enumerate(support):
                values = result.witness[slot * width:(slot + 1) * width]
                if any(a != 0 for a in values[:d]):
                    family[k] = HalfSpace(tuple(values[:d]), values[d])
            family = tuple(family)
            if not open_intersection_empty(family) or any(
                    h.signature(points) != s for h, s in zip(family, signatures)):
                raise InternalInconsistencyError("realised family does not match its certificate")
            return family
    return None


@dataclass(frozen=True)
class CapacityResult:
    f: int
    certificate: SplitCertificate
    exhaustive: bool
    families_examined: int


def _family_size(candidates, r):
    return math.comb(candidates + r - 1, r)


def split_capacity(config: Configuration, mode: str = "exact", trials: int = 2000, seed: int = 0,
                   budget: int = None) -> CapacityResult:
    """Largest number of classes one empty-intersection family of r open half-spaces splits.

    Candidates are the realisable inside-sets over all Nr points; splitting only
    depends on those sets, and whether a multiset of them is realisable with
    empty intersection is settled exactly by :func:`_realize_empty_family`.
    Ties go to the lexicographically least multiset of signatures.
    """
    budget = budget or Config.FAMILY_BUDGET
    points = config.all_points()
    r, d, N = config.r, config.d, config.N
    signatures = enumerate_signatures(points)
    candidates = [(s, h) for s, h in signatures.items() if any(s)]
    M = len(candidates)
    space = _family_size(M, r)

    membership = []
    for s, _ in candidates:
        per_class = tuple(sum(1 << i for i in range(r) if s[c * r + i]) for c in range(N))
        membership.append((int("".join(map(str, s)), 2), per_class))

    def evaluate(indices):
        common = -1
        for k in indices:
            common &= membership[k][0]
        split = []
        matchings = {}
        for c in range(N):
            pattern = tuple(membership[k][1][c] for k in indices)
            matching = perfect_matching(pattern, r)
            if matching is not None:
                split.append(c)
                matchings[c] = matching
        return common == 0, split, matchings

    def families():
        if mode == "exact":
            if space > budget:
                raise BudgetExceededError(
                    f"{space} candidate families exceed the budget of {budget}", estimate=space)
            yield from combinations_with_replacement(range(M), r)
        elif mode == "monte_carlo":
            rng = rng_stream(seed, Stream.CAPACITY)
            for _ in range(trials):
                yield tuple(sorted(int(k) for k in rng.integers(0, M, size=r)))
        else:
            raise GeometryError(f"unknown capacity mode {mode!r}")

    logger.info(f"Split capacity ({mode}) over {M} candidate half-spaces, {space} families, N={N}, r={r}, d={d}")
    best = None
    examined = 0
    for indices in progress(families(), desc="families", total=space if mode == "exact" else trials):
        examined += 1
        disjoint, split, matchings = evaluate(indices)
        if not disjoint or not split:
            continue
        if best is not None and (-len(split), indices) >= (-best[0], best[3]):
            continue
        family = _realize_empty_family([candidates[k][0] for k in indices], points,
                                       [candidates[k][1] for k in indices], d)
        if family is None:
            continue
        best = (len(split), family, matchings, indices, tuple(split))
        logger.debug(f"capacity improved to {len(split)} with families {indices}")
        if best[0] == N and mode == "exact":
            break

    if best is None:
        certificate = SplitCertificate(_trivial_family(d, r))
        f = 0
    else:
        f = best[0]
        certificate = SplitCertificate(best[1], best[2], best[4])
    validate_certificate(certificate, config)
    logger.info(f"Split capacity f={f} after {examined} families")
    return CapacityResult(f, certificate, mode == "exact", examined)


@dataclass(frozen=True)
class HyperplaneSplit:
    count: int
    halfspace: HalfSpace  # the open positive side of the splitting hyperplane
    split_classes: Tuple[int, ...]


def max_pairs_split_by_hyperplane(config: Configuration) -> HyperplaneSplit:
    """N': the most pairs a single hyperplane puts strictly on opposite sides."""
    if config.r != 2:
        raise GeometryError(f"N' is defined for pairs only, got r={config.r}")
    points = config.all_points()
    best = None
    for inside, h in enumerate_signatures(points).items():
        split = tuple(c for c in range(config.N) if inside[2 * c] != inside[2 * c + 1])
        if best is None or len(split) > best.count:
            best = HyperplaneSplit(len(split), h, split)
    logger.info(f"N' = {best.count} for N={config.N} pairs")
    return best
