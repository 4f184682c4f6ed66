import math
from collections import Counter
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from extensions import Stream, rng_stream
from services.configuration import ColorfulPartition
from services.errors import CertificateError, GeometryError
from services.exact_geometry import HalfSpace
from services.formulas import p_r, q
from services.probabilistic_service import (
    adversary_attack,
    class_stream,
    estimate_hit_expectation,
    labeling_removals,
    random_colorful_choice,
    search_tolerant_partition,
)
from services.sarkaria_lift import choice_to_partition, pushdown_halfspace
from services.split_service import (
    SplitCertificate,
    can_split,
    generate_nested_pairs,
    generate_random_config,
    split_capacity,
)
from services.tolerance_service import is_tverberg


def family_certificate(config, family):
    matchings = {c: can_split(family, points).matching for c, points in enumerate(config.classes)
                 if can_split(family, points)}
    return SplitCertificate(tuple(family), matchings, tuple(sorted(matchings)))


class TestRandomChoice:
    def test_fixed_seed_is_reproducible(self, nested4):
        assert random_colorful_choice(nested4, 42) == random_colorful_choice(nested4, 42)
        assert random_colorful_choice(nested4, 42, trial=1) == random_colorful_choice(nested4, 42, trial=1)

    def test_pairs_are_balanced(self):
        config = generate_nested_pairs(1)
        counts = Counter(random_colorful_choice(config, 3, trial=t).permutations[0] for t in range(6000))
        sigma = math.sqrt(6000 * 0.25)
        assert set(counts) == {(0, 1), (1, 0)}
        assert all(abs(n - 3000) <= 3 * sigma for n in counts.values())

    def test_triples_reach_every_permutation(self, perfect_triples):
        config, _ = perfect_triples
        seen = {random_colorful_choice(config, 0, trial=t).permutations[0] for t in range(300)}
        assert seen == set(permutations(range(3)))


class TestSearch:
    def test_nested_pairs_reach_the_best_tolerance(self):
        config = generate_nested_pairs(6)
        report = search_tolerant_partition(config, target=2, trials=200, seed=1)
        assert report.found
        assert report.best_report.tolerance == 2
        assert report.trials == len(report.tolerances)

    def test_perfect_pairs_never_reach_three(self, perfect_pairs):
        config, _ = perfect_pairs
        report = search_tolerant_partition(config, target=3, trials=30, seed=1)
        assert not report.found
        assert report.trials == 30
        assert report.best_report.tolerance == max(report.tolerances) <= 1

    def test_search_is_reproducible(self, perfect_pairs):
        config, _ = perfect_pairs
        first = search_tolerant_partition(config, target=5, trials=10, seed=9)
        second = search_tolerant_partition(config, target=5, trials=10, seed=9)
        assert first == second

    def test_best_is_the_earliest_maximum(self, perfect_pairs):
        config, _ = perfect_pairs
        report = search_tolerant_partition(config, target=5, trials=20, seed=4)
        assert report.tolerances.index(max(report.tolerances)) == report.best_trial


class TestAttack:
    def test_perfect_pairs_lose_at_most_half(self, perfect_pairs):
        config, family = perfect_pairs
        certificate = family_certificate(config, family)
        for perms in [((0, 1),) * 4, ((0, 1), (1, 0), (0, 1), (1, 0))]:
            report = adversary_attack(config, ColorfulPartition(perms), certificate)
            assert len(report.removed_classes) <= config.N // 2
            assert report.mean_removals == Fraction(config.N, 2)

    def test_containment_removes_p_r_N_on_average(self, perfect_triples):
        config, family = perfect_triples
        certificate = family_certificate(config, family)
        partition = choice_to_partition(random_colorful_choice(config, 5), config)
        report = adversary_attack(config, partition, certificate, rule="containment")
        assert report.mean_removals == p_r(3) * config.N
        assert len(report.removed_classes) <= math.ceil(p_r(3) * config.N)
        assert report.expected_removals is None

    def test_survivors_stay_in_their_half_spaces(self, perfect_triples):
        config, family = perfect_triples
        certificate = family_certificate(config, family)
        partition = ColorfulPartition(((0, 1, 2), (1, 2, 0), (2, 0, 1)))
        report = adversary_attack(config, partition, certificate)
        for c in set(range(config.N)) - set(report.removed_classes):
            for l in range(3):
                point = config.classes[c][partition.point_in_part(c, l)]
                assert family[report.labeling[l]].contains(point)

    def test_labeling_removals_cover_every_labeling(self, perfect_triples):
        config, family = perfect_triples
        certificate = family_certificate(config, family)
        outcomes = labeling_removals(config, ColorfulPartition.identity(3, 3), certificate)
        assert [labeling for labeling, _ in outcomes] == list(permutations(range(3)))

    def test_random_configurations(self):
        for seed in range(10):
            config = generate_random_config(3, 2, 1, seed=seed)
            certificate = split_capacity(config).certificate
            partition = choice_to_partition(random_colorful_choice(config, seed), config)
            report = adversary_attack(config, partition, certificate)
            f = len(certificate.split_class_indices)
            assert report.broken_verified
            assert not is_tverberg(config, partition, set(report.removed_classes))
            assert report.mean_removals == (config.N - f) + f * (1 - Fraction(1, 2))
            assert len(report.removed_classes) <= config.N - Fraction(f, 2)

    @pytest.mark.slow
    @pytest.mark.parametrize("r,d", [(2, 2), (3, 2)])
    def test_random_configuration_sweep(self, r, d):
        for seed in range(25):
            config = generate_random_config(3, r, d, seed=100 + seed)
            certificate = split_capacity(config).certificate
            partition = choice_to_partition(random_colorful_choice(config, seed), config)
            report = adversary_attack(config, partition, certificate)
            f = report.f
            assert report.mean_removals == (config.N - f) + f * (1 - Fraction(1, math.factorial(r)))

    def test_invalid_certificate(self, two_pairs, split_line):
        bad = SplitCertificate(split_line, {0: (1, 0)}, (0,))
        with pytest.raises(CertificateError):
            adversary_attack(two_pairs, ColorfulPartition.identity(2, 2), bad)

    def test_unknown_rule(self, perfect_pairs):
        config, family = perfect_pairs
        with pytest.raises(GeometryError):
            labeling_removals(config, ColorfulPartition.identity(4, 2), family_certificate(config, family), "guess")


def random_point(rng, d):
    return tuple(Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, size=d), rng.integers(1, 5, size=d)))


def random_origin_halfspace(rng, n):
    while True:
        normal = [int(v) for v in rng.integers(-4, 5, size=n)]
        if any(normal):
            return HalfSpace.make(normal, 0)


class TestHitExpectation:
    @pytest.mark.parametrize("r,d", [(2, 1), (2, 2), (3, 2), (3, 3)])
    def test_at_least_p_r(self, r, d):
        rng = np.random.default_rng(10 * r + d)
        for _ in range(25):
            points = [random_point(rng, d) for _ in range(r)]
            estimate = estimate_hit_expectation(points, random_origin_halfspace(rng, (r - 1) * (d + 1)))
            assert p_r(r) <= estimate.value <= 1

    @pytest.mark.parametrize("r,d", [(3, 1), (4, 1), (4, 2)])
    def test_at_least_q(self, r, d):
        rng = np.random.default_rng(10 * r + d)
        for _ in range(25):
            points = [random_point(rng, d) for _ in range(r)]
            estimate = estimate_hit_expectation(points, random_origin_halfspace(rng, (r - 1) * (d + 1)))
            assert q(r, d) <= estimate.value <= 1

    @pytest.mark.parametrize("r,d", [(2, 1), (3, 1), (3, 2)])
    def test_certain_hit_iff_the_complement_cannot_split(self, r, d):
        rng = np.random.default_rng(99 + r + d)
        for _ in range(25):
            points = [random_point(rng, d) for _ in range(r)]
            H = random_origin_halfspace(rng, (r - 1) * (d + 1)).closure()
            family = pushdown_halfspace(H.complement(), r, d)
            value = estimate_hit_expectation(points, H).value
            assert (value == 1) == (not can_split(family, points))

    def test_monte_carlo_is_seeded_and_close(self):
        rng = np.random.default_rng(1)
        points = [random_point(rng, 2) for _ in range(3)]
        H = random_origin_halfspace(rng, 6)
        exact = estimate_hit_expectation(points, H).value
        first = estimate_hit_expectation(points, H, mode="monte_carlo", trials=3000, seed=2)
        assert first == estimate_hit_expectation(points, H, mode="monte_carlo", trials=3000, seed=2)
        assert not first.exact
        assert abs(float(first.value - exact)) < 0.05

    def test_needs_origin_half_space(self):
        with pytest.raises(GeometryError):
            estimate_hit_expectation([[0], [1]], HalfSpace.make([1, 0], 1))


def test_each_random_purpose_has_its_own_stream():
    for seed in range(5):
        draws = {stream: tuple(rng_stream(seed, stream).integers(0, 2 ** 32, size=4)) for stream in Stream}
        assert len(set(draws.values())) == len(Stream)
        hit = rng_stream(seed, Stream.HIT).integers(0, 2 ** 32, size=4)
        assert tuple(hit) != tuple(class_stream(seed, 0, 0).integers(0, 2 ** 32, size=4))
        assert tuple(rng_stream(seed, Stream.CHECK, 0).integers(0, 2 ** 32, size=4)) != draws[Stream.PERFECT_SPLIT]
