import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from framescale import majorizes, transport_distance, wasserstein_prefix

from helpers import random_majorizing_pair

finite_seq = arrays(np.float64, st.integers(1, 8), elements=st.floats(-50, 50))


class TestMajorizes:
    def test_prefix_domination(self):
        assert majorizes([3, 2, 1], [2, 2, 2])

    def test_reflexive(self):
        x = [1.5, -2.0, 0.25]
        assert majorizes(x, x)

    def test_first_prefix_too_small(self):
        assert not majorizes([1, 2, 3], [2, 2, 2])

    def test_unequal_totals(self):
        assert not majorizes([2, 2], [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            majorizes([1, 2], [1, 2, 3])

    def test_tolerance_scales_with_mass(self):
        x = np.array([1e8, 0.0])
        y = x + np.array([-1e-4, 1e-4])
        # absolute gap 1e-4 is within 1e-10 * (1 + |x|_1)
        assert majorizes(x, y)


class TestTransportDistance:
    def test_identical(self):
        assert transport_distance([1, 2, 3], [1, 2, 3]) == 0.0

    def test_weighted_formula(self):
        # 1*(2-3) + 2*(2-2) + 3*(2-1)
        assert transport_distance([3, 2, 1], [2, 2, 2]) == pytest.approx(2.0)

    def test_matches_prefix_gap_form(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x, y = random_majorizing_pair(rng, int(rng.integers(2, 9)))
            gaps = float(np.sum(np.cumsum(x) - np.cumsum(y)))
            assert transport_distance(x, y) == pytest.approx(gaps, abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            transport_distance([1], [1, 2])

    @given(x=finite_seq)
    @settings(max_examples=50, deadline=None)
    def test_antisymmetric(self, x):
        y = x[::-1].copy()
        assert transport_distance(x, y) == pytest.approx(-transport_distance(y, x), abs=1e-9)


class TestWassersteinPrefix:
    def test_identical(self):
        assert wasserstein_prefix([5, 5], [5, 5]) == 0.0

    def test_absolute_gaps(self):
        assert wasserstein_prefix([3, 2, 1], [2, 2, 2]) == pytest.approx(2.0)

    def test_swap_pair(self):
        assert wasserstein_prefix([0, 1], [1, 0]) == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            wasserstein_prefix([1, 2, 3], [1])


class TestMajorizingPairIdentities:
    """Random x majorizing y, built from rightward mass moves."""

    def test_transport_equals_wasserstein(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            x, y = random_majorizing_pair(rng, int(rng.integers(2, 11)))
            assert majorizes(x, y)
            t = transport_distance(x, y)
            w = wasserstein_prefix(x, y)
            assert t == pytest.approx(w, abs=1e-10 * (1 + abs(t)))

    def test_l1_below_twice_transport(self):
        # one unit of mass moved one index fixes two coordinate gaps, so
        # the transport cost bounds the l1 gap with a factor 2, and the
        # factor is achieved by adjacent moves.
        rng = np.random.default_rng(2)
        for _ in range(500):
            x, y = random_majorizing_pair(rng, int(rng.integers(2, 11)))
            assert np.abs(x - y).sum() <= 2.0 * transport_distance(x, y) + 1e-10

    def test_factor_two_is_tight(self):
        x = np.array([1.0, 0.0])
        y = np.array([0.0, 1.0])
        assert majorizes(x, y)
        assert transport_distance(x, y) == pytest.approx(1.0)
        assert np.abs(x - y).sum() == pytest.approx(2.0 * transport_distance(x, y))

    def test_linearity_over_families(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            d = int(rng.integers(2, 9))
            pairs = [random_majorizing_pair(rng, d) for _ in range(int(rng.integers(2, 6)))]
            each = sum(transport_distance(x, y) for x, y in pairs)
            summed = transport_distance(
                np.sum([x for x, _ in pairs], axis=0), np.sum([y for _, y in pairs], axis=0)
            )
            assert each == pytest.approx(summed, abs=1e-10 * (1 + abs(each)))


class TestScaledSquareMajorization:
    """Entrywise squares of a vector and of its rescaled, renormalized image."""

    @staticmethod
    def scaled_pair(rng: np.random.Generator, d: int) -> tuple[np.ndarray, np.ndarray]:
        u = rng.standard_normal(d)
        while np.linalg.norm(u) < 1e-6:
            u = rng.standard_normal(d)
        lam = np.sort(np.abs(rng.standard_normal(d)))[::-1]
        scaled = lam * u
        if np.linalg.norm(scaled) == 0.0:
            return TestScaledSquareMajorization.scaled_pair(rng, d)
        image = np.linalg.norm(u) * scaled / np.linalg.norm(scaled)
        return u**2, image**2

    def test_image_majorizes_original(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            x, y = self.scaled_pair(rng, int(rng.integers(1, 11)))
            assert majorizes(y, x)

    def test_unsorted_scaling_can_break_it(self):
        u = np.array([1.0, 1.0])
        lam = np.array([1.0, 2.0])  # increasing, not sorted down
        image = np.linalg.norm(u) * (lam * u) / np.linalg.norm(lam * u)
        assert not majorizes(image**2, u**2)
