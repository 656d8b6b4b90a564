import numpy as np
import pytest

from src.errors import PhaseInputError
from src.sampling import BoxDomain, CounterSampler, direction_set


class TestBoxDomain:
    """Test cases for analysis boxes."""

    def test_unit_box(self):
        """Test [-1, 1]^n and its volume."""
        box = BoxDomain.unit(3)

        assert box.dimension == 3
        assert box.volume == pytest.approx(8.0)

    @pytest.mark.parametrize("interval", [(1.0, 1.0), (2.0, -1.0), (0.0, float("inf"))])
    def test_invalid_interval(self, interval):
        """Test that empty, reversed or infinite intervals are rejected."""
        with pytest.raises(PhaseInputError):
            BoxDomain((interval,))

    def test_from_config_broadcast(self):
        """Test that a single interval is broadcast to every axis."""
        box = BoxDomain.from_config([[-0.5, 0.5]], 2)

        assert box.intervals == ((-0.5, 0.5), (-0.5, 0.5))

    def test_from_config_mismatch(self):
        """Test that the interval count must match the dimension."""
        with pytest.raises(PhaseInputError):
            BoxDomain.from_config([[-1, 1], [-1, 1]], 3)

    def test_volume_off_axes(self):
        """Test the volume left after removing the axis tube."""
        assert BoxDomain.unit(1).volume_off_axes(0.1) == pytest.approx(1.8)
        assert BoxDomain.unit(2).volume_off_axes(0.1) == pytest.approx(3.24)
        assert BoxDomain(((0.5, 1.0),)).volume_off_axes(0.1) == pytest.approx(0.5)


class TestCounterSampler:
    """Test cases for the counter-based sampler."""

    def test_points_inside_box(self):
        """Test that every point lies in the box."""
        box = BoxDomain(((-1.0, 2.0), (0.5, 0.75)))

        points = CounterSampler(7, block_size=1000).uniform(box, 5000)

        assert points.shape == (5000, 2)
        assert np.all(box.contains(points))

    def test_seed_determinism(self):
        """Test bit-identical points for the same seed and distinct points otherwise."""
        box = BoxDomain.unit(2)

        first = CounterSampler(42, 1000).uniform(box, 3000)
        second = CounterSampler(42, 1000).uniform(box, 3000)
        other = CounterSampler(43, 1000).uniform(box, 3000)

        assert np.array_equal(first, second)
        assert not np.array_equal(first, other)

    def test_prefix_stability(self):
        """Test that point i does not depend on the total number of samples."""
        box = BoxDomain.unit(2)
        sampler = CounterSampler(5, 1000)

        long = sampler.uniform(box, 2500)
        short = sampler.uniform(box, 1200)

        assert np.array_equal(long[:1200], short)

    def test_negative_seed(self):
        """Test that seeds must be nonnegative."""
        with pytest.raises(PhaseInputError):
            CounterSampler(-1)


class TestDirectionSet:
    """Test cases for deterministic linear-coefficient directions."""

    def test_starts_with_zero_and_axes(self):
        """Test the leading b = 0 and signed unit axes."""
        directions = direction_set(2, 5)

        assert np.array_equal(directions[0], [0.0, 0.0])
        assert np.array_equal(directions[1], [1.0, 0.0])
        assert np.array_equal(directions[2], [-1.0, 0.0])
        assert np.array_equal(directions[4], [0.0, -1.0])

    def test_inside_unit_ball(self):
        """Test |b| <= 1 and the requested count."""
        directions = direction_set(3, 40)

        assert directions.shape == (40, 3)
        assert np.all(np.linalg.norm(directions, axis=1) <= 1.0 + 1e-12)
        assert len({tuple(b) for b in directions}) == 40

    def test_deterministic(self):
        """Test that the set does not depend on anything but its arguments."""
        assert np.array_equal(direction_set(2, 17), direction_set(2, 17))

    def test_count_must_be_positive(self):
        """Test that an empty direction set is rejected."""
        with pytest.raises(PhaseInputError):
            direction_set(2, 0)
