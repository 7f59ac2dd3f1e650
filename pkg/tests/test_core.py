"""
Unit tests for the shared domain types and numeric primitives.
"""

import math

import numpy as np
import pytest

from ramsey_echo.core.core import (
    Direction,
    NoiseModel,
    ParameterGrid,
    ProtocolPoint,
    canonical_sign,
    canonical_vector_in_span,
    make_grid,
    stable_cos_pow,
)


class TestNoiseModel:
    """Test cases for dephasing strengths."""

    def test_default_is_noiseless(self):
        assert NoiseModel().is_noiseless
        assert not NoiseModel(collective=0.1).is_noiseless

    @pytest.mark.parametrize("kwargs", [{"collective": -0.1}, {"individual": -1.0}, {"collective": math.inf}])
    def test_rejects_invalid_strengths(self, kwargs):
        with pytest.raises(ValueError, match="must be finite and >= 0"):
            NoiseModel(**kwargs)


class TestProtocolPoint:
    """Test cases for protocol points."""

    def test_spin_is_half_the_particle_number(self):
        assert ProtocolPoint(7, 0.1, 0.2).spin == 3.5

    def test_rejects_zero_particles(self):
        with pytest.raises(ValueError, match="Particle number"):
            ProtocolPoint(0, 0.0, 0.0)

    def test_rejects_non_finite_angles(self):
        with pytest.raises(ValueError, match="finite"):
            ProtocolPoint(4, math.nan, 0.0)

    def test_angles_are_not_range_restricted(self):
        point = ProtocolPoint(4, 7.5, -12.0)
        assert point.mu == 7.5


class TestDirection:
    """Test cases for unit directions."""

    def test_from_vector_normalizes(self):
        direction = Direction.from_vector([3.0, 4.0, 0.0])
        assert direction.components == pytest.approx((0.6, 0.8, 0.0), abs=1e-15)

    def test_zero_vector_is_rejected(self):
        with pytest.raises(ValueError, match="zero vector"):
            Direction.from_vector([0.0, 0.0, 0.0])

    def test_non_unit_components_are_rejected(self):
        with pytest.raises(ValueError, match="unit norm"):
            Direction((1.0, 1.0, 0.0))

    def test_named_axes(self):
        assert Direction.axis("y").components == (0.0, 1.0, 0.0)
        assert Direction.axis("-y").components == (0.0, -1.0, 0.0)
        with pytest.raises(ValueError, match="Unknown axis"):
            Direction.axis("w")


class TestParameterGrid:
    """Test cases for parameter grids."""

    def test_values_must_increase(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            ParameterGrid((0.0, 0.0), (0.0, 1.0))

    def test_values_must_not_be_empty(self):
        with pytest.raises(ValueError, match="must not be empty"):
            ParameterGrid((), (0.0,))

    def test_shape_and_arrays(self):
        grid = ParameterGrid.from_arrays([0.0, 1.0, 2.0], [-1.0, 1.0])
        assert grid.shape == (3, 2)
        np.testing.assert_array_equal(grid.nu_array, [-1.0, 1.0])


class TestStableCosPow:
    """Test cases for the underflow-safe power."""

    def test_exact_powers(self):
        assert stable_cos_pow(0.5, 2) == pytest.approx(0.25, rel=1e-15)
        assert stable_cos_pow(-1.0, 3) == -1.0
        assert stable_cos_pow(-0.5, 2) == pytest.approx(0.25, rel=1e-15)

    def test_zero_base(self):
        assert stable_cos_pow(0.0, 0) == 1.0
        assert stable_cos_pow(0.0, 5) == 0.0

    def test_large_exponent_matches_direct_power(self):
        c = math.cos(0.7)
        assert stable_cos_pow(c, 1022) == pytest.approx(math.pow(c, 1022), rel=1e-12)

    def test_agrees_with_direct_power_over_the_domain(self):
        for c in (-0.999, -0.5, -1e-3, 1e-3, 0.1, 0.7, 0.9999):
            for k in (0, 1, 2, 31, 512, 1022, 4096):
                expected = math.pow(c, k)
                if abs(expected) < 1e-290:
                    assert abs(stable_cos_pow(c, k)) < 1e-280
                    continue
                assert stable_cos_pow(c, k) == pytest.approx(expected, rel=1e-12)

    def test_broadcasts_arrays(self):
        result = stable_cos_pow(np.array([[0.5], [-0.5]]), np.array([1, 2, 3]))
        np.testing.assert_allclose(result, [[0.5, 0.25, 0.125], [-0.5, 0.25, -0.125]], rtol=1e-15)


class TestMakeGrid:
    """Test cases for uniform grids."""

    def test_small_grid(self):
        grid = make_grid(0, math.pi, 3, -math.pi, math.pi, 3)
        np.testing.assert_allclose(grid.mu_array, [0, math.pi / 2, math.pi])
        np.testing.assert_allclose(grid.nu_array, [-math.pi, 0, math.pi])

    def test_default_landscape_grid(self):
        grid = make_grid(0, math.pi, 257, -math.pi, math.pi, 513)
        assert grid.shape == (257, 513)
        assert grid.mu_values[1] - grid.mu_values[0] == pytest.approx(math.pi / 256)
        assert grid.nu_values[1] - grid.nu_values[0] == pytest.approx(math.pi / 256)

    def test_degenerate_range_is_rejected(self):
        with pytest.raises(ValueError, match="max > min"):
            make_grid(0, math.pi, 2, 0, 0, 2)

    def test_small_counts_are_rejected(self):
        with pytest.raises(ValueError, match=">= 2"):
            make_grid(0, 1, 1, 0, 1, 2)

    def test_non_finite_bounds_are_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            make_grid(0, math.inf, 3, 0, 1, 3)


class TestCanonicalChoices:
    """Test cases for deterministic sign and subspace choices."""

    def test_largest_component_becomes_positive(self):
        assert canonical_sign(np.array([0.1, -0.9, 0.2])) == -1.0
        assert canonical_sign(np.array([0.9, 0.1, 0.0])) == 1.0

    def test_ties_prefer_z(self):
        assert canonical_sign(np.array([0.6, 0.0, -0.6])) == -1.0

    def test_vector_in_span_prefers_z_then_y(self):
        xy_plane = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_allclose(canonical_vector_in_span(xy_plane), [0.0, 1.0, 0.0])

        x_line = np.array([[1.0], [0.0], [0.0]])
        np.testing.assert_allclose(canonical_vector_in_span(x_line), [1.0, 0.0, 0.0])

        yz_plane = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_allclose(canonical_vector_in_span(yz_plane), [0.0, 0.0, 1.0])
