"""Tests for polar grids, closed-form solutions and quadrature."""

import math

import numpy as np
import pytest

from cornerlens.coefficients import trivial_coefficients
from cornerlens.errors import DomainError
from cornerlens.field import (
    ManufacturedProblem,
    PolarField,
    PolarGrid,
    SectorModes,
    StraightenedModes,
    ZonalModes,
    angular_rule,
    quad_annulus,
    quad_bulk,
    quad_sphere,
    ring_points,
    sample_closed_form,
)
from cornerlens.profiles import BoundaryProfile, ConeSection, PowerBump

OPENING = 2.0 * math.pi / 3.0


@pytest.fixture
def sector():
    return BoundaryProfile.sector(2.0 / 3.0)


@pytest.fixture
def grid(sector):
    return PolarGrid.build(sector, 1e-4, 1e-1, rings_per_decade=8, angular_nodes=65)


@pytest.fixture
def mode():
    return SectorModes(ConeSection.sector(2.0 / 3.0))


class TestAngularRule:
    @pytest.mark.parametrize("count", [2, 3, 4, 65, 128])
    def test_weights_sum_to_one(self, count):
        assert angular_rule(count).sum() == pytest.approx(1.0)

    def test_simpson_exact_for_cubics(self):
        s = np.linspace(0.0, 1.0, 9)
        assert np.dot(angular_rule(9), s**3) == pytest.approx(0.25, abs=1e-15)

    def test_needs_two_nodes(self):
        with pytest.raises(DomainError):
            angular_rule(1)


class TestPolarGrid:
    """Tests for PolarGrid."""

    def test_shape_and_range(self, grid):
        assert grid.shape == (25, 65)
        assert grid.radii[0] == pytest.approx(1e-4)
        assert grid.radii[-1] == pytest.approx(1e-1)
        np.testing.assert_allclose(grid.lower, math.pi / 6.0)

    def test_invalid_range(self, sector):
        with pytest.raises(DomainError):
            PolarGrid.build(sector, 1e-1, 1e-4)

    def test_ring_index(self, grid):
        assert grid.ring_index(float(grid.radii[3])) == 3
        assert grid.ring_index(1.5e-3) is None

    def test_radius_outside_grid(self, grid):
        with pytest.raises(DomainError, match="outside the grid range"):
            grid.ring_at(1.0)

    def test_rescaled(self, grid):
        scaled = grid.rescaled(1e-2)
        np.testing.assert_allclose(scaled.radii, grid.radii / 1e-2)
        assert scaled.scale == pytest.approx(1e-2)

    def test_restrict(self, grid):
        inner = grid.restrict(0, 9)
        assert inner.shape == (9, 65)
        assert inner.radii[-1] == pytest.approx(1e-3)

    def test_perturbed_caps_follow_the_boundary(self):
        profile = BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5))
        grid = PolarGrid.build(profile, 1e-4, 1e-2, rings_per_decade=4, angular_nodes=9, C0=0.5)
        deviation = np.abs(grid.lower - math.pi / 6.0)
        assert np.all(deviation > 0)
        assert np.all(np.diff(deviation) > 0)


class TestQuadrature:
    """Sphere and bulk quadrature on a sector."""

    def test_sector_area(self, grid):
        assert quad_bulk(np.ones(grid.shape), grid, 0.1) == pytest.approx(0.5 * OPENING * 0.01, rel=1e-12)

    def test_area_at_off_ring_radius(self, grid):
        assert quad_bulk(lambda p: np.ones(p.shape[:-1]), grid, 0.037) == pytest.approx(0.5 * OPENING * 0.037**2, rel=1e-10)

    def test_arc_length(self, grid):
        assert quad_sphere(np.ones(grid.shape), grid, 0.01) == pytest.approx(OPENING * 0.01, rel=1e-12)
        assert quad_sphere(lambda p: np.ones(p.shape[:-1]), grid, 0.0123) == pytest.approx(OPENING * 0.0123, rel=1e-12)

    def test_annulus(self, grid):
        r1, r2 = float(grid.radii[4]), float(grid.radii[12])
        expected = 0.5 * OPENING * (r2**2 - r1**2)
        assert quad_annulus(np.ones(grid.shape), grid, r1, r2) == pytest.approx(expected, rel=1e-12)
        assert quad_annulus(np.ones(grid.shape), grid, r1, r2, rule="trapezoid") == pytest.approx(expected, rel=5e-2)

    def test_monotone_interpolation_stays_in_range(self, grid):
        step = np.where(grid.radii[:, None] >= 0.01 * (1.0 - 1e-9), 1.0, 0.0) * np.ones(grid.shape)
        assert quad_sphere(step, grid, 0.0065, monotone=True) == 0.0
        across = quad_sphere(step, grid, 0.0087, monotone=True)
        assert 0.0 < across < OPENING * 0.0087

    def test_monotone_interpolation_of_a_power_law(self, grid):
        values = grid.radii[:, None] ** 2 * np.ones(grid.shape)
        assert quad_sphere(values, grid, 0.0123, monotone=True) == pytest.approx(OPENING * 0.0123**3, rel=5e-2)

    def test_hemisphere_cap(self):
        grid = PolarGrid.build(BoundaryProfile.cone(0.5 * math.pi), 1e-3, 1e-1, rings_per_decade=4, angular_nodes=129)
        assert quad_sphere(np.ones(grid.shape), grid, 0.1) == pytest.approx(2.0 * math.pi * 0.01, rel=1e-7)

    def test_integrand_shape_checked(self, grid):
        with pytest.raises(DomainError, match="shape"):
            quad_bulk(np.ones((3, 3)), grid, 0.1)


class TestClosedForms:
    """Closed-form solutions sampled on grids."""

    def test_mode_vanishes_on_the_boundary(self, grid, mode):
        field = sample_closed_form(mode, grid)
        np.testing.assert_allclose(field.values[:, [0, -1]], 0.0, atol=1e-15)
        assert mode.leading_exponent == pytest.approx(1.5)

    def test_radial_derivative(self, grid, mode):
        field = sample_closed_form(mode, grid)
        np.testing.assert_allclose(field.grad_r * grid.radii[:, None], 1.5 * field.values, atol=1e-14)

    def test_unit_angular_norm(self, grid, mode):
        field = sample_closed_form(mode, grid)
        norm = quad_sphere(field.values**2, grid, 0.1) / 0.1 ** (1 + 2 * 1.5)
        assert norm == pytest.approx(1.0, rel=1e-6)

    def test_off_ring_interpolation(self, sector, mode):
        grid = PolarGrid.build(sector, 1e-3, 1e-1, rings_per_decade=48, angular_nodes=9)
        field = sample_closed_form(mode, grid)
        r = 0.0123
        values, _, _ = field.at_radius(r)
        exact = mode.value(ring_points(2, r, grid.angles[0]))
        np.testing.assert_allclose(values, exact, atol=1e-5 * np.max(np.abs(exact)))

    def test_mode_is_harmonic(self, mode):
        problem = ManufacturedProblem(exact=mode, coefficients=trivial_coefficients(2))
        pts = ring_points(2, np.array([1e-3, 1e-2, 5e-2]), np.array([0.8, 1.5, 2.2]))
        assert np.max(problem.residual(pts, np.zeros(3))) < 1e-8

    def test_zonal_mode_is_harmonic(self):
        zonal = ZonalModes(((1, 1.0), (3, 0.5)))
        problem = ManufacturedProblem(exact=zonal, coefficients=trivial_coefficients(3))
        pts = ring_points(3, np.array([1e-3, 1e-2, 5e-2]), np.array([0.3, 0.9, 1.3]))
        assert np.max(problem.residual(pts, np.zeros(3))) < 1e-8

    def test_zonal_exponent_with_potential(self):
        assert ZonalModes(c=0.0).exponent(1) == pytest.approx(1.0)
        sigma = ZonalModes(c=0.5).exponent(1)
        assert sigma * (sigma + 1.0) == pytest.approx(1.5)

    def test_zonal_modes_need_odd_degree(self):
        with pytest.raises(DomainError, match="odd"):
            ZonalModes(((2, 1.0),))

    def test_points_outside_sector(self, mode):
        with pytest.raises(DomainError, match="outside the sector"):
            mode.check_domain(np.array([[1.0, -1.0]]))

    def test_dimension_mismatch(self, mode):
        grid = PolarGrid.build(BoundaryProfile.cone(0.5 * math.pi), 1e-3, 1e-1, rings_per_decade=4, angular_nodes=9)
        with pytest.raises(DomainError, match="Closed form"):
            sample_closed_form(mode, grid)

    def test_straightened_mode_vanishes_on_curved_boundary(self, mode):
        profile = BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5))
        grid = PolarGrid.build(profile, 1e-4, 1e-2, rings_per_decade=4, angular_nodes=17, C0=0.5)
        field = sample_closed_form(StraightenedModes(mode, profile, 0.5, 0.5), grid)
        scale = np.max(np.abs(field.values), axis=1)
        assert np.all(np.abs(field.values[:, 0]) <= 1e-9 * scale)
        assert np.all(np.abs(field.values[:, -1]) <= 1e-9 * scale)

    def test_field_shape_checked(self, grid):
        with pytest.raises(DomainError, match="shape"):
            PolarField(grid=grid, values=np.zeros((2, 2)), grad_r=np.zeros(grid.shape), grad_ang=np.zeros(grid.shape))
