"""Tests for the planar Dirichlet solver."""

import math

import numpy as np
import pytest

from cornerlens.coefficients import BundleField, CoefficientBundle, HatBundle, Nonlinearity
from cornerlens.errors import NumericalError, UnsupportedConfigurationError
from cornerlens.field import PolarGrid
from cornerlens.numerics import loglog_slope
from cornerlens.profiles import BoundaryProfile, PowerBump
from cornerlens.solver import pull_back_field, sector_coefficients, solve_linear_dirichlet

SECTOR = BoundaryProfile.sector(2.0 / 3.0)
OPENING = 2.0 * math.pi / 3.0


def first_mode(theta):
    return math.sqrt(2.0 / OPENING) * np.sin(1.5 * (theta - math.pi / 6.0))


@pytest.fixture(scope="module")
def solution():
    return solve_linear_dirichlet(
        CoefficientBundle(),
        SECTOR,
        first_mode,
        r_min=1e-2,
        r_max=1.0,
        rings_per_decade=12,
        angular_nodes=33,
        inner_decades=2,
    )


class TestDirichletSolver:
    """Tests for solve_linear_dirichlet on the Laplacian."""

    def test_grid_range(self, solution):
        assert solution.grid.radii[0] == pytest.approx(1e-2)
        assert solution.grid.radii[-1] == pytest.approx(1.0)
        assert solution.grid.shape == (25, 33)

    def test_boundary_data(self, solution):
        np.testing.assert_allclose(solution.values[-1], first_mode(solution.grid.angles[-1]), atol=1e-12)
        np.testing.assert_allclose(solution.values[:, 0], 0.0, atol=1e-12)
        np.testing.assert_allclose(solution.values[:, -1], 0.0, atol=1e-12)

    def test_homogeneous_decay(self, solution):
        norms = np.sqrt(np.sum(solution.values**2 * solution.grid.sphere_weights, axis=-1))
        fit = loglog_slope(solution.grid.radii, norms)
        assert fit.slope == pytest.approx(1.5, abs=1e-2)

    def test_profile_shape(self, solution):
        middle = solution.grid.shape[0] // 2
        ratio = solution.values[middle] / first_mode(solution.grid.angles[middle])
        inner = ratio[1:-1]
        np.testing.assert_allclose(inner, inner.mean(), rtol=1e-2)

    def test_closure_shift(self, solution):
        assert solution.closure_shift is not None
        assert solution.closure_shift < 1e-4

    def test_without_closure_check(self):
        field = solve_linear_dirichlet(
            CoefficientBundle(),
            SECTOR,
            first_mode,
            r_min=1e-1,
            rings_per_decade=8,
            angular_nodes=17,
            inner_decades=1,
            check_closure=False,
        )
        assert field.closure_shift is None

    def test_planar_only(self):
        with pytest.raises(UnsupportedConfigurationError, match="planar"):
            solve_linear_dirichlet(CoefficientBundle(), BoundaryProfile.cone(0.5 * math.pi), first_mode)

    def test_linear_only(self):
        bundle = CoefficientBundle(f=Nonlinearity(c=1.0, p=3.0))
        with pytest.raises(UnsupportedConfigurationError, match="linear"):
            solve_linear_dirichlet(bundle, SECTOR, first_mode)


class TestSectorCoefficients:
    """Tests for the coefficients pushed to the tangent sector."""

    def test_straight_sector_keeps_bundle(self):
        assert isinstance(sector_coefficients(CoefficientBundle(), SECTOR, 0.0, 0.5), BundleField)

    def test_perturbed_sector_pushes_forward(self):
        profile = BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5))
        assert isinstance(sector_coefficients(CoefficientBundle(), profile, 0.5, 0.5), HatBundle)


class TestPullBack:
    """Tests for pull_back_field."""

    def test_identity_on_straight_grid(self, solution):
        back = pull_back_field(solution, solution.grid)
        np.testing.assert_allclose(back.values, solution.values, atol=1e-12)
        assert back.closure_shift == solution.closure_shift

    def test_rings_must_match(self, solution):
        other = PolarGrid.build(SECTOR, 1e-3, 1.0, rings_per_decade=12, angular_nodes=33)
        with pytest.raises(NumericalError, match="identical rings"):
            pull_back_field(solution, other)
