"""Tests for boundary profiles and cone sections."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from cornerlens.errors import DomainError, GeometryError
from cornerlens.profiles import BoundaryProfile, ConeSection, LogCurve, PowerBump, sector_slopes


class TestConeSection:
    """Tests for ConeSection."""

    def test_sector(self):
        section = ConeSection.sector(2.0 / 3.0)
        assert section.lower == pytest.approx(math.pi / 6.0)
        assert section.upper == pytest.approx(5.0 * math.pi / 6.0)
        assert section.opening == pytest.approx(2.0 * math.pi / 3.0)

    def test_hemisphere(self):
        section = ConeSection.hemisphere()
        assert (section.lower, section.upper) == (0.0, pytest.approx(0.5 * math.pi))

    def test_empty_cap(self):
        with pytest.raises(GeometryError, match="Empty cap"):
            ConeSection(dim=2, lower=1.0, upper=1.0)

    def test_unsupported_dimension(self):
        with pytest.raises(DomainError):
            ConeSection(dim=4, lower=0.0, upper=1.0)

    def test_axisymmetric_cap_starts_at_pole(self):
        with pytest.raises(GeometryError):
            ConeSection(dim=3, lower=0.1, upper=1.0)


class TestBoundaryProfile:
    """Tests for BoundaryProfile."""

    def test_sector_section(self):
        profile = BoundaryProfile.sector(2.0 / 3.0)
        section = profile.section()
        assert section.lower == pytest.approx(math.pi / 6.0)
        assert section.upper == pytest.approx(5.0 * math.pi / 6.0)
        assert profile.is_straight

    def test_cone_section(self):
        assert BoundaryProfile.cone(0.25 * math.pi).section().upper == pytest.approx(0.25 * math.pi)

    def test_half_plane_slopes(self):
        assert sector_slopes(1.0) == [pytest.approx(0.0), pytest.approx(0.0)]

    def test_slope_count_checked(self):
        with pytest.raises(ValidationError, match="slope"):
            BoundaryProfile(dim=3, g=[0.0, 0.0])

    def test_power_bump_values(self):
        profile = BoundaryProfile.sector(1.0, perturbation=PowerBump(a=0.5, delta=0.5))
        x = np.array([[0.04], [-0.09]])
        np.testing.assert_allclose(profile.phi(x), 0.5 * np.abs(x[:, 0]) ** 1.5)
        np.testing.assert_allclose(profile.grad_phi(x)[:, 0], 0.75 * np.sqrt(np.abs(x[:, 0])) * np.sign(x[:, 0]))
        assert profile.delta == 0.5

    def test_power_bump_defect(self):
        profile = BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5))
        t = np.array([0.01, -0.02])
        np.testing.assert_allclose(profile.defect_line(t), profile.phi_line(t) - t * profile.dphi_line(t), rtol=1e-12)

    def test_point_outside_radius(self):
        with pytest.raises(DomainError, match="validity radius"):
            BoundaryProfile.sector(0.5).phi(np.array([[2.0]]))

    def test_cone_gradient_is_radial(self):
        profile = BoundaryProfile.cone(0.25 * math.pi)
        grad = profile.grad_phi0(np.array([[0.3, 0.4]]))
        np.testing.assert_allclose(grad[0], [0.6, 0.8])


class TestLogCurve:
    """The logarithmic boundary curve."""

    def test_window_checked(self):
        with pytest.raises(ValidationError, match="sigma"):
            LogCurve(alpha=0.5, sigma=1.0)

    def test_branch(self):
        assert LogCurve(alpha=0.5, sigma=0.3).branch == "alpha_lt_1"
        assert LogCurve(alpha=1.5, sigma=0.3).branch == "alpha_ge_1"

    def test_graph(self):
        LogCurve(alpha=0.5, sigma=0.3).validate_graph()

    def test_inverse_parametrization(self):
        curve = LogCurve(alpha=0.5, sigma=0.3)
        eps = np.array([1e-3, 1e-2, 0.1])
        np.testing.assert_allclose(curve.eps_at_x(np.exp(curve.log_x(eps))), eps, rtol=1e-9)

    def test_profile_slopes_must_match(self):
        with pytest.raises(ValidationError, match="slope"):
            BoundaryProfile(dim=2, g=[0.0, 0.0], perturbation=LogCurve(alpha=0.5, sigma=0.3), radius=1e-3)
