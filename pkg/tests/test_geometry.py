"""Tests for the convexifying and straightening maps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerlens.errors import DomainError, GeometryError
from cornerlens.geometry import (
    cap_endpoints,
    corner_defect,
    eval_phi0,
    grad_tilde_phi,
    normal_and_transversality,
    polar_angle,
    psi_map,
    straighten,
    straighten_map,
    straightening_radius,
    tilde_phi,
    unstraighten,
    validate_c0,
)
from cornerlens.numerics import central_jacobian
from cornerlens.profiles import BoundaryProfile, PowerBump

C0, DELTA = 0.5, 0.5


@pytest.fixture
def bump():
    """Sector of opening 2π/3 with a power bump of order 3/2."""
    return BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5))


def cone_points(radius, angles):
    return np.stack([radius * np.cos(angles), radius * np.sin(angles)], axis=-1)


class TestEvalPhi0:
    """Tests for the tangent-cone profile."""

    def test_planar_abscissas(self, bump):
        values = eval_phi0(bump, [-0.3, 0.0, 0.4])
        np.testing.assert_allclose(values, np.array([0.3, 0.0, 0.4]) / math.sqrt(3.0), rtol=1e-12)

    def test_axisymmetric(self):
        cone = BoundaryProfile.cone(math.pi / 3)
        assert float(eval_phi0(cone, [0.3, 0.4])) == pytest.approx(0.5 * math.tan(math.pi / 6), rel=1e-12)

    def test_outside_radius(self, bump):
        with pytest.raises(DomainError, match="validity radius"):
            eval_phi0(bump, 1.5)


class TestPsiMap:
    """Tests for the convexifying map Ψ."""

    def test_value_and_determinant(self):
        y = np.array([[0.03, 0.04]])
        out = psi_map(C0, DELTA, y)
        np.testing.assert_allclose(out.value[0], [0.03, 0.04 + 2.0 * C0 * 0.05**1.5])
        np.testing.assert_allclose(out.det, np.linalg.det(out.jacobian))

    def test_jacobian_matches_differences(self):
        y = np.array([[0.02, 0.05], [-0.01, 0.03]])
        numeric = central_jacobian(lambda p: psi_map(C0, DELTA, p).value, y, np.full(2, 1e-5))
        np.testing.assert_allclose(psi_map(C0, DELTA, y).jacobian, numeric, atol=1e-8)

    def test_identity_without_defect(self):
        y = np.array([[0.3, -0.1, 0.2]])
        np.testing.assert_array_equal(psi_map(0.0, DELTA, y).value, y)

    def test_vertex_fixed(self):
        out = psi_map(C0, DELTA, np.zeros((1, 2)))
        np.testing.assert_array_equal(out.value, np.zeros((1, 2)))
        assert out.det[0] == 1.0

    def test_parameters_checked(self):
        with pytest.raises(DomainError):
            psi_map(-1.0, DELTA, np.zeros((1, 2)))
        with pytest.raises(DomainError):
            psi_map(C0, 0.0, np.zeros((1, 2)))


class TestDefect:
    """Corner defect and the C0 bound."""

    def test_analytic_matches_differences(self, bump):
        x = np.array([[0.01], [-0.03]])
        np.testing.assert_allclose(corner_defect(bump, x), corner_defect(bump, x, analytic=False), rtol=1e-6)

    def test_vertex_rejected(self, bump):
        with pytest.raises(DomainError, match="vertex"):
            corner_defect(bump, np.array([[0.0]]))

    def test_validate_c0_reports_worst_ratio(self, bump):
        # |φ − ∇φ·x'| = aδ|x'|^{1+δ}
        assert validate_c0(bump, C0, DELTA) == pytest.approx(0.25, rel=1e-9)

    def test_validate_c0_rejects_small_constant(self, bump):
        with pytest.raises(GeometryError, match="exceeds C0"):
            validate_c0(bump, 0.1, DELTA)


class TestStraightening:
    """Ξ and its inverse."""

    def test_convexified_profile_equation(self, bump):
        t = np.array([0.01, -0.02, 0.05])
        s = tilde_phi(bump, C0, DELTA, t[:, None])
        np.testing.assert_allclose(s + 2.0 * C0 * (t**2 + s**2) ** 0.75, bump.phi_line(t), atol=1e-15)

    def test_identity_on_straight_cone(self):
        profile = BoundaryProfile.sector(2.0 / 3.0)
        x = cone_points(0.1, np.array([0.6, 1.5, 2.5]))
        np.testing.assert_allclose(straighten(profile, 0.0, DELTA, x), x, atol=1e-15)
        np.testing.assert_allclose(unstraighten(profile, 0.0, DELTA, x), x, atol=1e-15)

    def test_boundary_goes_to_cone_boundary(self, bump):
        t = np.array([0.01, -0.01])
        s = tilde_phi(bump, C0, DELTA, t[:, None])
        image = straighten(bump, C0, DELTA, np.stack([t, s], axis=-1))
        np.testing.assert_allclose(polar_angle(image), [math.pi / 6.0, 5.0 * math.pi / 6.0], atol=1e-9)

    @given(
        st.floats(min_value=1e-6, max_value=1e-2),
        st.floats(min_value=0.02, max_value=0.98),
    )
    @settings(max_examples=40, deadline=None)
    def test_round_trip_preserves_radius(self, radius, fraction):
        bump = BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5))
        angle = math.pi / 6.0 + fraction * 2.0 * math.pi / 3.0
        x = cone_points(radius, np.array([angle]))
        y = unstraighten(bump, C0, DELTA, x)
        assert np.linalg.norm(y) == pytest.approx(radius, rel=1e-12)
        np.testing.assert_allclose(straighten(bump, C0, DELTA, y), x, atol=1e-12 * radius)

    def test_points_outside_rejected(self, bump):
        with pytest.raises(DomainError, match="outside"):
            straighten(bump, C0, DELTA, np.array([[0.01, -0.01]]))

    def test_jacobian_matches_differences(self, bump):
        y = unstraighten(bump, C0, DELTA, cone_points(0.01, np.array([1.0, 2.0])))
        numeric = central_jacobian(lambda p: straighten(bump, C0, DELTA, p, strict=False), y, np.full(2, 1e-7))
        np.testing.assert_allclose(straighten_map(bump, C0, DELTA, y).jacobian, numeric, atol=1e-6)

    def test_cap_endpoints_follow_boundary(self, bump):
        r = np.array([1e-4, 1e-2])
        lo, hi = cap_endpoints(bump, C0, DELTA, r)
        s = tilde_phi(bump, C0, DELTA, (r * np.cos(lo))[:, None])
        np.testing.assert_allclose(r * np.sin(lo), s, atol=1e-14)
        assert np.all(hi > lo)

    def test_straightening_radius(self, bump):
        radius = straightening_radius(bump, C0, DELTA)
        assert 0.0 < radius <= 0.25

    def test_exterior_normal(self, bump):
        t = np.array([0.01, -0.01])
        s = tilde_phi(bump, C0, DELTA, t[:, None])
        normal, scalar = normal_and_transversality(bump, C0, DELTA, np.stack([t, s], axis=-1))
        slopes = grad_tilde_phi(bump, C0, DELTA, t[:, None])[:, 0]
        np.testing.assert_allclose(np.linalg.norm(normal, axis=-1), 1.0)
        np.testing.assert_allclose(normal[:, 0] + slopes * normal[:, 1], 0.0, atol=1e-14)
        assert np.all(normal[:, 1] < 0)
        assert np.all(np.isfinite(scalar))
