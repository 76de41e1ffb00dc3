"""Tests for coefficient bundles and their pullbacks."""

import math

import numpy as np
import pytest

from cornerlens.coefficients import (
    AngularPotential,
    BundleField,
    CoefficientBundle,
    DriftSpec,
    MatrixSpec,
    Nonlinearity,
    PotentialSpec,
    beta_field,
    hat_bundle,
    matrix_field,
    mu_field,
    order_audit,
    ray_points,
    transform_bundle,
    trivial_coefficients,
)
from cornerlens.errors import DomainError
from cornerlens.profiles import BoundaryProfile


class TestBundle:
    """Tests for CoefficientBundle and its closed forms."""

    def test_default_is_trivial(self):
        assert CoefficientBundle().is_trivial
        assert not CoefficientBundle(b=DriftSpec(amp=1.0)).is_trivial

    def test_potential_rejected_in_plane(self):
        bundle = CoefficientBundle(V=AngularPotential(kind="constant", c=0.5))
        with pytest.raises(DomainError, match="V = 0"):
            bundle.check_dimension(2)
        bundle.check_dimension(3)

    def test_supercritical_exponent(self):
        with pytest.raises(DomainError, match="Sobolev"):
            CoefficientBundle(f=Nonlinearity(c=1.0, p=7.0)).check_dimension(3)

    def test_linear_matrix_is_symmetric(self):
        pts = np.array([[0.02, 0.03], [-0.01, 0.05]])
        a = matrix_field(MatrixSpec(kind="linear", amp=0.5), pts)
        np.testing.assert_allclose(a, np.swapaxes(a, -1, -2))
        assert a[0, 0, 1] == pytest.approx(0.5 * 0.02)
        assert a[0, 0, 0] == pytest.approx(1.0 + 0.5 * 0.03)

    def test_ellipticity(self):
        bundle = CoefficientBundle(A=MatrixSpec(kind="linear", amp=0.5))
        assert bundle.min_ellipticity(2, 0.1, samples=500, seed=1) > 0.9
        assert CoefficientBundle().min_ellipticity(3, 0.1) == pytest.approx(1.0)

    def test_nonlinearity_primitive(self):
        f = Nonlinearity(c=2.0, p=4.0)
        s = np.array([-0.5, 0.3])
        h = 1e-6
        np.testing.assert_allclose((f.primitive(s + h) - f.primitive(s - h)) / (2 * h), f.value(s), rtol=1e-8)

    def test_cosine_potential(self):
        v = AngularPotential(kind="cosine", c=2.0)
        assert v.on_sphere(np.array([[0.0, 3.0, 4.0]]))[0] == pytest.approx(1.6)
        assert v.of_colatitude(0.0) == pytest.approx(2.0)


class TestBundleField:
    """The raw bundle evaluated at points."""

    def test_drift_and_potential(self):
        bundle = CoefficientBundle(b=DriftSpec(amp=1.0, order=-0.5), h=PotentialSpec(amp=2.0, order=-1.5))
        values = BundleField(bundle, 2).evaluate(np.array([[0.0, 0.04]]))
        np.testing.assert_allclose(values.drift[0], np.full(2, 0.04**-0.5 / math.sqrt(2.0)))
        assert values.potential[0] == pytest.approx(2.0 * 0.04**-1.5)
        assert values.f_scale[0] == 1.0

    def test_vertex_is_singular(self):
        with pytest.raises(DomainError, match="vertex"):
            trivial_coefficients(2).evaluate(np.zeros((1, 2)))

    def test_mu_of_laplacian(self):
        pts = np.array([[0.1, 0.2], [0.3, 0.05]])
        np.testing.assert_allclose(mu_field(trivial_coefficients(2), pts), 1.0)

    def test_beta_of_laplacian(self):
        beta = beta_field(trivial_coefficients(3), np.array([[0.01, 0.02, 0.03]]))
        np.testing.assert_allclose(beta.value[0], [0.01, 0.02, 0.03])
        assert beta.divergence[0] == pytest.approx(3.0, abs=1e-8)


class TestTransformedBundle:
    """Pullback by Ψ and pushforward to the tangent cone."""

    def test_without_defect_nothing_changes(self):
        pts = np.array([[0.01, 0.02]])
        tilde = transform_bundle(CoefficientBundle(), 2, 0.0, 0.5)
        np.testing.assert_allclose(tilde.matrix(pts)[0], np.eye(2))

    def test_pullback_matrix_symmetric_with_det_scale(self):
        tilde = transform_bundle(CoefficientBundle(f=Nonlinearity(c=1.0)), 2, 0.5, 0.5)
        pts = np.array([[0.01, 0.02], [-0.02, 0.03]])
        values = tilde.evaluate(pts)
        np.testing.assert_allclose(values.matrix, np.swapaxes(values.matrix, -1, -2), atol=1e-15)
        assert np.all(values.f_scale > 1.0)

    def test_mu_tends_to_one(self):
        tilde = transform_bundle(CoefficientBundle(), 2, 0.5, 0.5)
        pts = ray_points([0.0, 1.0], np.geomspace(1e-6, 1e-2, 12))
        report = order_audit(lambda y: mu_field(tilde, y) - 1.0, 0.5, pts)
        assert report.passed
        assert report.slope == pytest.approx(0.5, abs=0.05)

    def test_invalid_parameters(self):
        with pytest.raises(DomainError):
            transform_bundle(CoefficientBundle(), 2, -0.5, 0.5)

    def test_hat_on_straight_cone_is_identity(self):
        tilde = transform_bundle(CoefficientBundle(), 2, 0.0, 0.5)
        hat = hat_bundle(tilde, BoundaryProfile.sector(2.0 / 3.0))
        pts = np.array([[0.0, 0.01], [0.005, 0.02]])
        np.testing.assert_allclose(hat.matrix(pts), np.broadcast_to(np.eye(2), (2, 2, 2)), atol=1e-14)

    def test_hat_dimension_mismatch(self):
        tilde = transform_bundle(CoefficientBundle(), 2, 0.5, 0.5)
        with pytest.raises(DomainError, match="dimension"):
            hat_bundle(tilde, BoundaryProfile.cone(0.5 * math.pi))

    def test_order_audit_needs_radii(self):
        with pytest.raises(DomainError, match="8 distinct"):
            order_audit(lambda y: y[:, 0], 1.0, ray_points([1.0, 0.0], np.geomspace(1e-3, 1e-1, 4)))

    def test_order_audit_of_matrix_field(self):
        pts = ray_points([0.6, 0.8], np.geomspace(1e-4, 1e-1, 10))
        report = order_audit(lambda y: np.linalg.norm(y, axis=-1)[:, None, None] * np.ones((1, 2, 2)), 1.0, pts)
        assert report.slope == pytest.approx(1.0, abs=1e-10)
        assert report.passed
