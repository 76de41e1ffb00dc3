"""Tests for the logarithmic corner counterexample."""

import math

import numpy as np
import pytest

from cornerlens.coefficients import trivial_coefficients
from cornerlens.errors import DomainError, GeometryError
from cornerlens.field import ManufacturedProblem
from cornerlens.logexample import (
    LogCorner,
    LogHarmonic,
    build_boundary,
    defect_constant,
    im_zm_log_z,
    rho1,
    tangent_relation_residual,
    u_log,
    u_log_gradient,
)


@pytest.fixture
def corner():
    return LogCorner(alpha=0.5, sigma=0.3)


class TestLogHarmonic:
    """Tests for the logarithmic harmonic and its zero set."""

    def test_axis_radius(self):
        assert float(rho1(np.array([0.5 * math.pi]), 0.5)[0]) == pytest.approx(math.exp(-0.25), rel=1e-12)

    def test_axis_radius_is_continuous(self):
        near = rho1(np.array([0.5 * math.pi + 1e-6]), 0.5)[0]
        assert near == pytest.approx(math.exp(-0.25), rel=1e-9)

    def test_pole(self):
        with pytest.raises(DomainError, match="pole"):
            rho1(np.array([0.75 * math.pi]), 0.5)

    def test_vanishes_on_zero_set(self):
        theta = np.linspace(0.3, 0.7, 9)
        r = rho1(theta, 0.5)
        scale = r**4 * (1.0 + np.abs(np.log(r)))
        assert np.all(np.abs(u_log(r, theta, 0.5)) <= 1e-12 * scale)

    def test_zero_at_vertex(self):
        assert float(u_log(0.0, 1.0, 0.5)) == 0.0

    def test_negative_radius(self):
        with pytest.raises(DomainError, match="nonnegative"):
            u_log(-1.0, 1.0, 0.5)

    def test_gradient_matches_differences(self):
        harmonic = LogHarmonic(alpha=0.5)
        point = np.array([0.02, 0.05])
        h = 1e-7
        expected = [
            (harmonic.value(point + h * e) - harmonic.value(point - h * e)) / (2 * h) for e in np.eye(2)
        ]
        r = float(np.linalg.norm(point))
        np.testing.assert_allclose(
            u_log_gradient(r, math.atan2(point[1], point[0]), 0.5), expected, rtol=1e-6, atol=1e-12
        )

    def test_harmonic(self):
        angles = np.linspace(0.4 * math.pi, 0.6 * math.pi, 5)
        radii = np.array([0.01, 0.05, 0.1])
        pts = np.stack(
            [np.outer(radii, np.cos(angles)).ravel(), np.outer(radii, np.sin(angles)).ravel()], axis=-1
        )
        residual = ManufacturedProblem(LogHarmonic(alpha=0.5), trivial_coefficients(2)).residual(
            pts, np.zeros(pts.shape[0])
        )
        assert np.max(residual) < 1e-6


class TestImZmLogZ:
    """Tests for Im(z^m log z)."""

    def test_ray_traces(self):
        r = np.geomspace(1e-6, 1.0, 7)
        lower, upper = im_zm_log_z(1.5).ray_traces(r)
        np.testing.assert_allclose(lower, 0.0, atol=1e-15)
        np.testing.assert_allclose(upper, -(math.pi / 1.5) * r**1.5, rtol=1e-12)

    def test_positive_m(self):
        with pytest.raises(DomainError):
            im_zm_log_z(0.0)


class TestLogCorner:
    """Tests for the corner bounded by the zero-set curves."""

    def test_properties(self, corner):
        assert corner.kappa == pytest.approx(4.0)
        assert corner.branch == "alpha_lt_1"
        profile = corner.profile()
        assert profile.g == pytest.approx([1.0, 1.0])
        assert profile.radius == pytest.approx(corner.curve.x_max)

    def test_invalid_window(self):
        with pytest.raises(GeometryError, match="Invalid logarithmic corner"):
            build_boundary(0.5, 1.0)

    def test_curve_samples_lie_on_zero_set(self, corner):
        samples = corner.curve_samples(50)
        assert set(samples) == {"theta", "rho", "x", "y"}
        np.testing.assert_allclose(samples["rho"], rho1(samples["theta"], 0.5), rtol=1e-6, atol=1e-300)
        assert np.all(np.diff(samples["x"]) > 0)

    def test_boundary_residual(self, corner):
        assert corner.boundary_residual() < 1e-10

    def test_profile_follows_curve(self, corner):
        samples = corner.curve_samples(20)
        inside = (samples["x"] < corner.profile().radius) & (samples["x"] > 1e-200)
        x = samples["x"][inside]
        np.testing.assert_allclose(corner.profile().phi_line(x), samples["y"][inside], rtol=1e-9)

    def test_tangent_relation(self, corner):
        x = np.geomspace(1e-7, 1e-3, 10)
        report = tangent_relation_residual(corner, x)
        assert np.max(np.abs(report.residual)) < 1e-9
        assert report.limit == pytest.approx(0.25 * math.pi)
        gaps = np.abs(report.expansion - report.limit)
        assert gaps[0] < gaps[-1]
        assert gaps[0] < 0.05


class TestDefectConstant:
    """Tests for the extrapolated corner defect."""

    def test_matches_reference(self, corner):
        result = defect_constant(corner, analytic=True)
        assert result.reference == pytest.approx(0.5**2 * math.pi / (4.0 * math.cos(0.25 * math.pi) ** 2))
        assert result.relative_error < 0.05

    def test_differences_agree_with_closed_form(self, corner):
        analytic = defect_constant(corner, analytic=True)
        numeric = defect_constant(corner, analytic=False)
        np.testing.assert_allclose(numeric.normalized, analytic.normalized, rtol=1e-3)

    def test_window_checked(self, corner):
        with pytest.raises(DomainError, match="exceeds the curve window"):
            defect_constant(corner, x_max=1.0)

    def test_no_reference_above_one(self):
        corner = LogCorner(alpha=1.5, sigma=0.3)
        result = defect_constant(corner, x_max=0.5 * corner.profile().radius, analytic=True)
        assert result.reference is None
        assert result.relative_error is None
