"""Tests for the frequency, growth and Pohozaev quantities."""

import math

import numpy as np
import pytest

from cornerlens.almgren import (
    FrequencyTrace,
    blowup,
    blowup_distance,
    derivative_identity_residual,
    energy,
    frequency_trace,
    growth_audit,
    height,
    hprime_consistency,
    monotonicity_report,
    pohozaev_residual,
    sobolev_constant,
)
from cornerlens.coefficients import BundleField, CoefficientBundle, MatrixSpec, trivial_coefficients
from cornerlens.errors import DegenerateSolutionError, DomainError, UnsupportedConfigurationError
from cornerlens.field import PolarField, PolarGrid, SectorModes, ZonalModes, sample_closed_form
from cornerlens.profiles import BoundaryProfile, ConeSection

SECTOR = BoundaryProfile.sector(2.0 / 3.0)
SIGMA = 1.5


@pytest.fixture
def grid():
    return PolarGrid.build(SECTOR, 1e-4, 1e-1, rings_per_decade=8, angular_nodes=65)


@pytest.fixture
def mode():
    return SectorModes(ConeSection.sector(2.0 / 3.0))


@pytest.fixture
def field(grid, mode):
    return sample_closed_form(mode, grid)


def synthetic_trace(H, radii):
    n = np.zeros_like(radii)
    return FrequencyTrace(
        radii=radii, H=H, D=n, N=n, terms={}, gamma=1.0, gamma_error=0.0, gamma_model="power", dim=2
    )


class TestFrequency:
    """Tests for H, D and N on homogeneous harmonic fields."""

    def test_height_is_power_law(self, field):
        for r in (1e-4, 1e-3, 1e-2):
            assert height(field, None, r) == pytest.approx(r ** (2 * SIGMA), rel=1e-7)

    def test_energy_terms(self, field):
        breakdown = energy(field, trivial_coefficients(2), 1e-2)
        assert breakdown.value == pytest.approx(SIGMA * 1e-2 ** (2 * SIGMA), rel=1e-7)
        for name in ("drift", "potential", "h", "nonlinear"):
            assert breakdown.terms[name] == 0.0

    def test_frequency_is_constant(self, field):
        trace = frequency_trace(field, trivial_coefficients(2))
        np.testing.assert_allclose(trace.N, SIGMA, rtol=1e-7)
        assert trace.gamma == pytest.approx(SIGMA, rel=1e-7)
        assert trace.gamma_error < 1e-6
        assert trace.dim == 2
        assert set(trace.terms) == {"gradient", "drift", "potential", "h", "nonlinear"}

    def test_selected_radii(self, field):
        trace = frequency_trace(field, trivial_coefficients(2), [1e-2, 1e-4, 1e-3])
        np.testing.assert_allclose(trace.radii, [1e-4, 1e-3, 1e-2])
        np.testing.assert_allclose(trace.N, SIGMA, rtol=1e-6)

    def test_zonal_frequency(self):
        grid = PolarGrid.build(BoundaryProfile.cone(0.5 * math.pi), 1e-3, 1e-1, rings_per_decade=8, angular_nodes=129)
        w = sample_closed_form(ZonalModes(), grid)
        trace = frequency_trace(w, trivial_coefficients(3))
        assert trace.gamma == pytest.approx(1.0, rel=1e-6)

    def test_mixture_tends_to_leading_mode(self, grid):
        w = sample_closed_form(SectorModes(ConeSection.sector(2.0 / 3.0), modes=((1, 1.0), (2, 0.5))), grid)
        trace = frequency_trace(w, trivial_coefficients(2))
        assert trace.gamma == pytest.approx(SIGMA, rel=1e-5)
        assert trace.N[-1] > trace.N[0]

    def test_degenerate_field(self, grid):
        zeros = np.zeros(grid.shape)
        w = PolarField(grid=grid, values=zeros, grad_r=zeros, grad_ang=zeros)
        with pytest.raises(DegenerateSolutionError, match="H vanishes"):
            frequency_trace(w, trivial_coefficients(2))

    def test_mu_shape_checked(self, field):
        with pytest.raises(DomainError, match="mu has shape"):
            height(field, np.ones((2, 2)), 1e-2)


class TestIdentities:
    """Tests for the derivative identity, H' flux and Pohozaev residual."""

    def test_derivative_identity(self, field):
        report = derivative_identity_residual(frequency_trace(field, trivial_coefficients(2)))
        assert report.max_abs < 1e-6
        assert report.radii.size == field.grid.shape[0] - 2

    def test_derivative_identity_needs_three_radii(self, field):
        trace = frequency_trace(field, trivial_coefficients(2), [1e-3, 1e-2])
        with pytest.raises(DomainError, match="three radii"):
            derivative_identity_residual(trace)

    def test_hprime_matches_flux(self, field):
        report = hprime_consistency(field)
        assert np.max(report.relative) < 1e-6

    def test_pohozaev_harmonic(self, field):
        report = pohozaev_residual(field, trivial_coefficients(2), 1e-2)
        assert report.relative < 1e-6
        assert report.terms["lateral"] == pytest.approx(0.0, abs=1e-15)

    def test_pohozaev_needs_identity_matrix(self, field):
        coefficients = BundleField(bundle=CoefficientBundle(A=MatrixSpec(kind="linear", amp=0.5)), dim=2)
        with pytest.raises(UnsupportedConfigurationError):
            pohozaev_residual(field, coefficients, 1e-2)


class TestGrowth:
    """Tests for growth audits and monotonicity reports."""

    radii = np.logspace(-6, -1, 61)

    def test_homogeneous_has_positive_limit(self, field):
        trace = frequency_trace(field, trivial_coefficients(2))
        report = growth_audit(trace, SIGMA)
        assert report.classification == "positive-finite-limit"
        assert report.sup_ratio == pytest.approx(1.0, rel=1e-6)
        assert report.doubling_deviation < 1e-6

    def test_bounded_perturbation(self):
        report = growth_audit(synthetic_trace(self.radii**2 * (1 + self.radii), self.radii), 1.0)
        assert report.classification == "positive-finite-limit"

    def test_doubling_measured_on_the_tail(self):
        report = growth_audit(synthetic_trace(self.radii**2 * (1 + np.sqrt(self.radii)), self.radii), 1.0)
        assert report.doubling_deviation < 1e-2
        assert report.doubling_deviation_full > 5e-2
        assert report.classification == "positive-finite-limit"

    def test_log_squared_growth_diverges(self):
        report = growth_audit(synthetic_trace(self.radii**2 * np.log(self.radii) ** 2, self.radii), 1.0)
        assert report.classification == "divergent"
        assert report.log2_coefficient == pytest.approx(1.0, rel=1e-6)
        assert report.log2_r_squared == pytest.approx(1.0)

    def test_log_squared_decay_vanishes(self):
        report = growth_audit(synthetic_trace(self.radii**2 / np.log(self.radii) ** 2, self.radii), 1.0)
        assert report.classification == "vanishing"

    def test_monotone_trace(self, field):
        report = monotonicity_report(frequency_trace(field, trivial_coefficients(2)))
        assert report.violations == 0

    def test_decrease_is_reported(self, caplog):
        radii = np.array([1e-3, 1e-2, 1e-1])
        trace = FrequencyTrace(
            radii=radii,
            H=np.ones(3),
            D=np.ones(3),
            N=np.array([1.0, 0.9, 1.1]),
            terms={},
            gamma=1.0,
            gamma_error=0.0,
            gamma_model="power",
            dim=2,
        )
        report = monotonicity_report(trace)
        assert report.violations == 1
        assert report.max_drop == pytest.approx(0.1)
        np.testing.assert_allclose(report.radii, [1e-2])
        assert "decreases" in caplog.text


class TestBlowup:
    """Tests for blow-up rescalings."""

    def test_homogeneous_blowup_is_fixed(self, field, mode):
        lam = float(field.grid.radii[16])
        snapshot = blowup(field, lam)
        assert snapshot.cap_norm == pytest.approx(1.0, rel=1e-7)
        assert snapshot.rescaled.grid.radii[-1] == pytest.approx(1.0)
        assert blowup_distance(snapshot, mode) < 1e-6

    def test_degenerate_blowup(self, grid):
        zeros = np.zeros(grid.shape)
        w = PolarField(grid=grid, values=zeros, grad_r=zeros, grad_ang=zeros)
        with pytest.raises(DegenerateSolutionError):
            blowup(w, 1e-2)


class TestSobolev:
    """Tests for the Sobolev constant estimate."""

    def test_scaling_law(self):
        estimate = sobolev_constant(3, 6.0, samples=10, seed=2)
        assert estimate.constant > 0
        assert estimate.scaling_error < 1e-8

    def test_more_samples_never_lower(self):
        few = sobolev_constant(2, 4.0, samples=5, seed=1)
        many = sobolev_constant(2, 4.0, samples=15, seed=1)
        assert many.constant >= few.constant

    @pytest.mark.parametrize(("dim", "p"), [(3, 7.0), (2, 1.5), (4, 2.0)])
    def test_invalid_exponents(self, dim, p):
        with pytest.raises(DomainError):
            sobolev_constant(dim, p, samples=1)
