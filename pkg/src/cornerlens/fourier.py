"""Fourier analysis of straightened solutions on the cap of the tangent cone.

For v = w∘Φ on the exact cone, φ_i(λ) = ∫_C v(λθ)ψ_i(θ)dσ(θ) and the
coefficients of the limit profile follow from the radius-independent formula

    β_i = R^{−γ}φ_i(R) + (2−N−2γ)⁻¹ ∫₀^R ((2−N−γ)s^{1−N−γ} − γ s^{γ−1}R^{2−N−2γ}) Υ_i(s) ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .coefficients import CoefficientField, HatBundle, hat_bundle
from .errors import NumericalError, UnsupportedConfigurationError
from .field import PolarField, PolarGrid, quad_bulk, quad_sphere, ring_integrals
from .geometry import cap_endpoints, polar_angle, unstraighten_map
from .logger import logger
from .numerics import FloatArray, cumulative_radial, linear_fit, power_law_partial, power_law_tail
from .profiles import BoundaryProfile
from .spectral import CapEigensystem, exponents

__all__ = [
    "AsymptoticProfile",
    "asymptotic_profile",
    "BetaReport",
    "HatBundle",
    "LimitProfile",
    "beta_coeffs",
    "exact_cone_grid",
    "hat_bundle",
    "identify_block",
    "limit_profile",
    "phi_coeffs",
    "profile_distance",
    "projected_limit",
    "straightened_field",
    "upsilon",
    "upsilon_trace",
]

EIGEN_MATCH = 1e-6


def exact_cone_grid(grid: PolarGrid) -> PolarGrid:
    """Grid on the tangent cone sharing the rings and angular layout of ``grid``."""
    profile = grid.profile
    straight = BoundaryProfile(dim=profile.dim, g=list(profile.g), radius=profile.radius)
    lower, upper = cap_endpoints(straight, 0.0, grid.delta, grid.radii * grid.scale)
    return replace(grid, profile=straight, C0=0.0, lower=np.asarray(lower), upper=np.asarray(upper))


def _grid_angle(dim: int, points: FloatArray) -> FloatArray:
    if dim == 2:
        return polar_angle(points)
    r = np.linalg.norm(points, axis=-1)
    return np.arccos(np.clip(points[..., -1] / np.where(r > 0, r, 1.0), -1.0, 1.0))


def straightened_field(w: PolarField) -> PolarField:
    """v = w∘Φ on the exact cone, with ∇v = JΦᵀ∇w(Φ).

    Φ preserves radii, so values and Cartesian gradients of w are interpolated
    along each ring in the angle of Φ(x).
    """
    source = w.grid
    target = exact_cone_grid(source)
    if source.profile.is_straight and source.C0 == 0.0:
        return replace(w, grid=target)
    phi = unstraighten_map(source.profile, source.C0, source.delta, target.points * target.scale)
    angle = _grid_angle(source.dim, phi.value)
    grad_w = w.cartesian_gradient
    values = np.empty(target.shape)
    grad = np.empty(target.shape + (source.dim,))
    for j in range(target.t.size):
        spline = CubicSpline(source.angles[j], np.column_stack([w.values[j], grad_w[j]]), axis=0)
        out = spline(np.clip(angle[j], source.lower[j], source.upper[j]))
        values[j] = out[:, 0]
        grad[j] = out[:, 1:]
    grad = np.einsum("...ji,...j->...i", phi.jacobian, grad)
    return PolarField(
        grid=target,
        values=values,
        grad_r=np.einsum("...i,...i->...", grad, target.e_r),
        grad_ang=np.einsum("...i,...i->...", grad, target.e_ang),
        closure_shift=w.closure_shift,
    )


def phi_coeffs(v: PolarField, eig: CapEigensystem, lam: float) -> FloatArray:
    """φ_i(λ) = ∫_C v(λθ)ψ_i(θ)dσ for every eigenfunction of ``eig``."""
    angles, _, weights = v.grid.ring_at(lam)
    values, _, _ = v.at_radius(lam)
    return np.array([float(np.dot(values * eig.evaluate(i, angles), weights)) for i in range(eig.size)])


@dataclass(frozen=True)
class _UpsilonDensity:
    """Node arrays shared by every Υ_i: the three integrands before multiplying by ψ_i."""

    angular_flux: FloatArray
    radial_flux: FloatArray
    lower_order: FloatArray


def _upsilon_density(v: PolarField, coefficients: CoefficientField, source: FloatArray | None) -> _UpsilonDensity:
    grid = v.grid
    points = grid.points * grid.scale
    coeff = coefficients.evaluate(points)
    grad = v.cartesian_gradient
    excess = coeff.matrix - np.eye(grid.dim)
    flux = np.einsum("...ij,...j->...i", excess, grad)
    radius = np.linalg.norm(points, axis=-1)
    lower = (
        -np.einsum("...i,...i->...", coeff.drift, grad)
        + coeff.potential * v.values
        + coeff.f_scale * coefficients.bundle.f.value(v.values)
    )
    if source is not None:
        lower = lower + source
    return _UpsilonDensity(
        angular_flux=np.einsum("...i,...i->...", flux, grid.e_ang) / radius,
        radial_flux=np.einsum("...i,...i->...", flux, grid.e_r),
        lower_order=lower,
    )


def _bulk_and_surface(density: _UpsilonDensity, eig: CapEigensystem, i: int, angles: FloatArray) -> tuple[FloatArray, FloatArray]:
    psi = eig.evaluate(i, angles)
    bulk = -density.angular_flux * eig.derivative(i, angles) + density.lower_order * psi
    return bulk, density.radial_flux * psi


def upsilon(
    v: PolarField,
    coefficients: CoefficientField,
    eig: CapEigensystem,
    lam: float,
    i: int,
    *,
    source: FloatArray | None = None,
) -> float:
    """Υ_i(λ): bulk gradient and lower-order integrals over C ∩ B_λ plus the ∂B_λ flux term.

    ``coefficients`` are the pushed-forward Â, b̂, ĥ, f̂ on the exact cone;
    ``source`` holds a manufactured right-hand side ĝ at the nodes of v.
    """
    density = _upsilon_density(v, coefficients, source)
    bulk, surface = _bulk_and_surface(density, eig, i, v.grid.angles)
    return quad_bulk(bulk, v.grid, lam) + quad_sphere(surface, v.grid, lam)


def upsilon_trace(
    v: PolarField,
    coefficients: CoefficientField,
    eig: CapEigensystem,
    indices: list[int],
    *,
    source: FloatArray | None = None,
) -> FloatArray:
    """Υ_i at every ring for each index, shape (len(indices), rings)."""
    grid = v.grid
    density = _upsilon_density(v, coefficients, source)
    rows = []
    for i in indices:
        bulk, surface = _bulk_and_surface(density, eig, i, grid.angles)
        inner = cumulative_radial(ring_integrals(bulk, grid), grid.h)
        outer = np.exp((grid.dim - 1) * grid.t) * np.sum(surface * grid.sphere_weights, axis=-1)
        rows.append(inner + outer)
    return np.array(rows)


def identify_block(gamma: float, eig: CapEigensystem, *, tol: float = 0.05) -> tuple[int, int]:
    """First index j0 (0-based) and multiplicity m of the eigenvalue whose σ⁺ matches γ.

    Raises:
        NumericalError: If no exponent of the ladder lies within ``tol``.
    """
    ladder = np.array([pair.sigma_plus for pair in eig.exponent_ladder()])
    distance = np.abs(ladder - gamma)
    j0 = int(np.argmin(distance))
    if distance[j0] > tol:
        msg = f"gamma={gamma:.6g} matches no exponent of the ladder {ladder.tolist()}"
        raise NumericalError(msg)
    while j0 > 0 and abs(eig.mu[j0 - 1] - eig.mu[j0]) <= EIGEN_MATCH * max(1.0, abs(eig.mu[j0])):
        j0 -= 1
    m = 1
    while j0 + m < eig.size and abs(eig.mu[j0 + m] - eig.mu[j0]) <= EIGEN_MATCH * max(1.0, abs(eig.mu[j0])):
        m += 1
    return j0, m


def _radial_integral(values: FloatArray, t: FloatArray, h: float, R: float) -> tuple[float, float]:
    """∫₀^R G(s) ds/s for ring samples G of an integrand in t = log s.

    Returns:
        Tuple of (integral, share of the power-law tail below the first ring)
    """
    cumulative = cumulative_radial(values, h)
    tail, _ = power_law_tail(float(values[0]), float(values[1]), h)
    log_r = math.log(R)
    j = int(np.clip(np.searchsorted(t, log_r, side="right") - 1, 0, t.size - 2))
    fraction = (log_r - t[j]) / h
    total = float(cumulative[j]) if fraction <= 1e-12 else float(cumulative[j] + power_law_partial(values[j], values[j + 1], h, fraction))
    share = abs(tail) / abs(total) if total != 0.0 else 0.0
    return total, share


@dataclass(frozen=True)
class BetaReport:
    """β_i at radius R with the contributions of the formula."""

    index: int
    mu: float
    sigma: float
    beta: float
    R: float
    boundary_term: float
    correction: float
    tail_share: float


def beta_coeffs(
    v: PolarField,
    coefficients: CoefficientField,
    eig: CapEigensystem,
    R: float,
    indices: list[int],
    *,
    source: FloatArray | None = None,
    upsilons: FloatArray | None = None,
) -> list[BetaReport]:
    """β_i for each index, with γ the exponent σ_i⁺ of its own eigenvalue.

    Raises:
        UnsupportedConfigurationError: If 2 − N − 2γ vanishes.
    """
    grid = v.grid
    dim = grid.dim
    grid.check_radius(R)
    table = upsilons if upsilons is not None else upsilon_trace(v, coefficients, eig, indices, source=source)
    phis = phi_coeffs(v, eig, R)
    radii = grid.radii
    reports = []
    for row, i in zip(table, indices):
        gamma = exponents(float(eig.mu[i]), dim).sigma_plus
        denom = 2.0 - dim - 2.0 * gamma
        if abs(denom) < 1e-12:
            msg = f"Degenerate denominator 2 - N - 2*gamma for gamma={gamma:.6g}, N={dim}"
            raise UnsupportedConfigurationError(msg)
        first, share_first = _radial_integral(row * radii ** (2.0 - dim - gamma), grid.t, grid.h, R)
        second, share_second = _radial_integral(row * radii**gamma, grid.t, grid.h, R)
        correction = ((2.0 - dim - gamma) * first - gamma * R ** (2.0 - dim - 2.0 * gamma) * second) / denom
        boundary = R ** (-gamma) * float(phis[i])
        reports.append(
            BetaReport(
                index=i,
                mu=float(eig.mu[i]),
                sigma=gamma,
                beta=boundary + correction,
                R=R,
                boundary_term=boundary,
                correction=correction,
                tail_share=max(share_first, share_second),
            )
        )
        logger.debug(f"beta_{i + 1}(R={R:.3g}) = {boundary + correction:.12g} (correction {correction:.3e})")
    return reports


def projected_limit(v: PolarField, eig: CapEigensystem, i: int, *, decay: float = 0.5, decades: float = 1.0) -> float:
    """Extrapolate λ^{−σ_i}φ_i(λ) to λ → 0 by a fit against 1 and λ^decay on the innermost decades."""
    grid = v.grid
    sigma = exponents(float(eig.mu[i]), grid.dim).sigma_plus
    radii = grid.radii[grid.radii <= grid.radii[0] * 10.0**decades * (1.0 + 1e-12)]
    samples = np.array([phi_coeffs(v, eig, float(r))[i] * r ** (-sigma) for r in radii])
    fit = linear_fit(np.column_stack([np.ones_like(radii), radii**decay]), samples)
    return float(fit.coefficients[0])


@dataclass(frozen=True)
class LimitProfile:
    """Σβ_iψ_i sampled on the cap, with its L² norm."""

    angles: FloatArray
    values: FloatArray
    norm: float


def limit_profile(betas: dict[int, float], eig: CapEigensystem, *, nodes: int = 513) -> LimitProfile:
    """Reconstruct the angular limit profile from coefficients keyed by eigen index."""
    cap = eig.cap
    angles = np.linspace(cap.lower, cap.upper, nodes)
    values = np.zeros(nodes)
    for i, beta in betas.items():
        values += beta * eig.evaluate(i, angles)
    norm = math.sqrt(sum(b * b for b in betas.values()))
    return LimitProfile(angles=angles, values=values, norm=norm)


def profile_distance(betas: dict[int, float], eig: CapEigensystem, trace_angles: FloatArray, trace_values: FloatArray, weights: FloatArray) -> float:
    """L²(cap) distance between the normalized limit profile and an angular trace."""
    norm = math.sqrt(sum(b * b for b in betas.values()))
    if norm == 0.0:
        msg = "All limit coefficients vanish; the profile cannot be normalized"
        raise NumericalError(msg)
    profile = sum(beta * eig.evaluate(i, trace_angles) for i, beta in betas.items()) / norm
    return math.sqrt(max(float(np.dot((trace_values - profile) ** 2, weights)), 0.0))


@dataclass(frozen=True)
class AsymptoticProfile:
    """Limit exponent, resonant block and limit coefficients of a solution."""

    gamma: float
    j0: int
    m: int
    betas: list[BetaReport]
    r_independence: float
    profile: LimitProfile

    @property
    def block(self) -> list[int]:
        return list(range(self.j0, self.j0 + self.m))

    @property
    def nontrivial(self) -> bool:
        return any(abs(b.beta) > 0.0 for b in self.betas if b.index in self.block)

    def as_dict(self) -> dict[int, float]:
        return {b.index: b.beta for b in self.betas}


def asymptotic_profile(
    w: PolarField,
    coefficients: CoefficientField,
    eig: CapEigensystem,
    gamma: float,
    R: float,
    *,
    source: FloatArray | None = None,
    extra: list[int] | None = None,
    radius_ratio: float = 2.0,
    tol: float = 0.05,
) -> AsymptoticProfile:
    """Straighten w, identify the resonant block of γ and compute its limit coefficients.

    ``coefficients`` act on the exact cone (the pushforwards of the bundle
    under Φ) and ``source`` holds a forcing on the straightened grid.
    Coefficients of ``extra`` indices are reported as well but do not enter
    the limit profile. The R-independence residual compares β at R and
    R/``radius_ratio``.
    """
    v = straightened_field(w)
    j0, m = identify_block(gamma, eig, tol=tol)
    block = list(range(j0, j0 + m))
    indices = sorted(set(block) | set(extra or []))
    if max(indices) >= eig.size:
        msg = f"Index {max(indices) + 1} exceeds the {eig.size} computed eigenpairs"
        raise NumericalError(msg)
    table = upsilon_trace(v, coefficients, eig, indices, source=source)
    first = beta_coeffs(v, coefficients, eig, R, indices, upsilons=table)
    second = beta_coeffs(v, coefficients, eig, R / radius_ratio, indices, upsilons=table)
    residual = max(abs(a.beta - b.beta) for a, b in zip(first, second))
    profile = limit_profile({b.index: b.beta for b in first if b.index in block}, eig)
    logger.info(f"Limit profile for gamma={gamma:.8g}: block j0={j0 + 1}, m={m}, R-independence {residual:.3e}")
    return AsymptoticProfile(gamma=gamma, j0=j0, m=m, betas=first, r_independence=residual, profile=profile)
