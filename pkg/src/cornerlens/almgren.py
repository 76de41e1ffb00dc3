"""Almgren-type frequency quantities on polar fields.

H(r) = r^{1−N} ∫_{S_r} μ w² dσ,
D(r) = r^{2−N} ∫_{Ω_r} (Ã∇w·∇w + b̃·∇w w − V|y|⁻²w² − h̃w² − f̃(y, w)w) dy,
N(r) = D(r)/H(r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike
from scipy.interpolate import CubicSpline

from .coefficients import CoefficientField, CoefficientValues, mu_field
from .errors import DegenerateSolutionError, DomainError, UnsupportedConfigurationError
from .field import ClosedForm, PolarField, quad_annulus, quad_bulk, quad_sphere
from .logger import logger
from .numerics import FloatArray, SlopeFit, linear_fit, loglog_slope

MuSpec = FloatArray | CoefficientField | None
Classification = Literal["positive-finite-limit", "divergent", "vanishing"]

TERM_NAMES = ("gradient", "drift", "potential", "h", "nonlinear")


def mu_on(w: PolarField, mu: MuSpec) -> FloatArray:
    """μ at every node of the field's grid (1 when ``mu`` is None)."""
    if mu is None:
        return np.ones(w.grid.shape)
    if isinstance(mu, np.ndarray):
        if mu.shape != w.grid.shape:
            msg = f"mu has shape {mu.shape}, grid is {w.grid.shape}"
            raise DomainError(msg)
        return mu
    return mu_field(mu, w.grid.points * w.grid.scale)


def height(w: PolarField, mu: MuSpec, r: float) -> float:
    """H(r) = r^{1−N} ∫_{S_r} μ w² dσ."""
    weight = mu_on(w, mu)
    return quad_sphere(weight * w.values**2, w.grid, r) / r ** (w.grid.dim - 1)


@dataclass(frozen=True)
class EnergyDensity:
    """Node values of the five integrand terms of D."""

    gradient: FloatArray
    drift: FloatArray
    potential: FloatArray
    h: FloatArray
    nonlinear: FloatArray

    @property
    def total(self) -> FloatArray:
        return self.gradient + self.drift + self.potential + self.h + self.nonlinear

    def term(self, name: str) -> FloatArray:
        return getattr(self, name)


def energy_density(w: PolarField, coefficients: CoefficientField, values: CoefficientValues | None = None) -> EnergyDensity:
    points = w.grid.points * w.grid.scale
    coeff = values if values is not None else coefficients.evaluate(points)
    grad = w.cartesian_gradient
    u = w.values
    r2 = np.sum(points**2, axis=-1)
    return EnergyDensity(
        gradient=np.einsum("...ij,...j,...i->...", coeff.matrix, grad, grad),
        drift=np.einsum("...i,...i->...", coeff.drift, grad) * u,
        potential=-coeff.angular * u**2 / r2,
        h=-coeff.potential * u**2,
        nonlinear=-coeff.f_scale * coefficients.bundle.f.value(u) * u,
    )


@dataclass(frozen=True)
class EnergyBreakdown:
    value: float
    terms: dict[str, float]


def energy(
    w: PolarField,
    coefficients: CoefficientField,
    r: float,
    *,
    density: EnergyDensity | None = None,
) -> EnergyBreakdown:
    """D(r) with its term-by-term breakdown."""
    dens = density or energy_density(w, coefficients)
    scale = r ** (2 - w.grid.dim)
    terms = {name: scale * quad_bulk(dens.term(name), w.grid, r) for name in TERM_NAMES}
    return EnergyBreakdown(value=float(sum(terms.values())), terms=terms)


@dataclass(frozen=True)
class FrequencyTrace:
    """H, D and N = D/H on log-spaced radii with the extracted limit γ."""

    radii: FloatArray
    H: FloatArray
    D: FloatArray
    N: FloatArray
    terms: dict[str, FloatArray]
    gamma: float
    gamma_error: float
    gamma_model: Literal["power", "log"]
    dim: int
    closure_shift: float | None = None

    @property
    def t(self) -> FloatArray:
        return np.log(self.radii)


def _extract_gamma(radii: FloatArray, freq: FloatArray, decay: float) -> tuple[float, float, Literal["power", "log"]]:
    """Fit N over the innermost decade against γ + c r^decay and γ + c/log r."""
    tail = radii <= radii[0] * 10.0 * (1.0 + 1e-12)
    if np.count_nonzero(tail) < 3:
        tail = np.arange(radii.size) < min(radii.size, 3)
    r = radii[tail]
    y = freq[tail]
    ones = np.ones_like(r)
    power = linear_fit(np.column_stack([ones, r**decay]), y)
    logarithmic = linear_fit(np.column_stack([ones, 1.0 / np.log(r)]), y)
    if power.residual <= logarithmic.residual:
        best, other, model = power, logarithmic, "power"
    else:
        best, other, model = logarithmic, power, "log"
    gamma = float(best.coefficients[0])
    spread = abs(gamma - float(other.coefficients[0]))
    error = max(best.residual, min(spread, abs(gamma - float(y[0]))))
    return gamma, error, model


def frequency_trace(
    w: PolarField,
    coefficients: CoefficientField,
    radii: ArrayLike | None = None,
    *,
    decay: float = 0.5,
) -> FrequencyTrace:
    """Evaluate H, D and N at ``radii`` (default: every ring) and estimate γ.

    Raises:
        DegenerateSolutionError: If H(r) ≤ 0 at a sampled radius.
    """
    r_arr = w.grid.radii if radii is None else np.sort(np.asarray(radii, dtype=float))
    mu = mu_on(w, coefficients)
    density = energy_density(w, coefficients)
    H = np.array([height(w, mu, float(r)) for r in r_arr])
    if np.any(H <= 0):
        bad = float(r_arr[np.argmax(H <= 0)])
        msg = f"H vanishes at r={bad:.6g}; the solution is degenerate near the vertex"
        raise DegenerateSolutionError(msg)
    breakdowns = [energy(w, coefficients, float(r), density=density) for r in r_arr]
    D = np.array([b.value for b in breakdowns])
    terms = {name: np.array([b.terms[name] for b in breakdowns]) for name in TERM_NAMES}
    freq = D / H
    gamma, error, model = _extract_gamma(r_arr, freq, decay)
    logger.debug(f"Frequency trace on {r_arr.size} radii: gamma={gamma:.10g} +/- {error:.2e} ({model} model)")
    return FrequencyTrace(
        radii=r_arr,
        H=H,
        D=D,
        N=freq,
        terms=terms,
        gamma=gamma,
        gamma_error=error,
        gamma_model=model,
        dim=w.grid.dim,
        closure_shift=w.closure_shift,
    )


@dataclass(frozen=True)
class DerivativeReport:
    """(H′ − 2D/r)/(H/r) at interior radii, by centered differences of log H in t."""

    radii: FloatArray
    residual: FloatArray
    fit: SlopeFit

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def slope(self) -> float:
        return self.fit.slope


def derivative_identity_residual(trace: FrequencyTrace) -> DerivativeReport:
    """Residual of H′ = 2D/r, normalized by H/r."""
    if trace.radii.size < 3:
        msg = "The derivative identity needs at least three radii"
        raise DomainError(msg)
    t = trace.t
    log_h = np.log(trace.H)
    dlog = (log_h[2:] - log_h[:-2]) / (t[2:] - t[:-2])
    residual = dlog - 2.0 * trace.N[1:-1]
    radii = trace.radii[1:-1]
    return DerivativeReport(radii=radii, residual=residual, fit=loglog_slope(radii, residual))


@dataclass(frozen=True)
class GrowthReport:
    """Growth bounds of H relative to r^{2γ}."""

    gamma: float
    sup_ratio: float
    variation: float
    doubling_max: float
    doubling_deviation: float
    doubling_deviation_full: float
    classification: Classification
    log2_r_squared: float
    log2_coefficient: float
    tail_slope: float


def growth_audit(trace: FrequencyTrace, gamma: float, *, window_decades: float = 2.0, tolerance: float = 0.05) -> GrowthReport:
    """Sup of H/r^{2γ}, doubling ratios and the tail class of λ^{−2γ}H(λ).

    The tail is the innermost ``window_decades``. ``doubling_deviation``
    compares H(2r)/H(r) with 2^{2γ} for r in the tail, and
    ``doubling_deviation_full`` for every r with 2r on the grid. The tail has
    a positive finite limit when its relative variation stays below
    ``tolerance``; it is divergent when the ratio grows toward the vertex with
    either a c·log²λ + b·logλ + a fit (c > 0, R² > 0.99) or a power fit of
    negative slope, and vanishing otherwise.
    """
    r = trace.radii
    ratio = trace.H / r ** (2.0 * gamma)
    tail = r <= r[0] * 10.0**window_decades * (1.0 + 1e-12)
    q = ratio[tail]
    variation = float((q.max() - q.min()) / abs(q.mean())) if q.size else float("nan")

    spline = CubicSpline(trace.t, np.log(trace.H))
    doubles = 2.0 * r <= r[-1] * (1.0 + 1e-12)
    inner = r[doubles]
    doubling = np.exp(spline(np.log(2.0 * inner)) - spline(np.log(inner)))
    deviation = np.abs(doubling / 2.0 ** (2.0 * gamma) - 1.0)
    tail_deviation = deviation[tail[doubles]]

    def log2(mask: np.ndarray) -> tuple[float, float]:
        lam = np.log(r[mask])
        fit = linear_fit(np.column_stack([np.ones_like(lam), lam, lam**2]), ratio[mask])
        return fit.r_squared, float(fit.coefficients[2])

    r2_tail, c_tail = log2(tail)
    r2_all, c_all = log2(np.ones_like(r, dtype=bool))
    slope = loglog_slope(r[tail], q).slope
    if q.size and q.mean() > 0 and variation < tolerance:
        classification: Classification = "positive-finite-limit"
    elif q[0] > q[-1] and ((r2_tail > 0.99 and c_tail > 0) or slope < 0):
        classification = "divergent"
    else:
        classification = "vanishing"
    return GrowthReport(
        gamma=gamma,
        sup_ratio=float(np.max(ratio)),
        variation=variation,
        doubling_max=float(np.max(doubling)) if inner.size else float("nan"),
        doubling_deviation=float(np.max(tail_deviation)) if tail_deviation.size else float("nan"),
        doubling_deviation_full=float(np.max(deviation)) if inner.size else float("nan"),
        classification=classification,
        log2_r_squared=r2_all,
        log2_coefficient=c_all,
        tail_slope=slope,
    )


@dataclass(frozen=True)
class BlowupSnapshot:
    """w^λ(x) = w(λx)/√H(λ) on B₁ together with its cap normalization."""

    lam: float
    rescaled: PolarField
    cap_norm: float


def blowup(w: PolarField, lam: float, mu: MuSpec = None) -> BlowupSnapshot:
    """Rescale w at scale λ.

    Raises:
        DegenerateSolutionError: If H(λ) ≤ 0.
    """
    weight = mu_on(w, mu)
    h_lam = height(w, weight, lam)
    if h_lam <= 0:
        msg = f"H({lam:.6g}) = {h_lam:.3e}; cannot normalize the blow-up"
        raise DegenerateSolutionError(msg)
    factor = 1.0 / math.sqrt(h_lam)
    grid = w.grid.rescaled(lam)
    keep = grid.t <= 1e-12 * max(1.0, abs(float(grid.t[0])))
    stop = int(np.count_nonzero(keep))
    if grid.ring_index(1.0) is None and stop < grid.t.size:
        stop += 1
    rescaled = PolarField(
        grid=grid,
        values=factor * w.values,
        grad_r=factor * lam * w.grad_r,
        grad_ang=factor * lam * w.grad_ang,
    ).restrict(0, stop)
    cap_norm = quad_sphere(weight[:stop] * rescaled.values**2, rescaled.grid, 1.0)
    return BlowupSnapshot(lam=lam, rescaled=rescaled, cap_norm=cap_norm)


def blowup_distance(snapshot: BlowupSnapshot, reference: ClosedForm) -> float:
    """L² distance on B₁ ∖ B_{1/2} between w^λ and a closed form in the blow-up variable."""
    grid = snapshot.rescaled.grid
    diff = snapshot.rescaled.values - reference.value(grid.points)
    return math.sqrt(max(quad_annulus(diff**2, grid, 0.5, 1.0), 0.0))


@dataclass(frozen=True)
class PohozaevReport:
    lhs: float
    rhs: float
    terms: dict[str, float]

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def scale(self) -> float:
        return float(sum(abs(v) for v in self.terms.values()))

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual


def pohozaev_residual(
    w: PolarField,
    coefficients: CoefficientField,
    r: float,
    *,
    source: FloatArray | None = None,
) -> PohozaevReport:
    """Rellich–Nečas identity on Ω_r for Ã = Id on a straight cone.

    With β = y every Jacobian and coefficient-derivative term collapses. An
    optional manufactured ``source`` g (node values) adds 2∫(y·∇w)g to the
    right side.

    Raises:
        UnsupportedConfigurationError: Off straight cones or for Ã ≠ Id.
    """
    grid = w.grid
    spec = coefficients.bundle.A
    if not grid.profile.is_straight or grid.C0 != 0.0 or (spec.kind != "identity" and spec.amp != 0.0):
        msg = "The Pohozaev residual needs a straight cone with identity leading coefficients"
        raise UnsupportedConfigurationError(msg)
    dim = grid.dim
    points = grid.points * grid.scale
    coeff = coefficients.evaluate(points)
    radius = np.linalg.norm(points, axis=-1)
    grad = w.cartesian_gradient
    grad2 = np.sum(grad**2, axis=-1)
    radial = radius * w.grad_r
    u = w.values
    primitive = coeff.f_scale * coefficients.bundle.f.primitive(u)
    vw2 = coeff.angular * u**2 / radius**2

    terms = {
        "sphere_gradient": r * quad_sphere(grad2, grid, r),
        "sphere_normal": -2.0 * r * quad_sphere(w.grad_r**2, grid, r),
        "lateral": -_lateral_term(w, r),
        "bulk_gradient": (dim - 2.0) * quad_bulk(grad2, grid, r),
        "bulk_drift": -2.0 * quad_bulk(radial * np.einsum("...i,...i->...", coeff.drift, grad), grid, r),
        "bulk_potential": -(dim - 2.0) * quad_bulk(vw2, grid, r),
        "sphere_potential": r * quad_sphere(vw2, grid, r),
        "bulk_h": 2.0 * quad_bulk(radial * coeff.potential * u, grid, r),
        "bulk_primitive": -2.0 * dim * quad_bulk(primitive, grid, r),
        "sphere_primitive": 2.0 * r * quad_sphere(primitive, grid, r),
    }
    if source is not None:
        terms["bulk_source"] = 2.0 * quad_bulk(radial * source, grid, r)
    lhs_names = ("sphere_gradient", "sphere_normal", "lateral")
    lhs = sum(terms[name] for name in lhs_names)
    rhs = sum(value for name, value in terms.items() if name not in lhs_names)
    return PohozaevReport(lhs=float(lhs), rhs=float(rhs), terms=terms)


def _lateral_term(w: PolarField, r: float) -> float:
    """∫_{Γ_r} |∇w|²(y·ν̃) dσ from the gradient at the boundary nodes (zero on straight cones)."""
    grid = w.grid
    inside = grid.radii <= r * (1.0 + 1e-12)
    total = 0.0
    ends = (0, -1) if grid.dim == 2 else (-1,)
    for end in ends:
        pts = grid.points[:, end]
        normal = -grid.e_ang[:, end] if end == 0 else grid.e_ang[:, end]
        grad2 = np.sum(w.cartesian_gradient[:, end] ** 2, axis=-1)
        density = grad2 * np.einsum("...i,...i->...", pts, normal)
        if grid.dim == 3:
            density = density * 2.0 * math.pi * np.linalg.norm(pts[:, :2], axis=-1)
        g = (density * grid.radii)[inside]
        total += float(np.sum(0.5 * grid.h * (g[:-1] + g[1:])))
    return total


@dataclass(frozen=True)
class HprimeReport:
    radii: FloatArray
    finite_difference: FloatArray
    flux: FloatArray

    @property
    def relative(self) -> FloatArray:
        return np.abs(self.finite_difference - self.flux) / np.abs(self.flux)


def hprime_consistency(w: PolarField, mu: MuSpec = None) -> HprimeReport:
    """Centered dH/dr on the rings against 2r^{1−N}∫_{S_r} μ w ∂_ν w dσ."""
    weight = mu_on(w, mu)
    grid = w.grid
    radii = grid.radii
    H = np.array([height(w, weight, float(r)) for r in radii])
    dlog = (np.log(H[2:]) - np.log(H[:-2])) / (2.0 * grid.h)
    inner = radii[1:-1]
    fd = H[1:-1] * dlog / inner
    flux = np.array(
        [2.0 * quad_sphere(weight * w.values * w.grad_r, grid, float(r)) / r ** (grid.dim - 1) for r in inner]
    )
    return HprimeReport(radii=inner, finite_difference=fd, flux=flux)


@dataclass(frozen=True)
class MonotonicityReport:
    """Decreases of N(r) as r grows, reported rather than asserted."""

    violations: int
    max_drop: float
    radii: FloatArray


def monotonicity_report(trace: FrequencyTrace, *, tolerance: float = 1e-10) -> MonotonicityReport:
    drops = trace.N[:-1] - trace.N[1:]
    bad = drops > tolerance * np.maximum(1.0, np.abs(trace.N[:-1]))
    if np.any(bad):
        logger.warning(f"Frequency decreases at {int(np.count_nonzero(bad))} radius step(s)")
    return MonotonicityReport(
        violations=int(np.count_nonzero(bad)),
        max_drop=float(np.max(drops, initial=0.0)),
        radii=trace.radii[1:][bad],
    )


# Sobolev inequality with boundary term on balls


@dataclass(frozen=True)
class SobolevEstimate:
    """Best ratio ‖v‖²_{L^p(B₁)} / (∫|∇v|² + ∫_{∂B₁} v²) over random polynomials."""

    dim: int
    p: float
    constant: float
    trials: int
    scaling_error: float


def _ball_rule(dim: int, radius: float) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
    """Interior points and weights of B_radius, sphere points and weights of ∂B_radius."""
    x, wx = leggauss(24)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * wx
    if dim == 2:
        theta = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        dw = np.full(theta.size, 2.0 * math.pi / theta.size)
    else:
        y, wy = leggauss(24)
        phi = 0.5 * math.pi * (y + 1.0)
        wphi = 0.5 * math.pi * wy
        beta = np.linspace(0.0, 2.0 * math.pi, 32, endpoint=False)
        P, B = np.meshgrid(phi, beta, indexing="ij")
        dirs = np.stack([np.sin(P) * np.cos(B), np.sin(P) * np.sin(B), np.cos(P)], axis=-1).reshape(-1, 3)
        dw = (wphi[:, None] * np.sin(phi)[:, None] * np.full(beta.size, 2.0 * math.pi / beta.size)).reshape(-1)
    pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    weights = (wr[:, None] * r[:, None] ** (dim - 1) * dw[None, :]).reshape(-1)
    return pts, weights, radius * dirs, radius ** (dim - 1) * dw


def _monomials(dim: int, degree: int) -> list[tuple[int, ...]]:
    powers = [()]
    for _ in range(dim):
        powers = [p + (k,) for p in powers for k in range(degree + 1)]
    return [p for p in powers if 0 < sum(p) <= degree] + [tuple([0] * dim)]


def _poly(coeffs: FloatArray, exps: list[tuple[int, ...]], pts: FloatArray) -> tuple[FloatArray, FloatArray]:
    value = np.zeros(pts.shape[0])
    grad = np.zeros_like(pts)
    for c, e in zip(coeffs, exps):
        e_arr = np.asarray(e)
        value += c * np.prod(pts**e_arr, axis=-1)
        for j in range(pts.shape[1]):
            if e_arr[j] == 0:
                continue
            lowered = e_arr.copy()
            lowered[j] -= 1
            grad[:, j] += c * e_arr[j] * np.prod(pts**lowered, axis=-1)
    return value, grad


def _sobolev_ratio(dim: int, p: float, coeffs: FloatArray, exps: list[tuple[int, ...]], radius: float) -> float:
    pts, w, spts, sw = _ball_rule(dim, radius)
    scaled = pts / radius
    value, grad = _poly(coeffs, exps, scaled)
    grad = grad / radius
    svalue, _ = _poly(coeffs, exps, spts / radius)
    lp = float(np.sum(w * np.abs(value) ** p)) ** (2.0 / p)
    denom = float(np.sum(w * np.sum(grad**2, axis=-1))) + float(np.sum(sw * svalue**2)) / radius
    return lp / denom


def sobolev_constant(dim: int, p: float, samples: int = 200, *, seed: int = 0, degree: int = 3) -> SobolevEstimate:
    """Estimate the constant of ‖v‖²_{L^p(B_r)} ≤ C r^{2N/p+2−N}(∫|∇v|² + r⁻¹∫_{∂B_r}v²).

    The estimate is a lower bound for the best constant. ``scaling_error`` is
    the largest relative deviation of the scaling law at r ∈ {0.1, 10}.
    """
    if dim not in (2, 3):
        msg = f"Sobolev estimates are implemented for N in {{2, 3}}, got {dim}"
        raise DomainError(msg)
    if p < 2 or (dim == 3 and p > 6):
        msg = f"Exponent p={p} outside the Sobolev range for N={dim}"
        raise DomainError(msg)
    rng = np.random.default_rng(seed)
    exps = _monomials(dim, degree)
    best = 0.0
    best_coeffs = None
    for _ in range(samples):
        coeffs = rng.normal(size=len(exps))
        ratio = _sobolev_ratio(dim, p, coeffs, exps, 1.0)
        if ratio > best:
            best, best_coeffs = ratio, coeffs
    assert best_coeffs is not None
    exponent = 2.0 * dim / p + 2.0 - dim
    errors = [
        abs(_sobolev_ratio(dim, p, best_coeffs, exps, r) / (best * r**exponent) - 1.0) for r in (0.1, 10.0)
    ]
    return SobolevEstimate(dim=dim, p=p, constant=best, trials=samples, scaling_error=float(max(errors)))
