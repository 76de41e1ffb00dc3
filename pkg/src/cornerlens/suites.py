"""Named property suites run by ``corner-lens verify``.

Each check takes the run seed and returns ``(passed, detail)``. Checks are
registered per suite with :func:`check`; the check name is the invariant it
guards.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .almgren import (
    energy,
    frequency_trace,
    growth_audit,
    height,
    hprime_consistency,
    monotonicity_report,
    pohozaev_residual,
    sobolev_constant,
)
from .coefficients import (
    AngularPotential,
    BundleField,
    CoefficientBundle,
    DriftSpec,
    MatrixSpec,
    Nonlinearity,
    mu_field,
    order_audit,
    ray_points,
    transform_bundle,
    trivial_coefficients,
)
from .errors import CornerLensError
from .field import ManufacturedProblem, PolarGrid, SectorModes, ZonalModes, quad_bulk, quad_sphere, sample_closed_form
from .fourier import asymptotic_profile, identify_block, phi_coeffs
from .geometry import psi_map, straighten, straightening_radius, unstraighten, validate_c0
from .hardy import hardy_certificate
from .logexample import LogCorner, defect_constant, im_zm_log_z, rho1, tangent_relation_residual
from .logger import logger
from .profiles import BoundaryProfile, ConeSection, PowerBump
from .spectral import admissibility, exponents, lambda_V, mu1_on_shrinking_cap, solve_cap_eigen

CheckFn = Callable[[int], tuple[bool, str]]

SUITES: dict[str, dict[str, CheckFn]] = {
    name: {} for name in ("geometry", "coefficients", "spectral", "hardy", "field", "almgren", "fourier", "logexample")
}


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def check(suite: str, name: str | None = None) -> Callable[[CheckFn], CheckFn]:
    """Register a check under ``suite``; the function name is the default check name."""

    def decorator(func: CheckFn) -> CheckFn:
        SUITES[suite][name or func.__name__] = func
        return func

    return decorator


def _within(value: float, expected: float, tol: float) -> tuple[bool, str]:
    error = abs(value - expected)
    return error <= tol, f"{value:.12g} vs {expected:.12g} (error {error:.2e}, tol {tol:g})"


def _pure_sector(alpha: float = 2.0 / 3.0, r_min: float = 1e-3, r_max: float = 0.9, nodes: int = 129):
    profile = BoundaryProfile.sector(alpha)
    grid = PolarGrid.build(profile, r_min, r_max, 24, nodes)
    modes = SectorModes(section=profile.section())
    return grid, modes, sample_closed_form(modes, grid)


def _perturbed_corner() -> tuple[BoundaryProfile, float, float]:
    return BoundaryProfile.sector(2.0 / 3.0, perturbation=PowerBump(a=0.5, delta=0.5)), 0.5, 0.5


# geometry


@check("geometry")
def psi_normalization(seed: int) -> tuple[bool, str]:
    value = psi_map(1.0, 0.5, np.array([0.0, 1.0])).value
    return _within(float(value[1]), 3.0, 1e-12)


@check("geometry")
def defect_bound(seed: int) -> tuple[bool, str]:
    profile, C0, delta = _perturbed_corner()
    worst = validate_c0(profile, C0, delta)
    return worst <= 1.0, f"worst |phi - grad phi . x'| / (C0 |x'|^(1+delta)) = {worst:.4g}"


@check("geometry")
def radius_preservation(seed: int) -> tuple[bool, str]:
    profile, C0, delta = _perturbed_corner()
    r_max = min(0.1, 0.5 * straightening_radius(profile, C0, delta))
    grid = PolarGrid.build(profile, 1e-6, r_max, 8, 33, C0=C0, delta=delta)
    pts = grid.points.reshape(-1, 2)
    image = straighten(profile, C0, delta, pts)
    error = float(np.max(np.abs(np.linalg.norm(image, axis=-1) / np.linalg.norm(pts, axis=-1) - 1.0)))
    return error < 1e-10, f"max relative radius change {error:.2e}"


@check("geometry")
def straighten_round_trip(seed: int) -> tuple[bool, str]:
    profile, C0, delta = _perturbed_corner()
    r_max = min(0.1, 0.5 * straightening_radius(profile, C0, delta))
    grid = PolarGrid.build(profile, 1e-5, r_max, 8, 33, C0=C0, delta=delta)
    pts = grid.points[:, 1:-1].reshape(-1, 2)
    back = unstraighten(profile, C0, delta, straighten(profile, C0, delta, pts))
    error = float(np.max(np.linalg.norm(back - pts, axis=-1) / np.linalg.norm(pts, axis=-1)))
    return error < 1e-8, f"max relative round-trip error {error:.2e}"


# coefficients


@check("coefficients")
def trivial_weight(seed: int) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.01, 0.5, size=(64, 2))
    mu = mu_field(trivial_coefficients(2), pts)
    error = float(np.max(np.abs(mu - 1.0)))
    return error < 1e-14, f"max |mu - 1| = {error:.2e}"


@check("coefficients")
def drift_order(seed: int) -> tuple[bool, str]:
    bundle = CoefficientBundle(b=DriftSpec(amp=1.0, order=-0.5))
    tilde = transform_bundle(bundle, 2, 0.5, 0.5)
    report = order_audit(lambda y: tilde.evaluate(y).drift, -0.5, ray_points([0.0, 1.0], np.geomspace(1e-6, 1e-2, 12)))
    return report.passed, f"slope {report.slope:.4f} against {report.expected}"


@check("coefficients")
def ellipticity(seed: int) -> tuple[bool, str]:
    bundle = CoefficientBundle(A=MatrixSpec(kind="linear", amp=0.5))
    lowest = bundle.min_ellipticity(2, 0.1, seed=seed)
    return lowest > 0.0, f"smallest eigenvalue of A on B_0.1: {lowest:.4g}"


# spectral


@check("spectral")
def unit_arc(seed: int) -> tuple[bool, str]:
    eig = solve_cap_eigen(ConeSection.sector(1.0), k_max=3)
    error = float(np.max(np.abs(eig.mu - np.array([1.0, 4.0, 9.0]))))
    return error < 1e-8, f"mu = {eig.mu.tolist()}"


@check("spectral")
def sector_eigenvalue(seed: int) -> tuple[bool, str]:
    return _within(float(solve_cap_eigen(ConeSection.sector(2.0 / 3.0), k_max=1).mu[0]), 2.25, 1e-8)


@check("spectral")
def hemisphere_eigenvalue(seed: int) -> tuple[bool, str]:
    return _within(float(solve_cap_eigen(ConeSection.hemisphere(), k_max=1).mu[0]), 2.0, 1e-7)


@check("spectral")
def orthonormality(seed: int) -> tuple[bool, str]:
    eig = solve_cap_eigen(ConeSection.sector(2.0 / 3.0), k_max=4)
    error = float(np.max(np.abs(eig.gram() - np.eye(eig.size))))
    return error < 1e-8, f"max |Gram - I| = {error:.2e}"


@check("spectral")
def exponent_ladder(seed: int) -> tuple[bool, str]:
    pairs = [(exponents(9.0, 2), (3.0, -3.0)), (exponents(2.0, 3), (1.0, -2.0)), (exponents(0.0, 3), (0.0, -1.0))]
    error = max(abs(p.sigma_plus - e[0]) + abs(p.sigma_minus - e[1]) for p, e in pairs)
    return error < 1e-14, f"max error {error:.2e}"


@check("spectral")
def constant_potential(seed: int) -> tuple[bool, str]:
    V = AngularPotential(kind="constant", c=0.5)
    return _within(lambda_V(ConeSection.hemisphere(), V), 0.5 / 2.25, 1e-6)


@check("spectral")
def admissibility_equivalence(seed: int) -> tuple[bool, str]:
    bad = []
    for c in np.linspace(-1.0, 3.0, 9):
        report = admissibility(ConeSection.hemisphere(), AngularPotential(kind="constant", c=float(c)))
        if not report.consistent:
            bad.append(float(c))
    return not bad, f"inconsistent for c in {bad}" if bad else "Lambda < 1 iff mu1 > -1/4 for c in [-1, 3]"


@check("spectral")
def straight_cap_constant(seed: int) -> tuple[bool, str]:
    profile = BoundaryProfile.sector(2.0 / 3.0)
    reference = float(solve_cap_eigen(profile.section(), k_max=1, n_grid=512).mu[0])
    return _within(mu1_on_shrinking_cap(profile, None, 0.01), reference, 1e-12)


# hardy


@check("hardy")
def hardy_zero_potential(seed: int) -> tuple[bool, str]:
    report = hardy_certificate(BoundaryProfile.cone(0.5 * math.pi), None, 1.0, trials=200, seed=seed)
    return report.passed(), f"min slack {report.min_slack:.3e} over {report.slack_hardy.size} trials"


@check("hardy")
def hardy_constant_potential(seed: int) -> tuple[bool, str]:
    V = AngularPotential(kind="constant", c=0.5)
    report = hardy_certificate(BoundaryProfile.cone(0.5 * math.pi), V, 1.0, trials=200, seed=seed)
    return report.passed(), f"min slack {report.min_slack:.3e}, Lambda = {report.lambda_v:.6f}"


# field


@check("field")
def sector_area(seed: int) -> tuple[bool, str]:
    grid = PolarGrid.build(BoundaryProfile.sector(1.0, radius=2.0), 1e-6, 1.0, 24, 129)
    return _within(quad_bulk(np.ones(grid.shape), grid, 1.0), 0.5 * math.pi, 1e-9)


@check("field")
def arc_length(seed: int) -> tuple[bool, str]:
    grid = PolarGrid.build(BoundaryProfile.sector(1.0, radius=2.0), 1e-6, 1.0, 24, 129)
    return _within(quad_sphere(np.ones(grid.shape), grid, 0.5), 0.5 * math.pi, 1e-9)


@check("field")
def manufactured_harmonic(seed: int) -> tuple[bool, str]:
    grid, modes, _ = _pure_sector()
    pts = grid.points[:, 1:-1].reshape(-1, 2)
    residual = ManufacturedProblem(modes, trivial_coefficients(2)).residual(pts, np.zeros(pts.shape[0]))
    worst = float(np.max(residual))
    return worst < 1e-6, f"max relative operator residual {worst:.2e}"


# almgren


@check("almgren", name="height")
def height_check(seed: int) -> tuple[bool, str]:
    grid, _, w = _pure_sector()
    r = float(grid.radii[np.argmin(np.abs(grid.radii - 0.5))])
    value = height(w, None, r)
    return _within(value / r**3, 1.0, 1e-9)


@check("almgren")
def energy_identity(seed: int) -> tuple[bool, str]:
    grid, _, w = _pure_sector()
    r = float(grid.radii[-5])
    value = energy(w, trivial_coefficients(2), r).value
    return _within(value / (1.5 * r**3), 1.0, 1e-8)


@check("almgren")
def constant_frequency(seed: int) -> tuple[bool, str]:
    _, _, w = _pure_sector()
    trace = frequency_trace(w, trivial_coefficients(2))
    error = float(np.max(np.abs(trace.N - 1.5)))
    return error < 1e-8 and abs(trace.gamma - 1.5) < 1e-8, f"max |N - 1.5| = {error:.2e}, gamma {trace.gamma:.12g}"


@check("almgren")
def hprime_flux(seed: int) -> tuple[bool, str]:
    _, _, w = _pure_sector()
    worst = float(np.max(hprime_consistency(w).relative))
    return worst < 1e-8, f"max relative mismatch {worst:.2e}"


@check("almgren")
def mixture_monotone(seed: int) -> tuple[bool, str]:
    profile = BoundaryProfile.sector(2.0 / 3.0)
    grid = PolarGrid.build(profile, 1e-4, 0.9, 24, 129)
    w = sample_closed_form(SectorModes(section=profile.section(), modes=((1, 1.0), (2, 0.1))), grid)
    trace = frequency_trace(w, trivial_coefficients(2))
    report = monotonicity_report(trace)
    ok = report.violations == 0 and abs(trace.gamma - 1.5) < 1e-3
    return ok, f"{report.violations} decreases, gamma {trace.gamma:.8g}"


@check("almgren")
def growth_limit(seed: int) -> tuple[bool, str]:
    _, _, w = _pure_sector()
    report = growth_audit(frequency_trace(w, trivial_coefficients(2)), 1.5)
    return report.classification == "positive-finite-limit", f"{report.classification}, variation {report.variation:.2e}"


@check("almgren")
def pohozaev_pure(seed: int) -> tuple[bool, str]:
    grid, _, w = _pure_sector()
    report = pohozaev_residual(w, trivial_coefficients(2), float(grid.radii[-5]))
    return report.relative < 1e-8, f"relative residual {report.relative:.2e}"


def _hemisphere_pohozaev(nodes: int, bundle: CoefficientBundle, *, manufactured: bool) -> float:
    profile = BoundaryProfile.cone(0.5 * math.pi)
    grid = PolarGrid.build(profile, 1e-3, 0.5, 24, nodes)
    form = ZonalModes(c=bundle.V.c)
    w = sample_closed_form(form, grid)
    coefficients = BundleField(bundle=bundle, dim=3)
    source = ManufacturedProblem(form, coefficients).source_on(grid) if manufactured else None
    return pohozaev_residual(w, coefficients, float(grid.radii[-3]), source=source).relative


@check("almgren")
def pohozaev_convergence(seed: int) -> tuple[bool, str]:
    bundle = CoefficientBundle(V=AngularPotential(kind="constant", c=0.5))
    coarse = _hemisphere_pohozaev(65, bundle, manufactured=False)
    fine = _hemisphere_pohozaev(129, bundle, manufactured=False)
    ratio = coarse / fine if fine > 0 else math.inf
    return ratio >= 3.5 or fine < 1e-10, f"residuals {coarse:.2e} -> {fine:.2e} (ratio {ratio:.3g})"


@check("almgren")
def pohozaev_manufactured(seed: int) -> tuple[bool, str]:
    bundle = CoefficientBundle(V=AngularPotential(kind="constant", c=0.5), f=Nonlinearity(c=1.0, p=4.0))
    relative = _hemisphere_pohozaev(129, bundle, manufactured=True)
    return relative < 1e-4, f"relative residual {relative:.2e}"


@check("almgren")
def sobolev_scaling(seed: int) -> tuple[bool, str]:
    estimate = sobolev_constant(2, 4.0, samples=50, seed=seed)
    return estimate.constant > 0 and estimate.scaling_error < 1e-8, f"C = {estimate.constant:.4g}, scaling error {estimate.scaling_error:.2e}"


# fourier


def _pure_profile(modes: tuple[tuple[int, float], ...], extra: list[int] | None = None, R: float = 0.05):
    profile = BoundaryProfile.sector(2.0 / 3.0)
    grid = PolarGrid.build(profile, 1e-6, 0.1, 24, 129)
    w = sample_closed_form(SectorModes(section=profile.section(), modes=modes), grid)
    eig = solve_cap_eigen(profile.section(), k_max=4)
    return w, eig, asymptotic_profile(w, trivial_coefficients(2), eig, 1.5, R, extra=extra)


@check("fourier")
def block_identification(seed: int) -> tuple[bool, str]:
    eig = solve_cap_eigen(ConeSection.sector(2.0 / 3.0), k_max=4)
    block = identify_block(3.0, eig)
    return block == (1, 1), f"gamma 3 -> (j0, m) = ({block[0] + 1}, {block[1]})"


@check("fourier")
def projection_orthonormality(seed: int) -> tuple[bool, str]:
    grid, _, w = _pure_sector()
    eig = solve_cap_eigen(ConeSection.sector(2.0 / 3.0), k_max=4)
    lam = float(grid.radii[10])
    phis = phi_coeffs(w, eig, lam) / lam**1.5
    error = abs(phis[0] - 1.0) + float(np.max(np.abs(phis[1:])))
    return error < 1e-4, f"lambda^-gamma phi = {phis.tolist()}"


@check("fourier")
def pure_mode_coefficients(seed: int) -> tuple[bool, str]:
    _, _, result = _pure_profile(((1, 1.0),), extra=[1], R=1e-2)
    betas = result.as_dict()
    error = max(abs(betas[0] - 1.0), abs(betas[1]))
    return error < 1e-10 and result.nontrivial, f"beta = ({betas[0]:.14g}, {betas[1]:.3g})"


@check("fourier")
def mixture_coefficients(seed: int) -> tuple[bool, str]:
    _, _, result = _pure_profile(((1, 1.0), (2, 0.1)), extra=[1])
    betas = result.as_dict()
    error = abs(betas[0] - 1.0) + abs(betas[1] - 0.1)
    return error < 1e-3, f"beta = ({betas[0]:.8g}, {betas[1]:.8g})"


# logexample


@check("logexample")
def boundary_vanishing(seed: int) -> tuple[bool, str]:
    residual = LogCorner(alpha=0.5, sigma=0.3).boundary_residual()
    return residual < 1e-10, f"max |u_log| / scale on the curves {residual:.2e}"


@check("logexample")
def axis_radius(seed: int) -> tuple[bool, str]:
    return _within(float(rho1(np.array([0.5 * math.pi]), 0.5)[0]), math.exp(-0.25), 1e-12)


@check("logexample")
def tangent_relation(seed: int) -> tuple[bool, str]:
    corner = LogCorner(alpha=0.5, sigma=0.3)
    x_max = min(1e-3, 0.5 * corner.profile().radius)
    report = tangent_relation_residual(corner, np.geomspace(1e-7, x_max, 10))
    worst = float(np.max(np.abs(report.residual)))
    return worst < 1e-9, f"max residual {worst:.2e}"


@check("logexample")
def defect_asymptotics(seed: int) -> tuple[bool, str]:
    corner = LogCorner(alpha=0.5, sigma=0.3)
    result = defect_constant(corner, x_max=min(1e-3, 0.5 * corner.profile().radius))
    error = result.relative_error
    return error is not None and error < 0.05, f"constant {result.constant:.6g} vs {result.reference}"


@check("logexample")
def resonant_log_traces(seed: int) -> tuple[bool, str]:
    field = im_zm_log_z(1.5)
    r = np.geomspace(1e-6, 1.0, 13)
    lower, upper = field.ray_traces(r)
    expected = -(math.pi / 1.5) * r**1.5
    error = float(np.max(np.abs(lower)) + np.max(np.abs(upper - expected) / np.abs(expected)))
    return error < 1e-12, f"trace error {error:.2e}"


@check("logexample")
def divergent_height(seed: int) -> tuple[bool, str]:
    corner = LogCorner(alpha=0.5, sigma=0.3)
    profile = corner.profile()
    r_max = min(1e-2, 0.5 * profile.radius)
    grid = PolarGrid.build(profile, r_max * 1e-6, r_max, 12, 65)
    trace = frequency_trace(sample_closed_form(corner.harmonic(), grid), trivial_coefficients(2))
    report = growth_audit(trace, corner.kappa)
    return report.classification == "divergent", f"{report.classification}, log^2 fit R^2 {report.log2_r_squared:.4f}"


def run_check(suite: str, name: str, seed: int) -> CheckResult:
    """Run one registered check; library errors count as failures."""
    try:
        passed, detail = SUITES[suite][name](seed)
    except CornerLensError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    logger.debug(f"{suite}.{name}: {'pass' if passed else 'FAIL'} ({detail})")
    return CheckResult(suite=suite, name=name, passed=bool(passed), detail=detail)


def run_suites(names: list[str], *, seed: int = 0, jobs: int = 1) -> list[CheckResult]:
    """Run the named suites in registration order, on ``jobs`` worker processes.

    Raises:
        KeyError: If a suite name is unknown.
    """
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"Unknown suites {unknown}. Available suites: {list(SUITES)}")
    tasks = [(suite, name) for suite in names for name in SUITES[suite]]
    logger.info(f"Running {len(tasks)} checks from {len(names)} suite(s)")
    if jobs <= 1:
        return [run_check(suite, name, seed) for suite, name in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_check, [s for s, _ in tasks], [n for _, n in tasks], [seed] * len(tasks)))
