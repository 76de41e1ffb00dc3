"""Pipelines behind the ``corner-lens`` commands."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .almgren import (
    FrequencyTrace,
    blowup,
    derivative_identity_residual,
    frequency_trace,
    growth_audit,
    hprime_consistency,
    monotonicity_report,
)
from .coefficients import BundleField, CoefficientField, trivial_coefficients, transform_bundle
from .config import SUITE_NAMES, RunConfig
from .decorators import with_config
from .errors import CornerLensError, GeometryError, UnsupportedConfigurationError, VerificationFailure
from .field import (
    ClosedForm,
    ManufacturedProblem,
    PolarField,
    PolarGrid,
    SectorModes,
    StraightenedModes,
    ZonalModes,
    sample_closed_form,
)
from .fourier import asymptotic_profile, exact_cone_grid, profile_distance, projected_limit, straightened_field
from .geometry import straightening_radius, validate_c0
from .hardy import hardy_certificate
from .logexample import LogCorner, defect_constant, tangent_relation_residual
from .logger import configure_logging, logger
from .output import ArtifactWriter
from .profiles import LogCurve
from .solver import pull_back_field, sector_coefficients, solve_linear_dirichlet
from .spectral import admissibility, mu1_on_shrinking_cap, solve_cap_eigen

TRACE_COLUMNS = ["r", "H", "D", "N", "derivative_residual", "H_over_r2gamma", "D_gradient", "D_drift", "D_potential", "D_h", "D_nonlinear"]


@dataclass(frozen=True)
class Problem:
    """A sampled solution w on Ω̃ with the coefficients of its equation.

    ``cone_form`` is the closed form of v = w∘Φ on the tangent cone, when
    there is one; ``exact`` tells whether w solves the homogeneous equation.
    """

    grid: PolarGrid
    coefficients: CoefficientField
    w: PolarField
    cone_form: ClosedForm | None
    exact: bool
    gamma_reference: float | None


def domain_coefficients(config: RunConfig) -> CoefficientField:
    """Coefficients of the equation on the convexified domain Ω̃."""
    dim = config.profile.dim
    if config.straightening.C0 == 0.0:
        return BundleField(bundle=config.bundle, dim=dim)
    return transform_bundle(config.bundle, dim, config.straightening.C0, config.straightening.delta)


def cone_coefficients(config: RunConfig) -> CoefficientField:
    """Coefficients of the equation satisfied by v = w∘Φ on the tangent cone."""
    return sector_coefficients(config.bundle, config.profile, config.straightening.C0, config.straightening.delta)


def is_exact(config: RunConfig) -> bool:
    """Whether the configured closed form solves the equation without a source."""
    bundle = config.bundle
    return (
        config.profile.is_straight
        and config.straightening.C0 == 0.0
        and (bundle.A.kind == "identity" or bundle.A.amp == 0.0)
        and bundle.b.amp == 0.0
        and bundle.h.amp == 0.0
        and bundle.f.c == 0.0
        and (bundle.V.is_zero or (config.solution.kind == "zonal" and bundle.V.kind == "constant"))
    )


def check_straightening(config: RunConfig) -> None:
    """Validate the corner-defect bound and that Ξ is injective on the grid range.

    Raises:
        GeometryError: If either check fails.
    """
    profile = config.profile
    if profile.is_straight or isinstance(profile.perturbation, LogCurve):
        return
    C0, delta = config.straightening.C0, config.straightening.delta
    validate_c0(profile, C0, delta)
    limit = straightening_radius(profile, C0, delta)
    if config.grid.r_max > limit:
        msg = f"grid.r_max={config.grid.r_max} exceeds the straightening radius {limit:.6g}"
        raise GeometryError(msg)


def build_grid(config: RunConfig) -> PolarGrid:
    g = config.grid
    return PolarGrid.build(
        config.profile,
        g.r_min,
        g.r_max,
        g.rings_per_decade,
        g.angular_nodes,
        C0=config.straightening.C0,
        delta=config.straightening.delta,
    )


def cone_form(config: RunConfig) -> ClosedForm:
    """Closed form of the configured modes on the tangent cone."""
    modes = tuple((int(k), float(w)) for k, w in config.solution.modes)
    if config.solution.kind == "zonal":
        section = config.profile.section()
        if abs(section.upper - 0.5 * math.pi) > 1e-12:
            msg = "Zonal modes are available on the half space only"
            raise UnsupportedConfigurationError(msg)
        c = config.bundle.V.c if config.bundle.V.kind == "constant" else 0.0
        return ZonalModes(modes=modes, c=c)
    return SectorModes(section=config.profile.section(), modes=modes)


def build_problem(config: RunConfig) -> Problem:
    """Sample or solve the configured solution on the polar grid of Ω̃."""
    check_straightening(config)
    grid = build_grid(config)
    coefficients = domain_coefficients(config)
    kind = config.solution.kind
    C0, delta = config.straightening.C0, config.straightening.delta

    if kind == "log_harmonic":
        curve = config.profile.perturbation
        assert isinstance(curve, LogCurve)
        corner = LogCorner(alpha=curve.alpha, sigma=curve.sigma)
        w = sample_closed_form(corner.harmonic(), grid)
        return Problem(grid, coefficients, w, None, exact=True, gamma_reference=corner.kappa)

    form = cone_form(config)
    reference = float(getattr(form, "leading_exponent"))

    if kind == "solve":
        g = config.grid
        r_max = g.r_max

        def outer(theta: np.ndarray) -> np.ndarray:
            return form.value(np.stack([r_max * np.cos(theta), r_max * np.sin(theta)], axis=-1))

        v = solve_linear_dirichlet(
            config.bundle,
            config.profile,
            outer,
            r_min=g.r_min,
            r_max=g.r_max,
            rings_per_decade=g.rings_per_decade,
            angular_nodes=g.angular_nodes,
            inner_decades=g.inner_decades,
            C0=C0,
            delta=delta,
        )
        w = v if config.profile.is_straight and C0 == 0.0 else pull_back_field(v, grid)
        return Problem(grid, coefficients, w, None, exact=True, gamma_reference=reference)

    exact = is_exact(config)
    domain_form = form if config.profile.is_straight and C0 == 0.0 else StraightenedModes(form, config.profile, C0, delta)
    w = sample_closed_form(domain_form, grid)
    return Problem(grid, coefficients, w, form, exact=exact, gamma_reference=reference)


def trace_radii(config: RunConfig, grid: PolarGrid) -> np.ndarray:
    if config.radii.values is not None:
        return np.asarray(config.radii.values, dtype=float)
    return grid.radii[:: config.radii.stride]


def _trace_rows(trace: FrequencyTrace, gamma: float) -> list[list[Any]]:
    residual = np.full(trace.radii.size, np.nan)
    if trace.radii.size >= 3:
        residual[1:-1] = derivative_identity_residual(trace).residual
    ratio = trace.H / trace.radii ** (2.0 * gamma)
    rows = []
    for j, r in enumerate(trace.radii):
        rows.append(
            [
                r,
                trace.H[j],
                trace.D[j],
                trace.N[j],
                None if np.isnan(residual[j]) else residual[j],
                ratio[j],
                *(trace.terms[name][j] for name in ("gradient", "drift", "potential", "h", "nonlinear")),
            ]
        )
    return rows


def cmd_spectrum(config: RunConfig, writer: ArtifactWriter) -> dict[str, Any]:
    """Cap eigenvalues, exponent ladder and admissibility of V; Hardy certificate on straight cones in ℝ³."""
    spec = config.spectrum
    cap = config.profile.section()
    V = config.bundle.V
    eig = solve_cap_eigen(cap, V, k_max=spec.k_max, n_grid=spec.n_grid, m=spec.azimuthal)
    ladder = eig.exponent_ladder()
    adm = admissibility(cap, V, n_grid=spec.n_grid)

    writer.csv(
        "spectrum.csv",
        ["k", "mu", "mu_error", "sigma_plus", "sigma_minus"],
        [[k + 1, eig.mu[k], eig.errors[k], ladder[k].sigma_plus, ladder[k].sigma_minus] for k in range(eig.size)],
        tolerances={"richardson": 1e-6},
    )
    writer.csv(
        "eigenfunctions.csv",
        ["angle", *(f"psi_{k + 1}" for k in range(eig.size))],
        [[eig.angles[j], *eig.psi[:, j]] for j in range(eig.angles.size)],
    )

    summary: dict[str, Any] = {
        "dim": cap.dim,
        "cap": {"lower": cap.lower, "upper": cap.upper},
        "mu": eig.mu,
        "mu_error": eig.errors,
        "sigma_plus": [pair.sigma_plus for pair in ladder],
        "sigma_minus": [pair.sigma_minus for pair in ladder],
        "lambda_v": adm.lambda_v,
        "admissible": adm.by_lambda,
        "admissible_by_eigenvalue": adm.by_eigenvalue,
        "admissibility_consistent": adm.consistent,
        "mu1_threshold": adm.threshold,
    }

    profile = config.profile
    if not profile.is_straight and not isinstance(profile.perturbation, LogCurve):
        radii = np.geomspace(config.grid.r_min, config.grid.r_max, 7)
        mu1 = [mu1_on_shrinking_cap(profile, V, float(r), config.straightening.C0, config.straightening.delta, n_grid=min(spec.n_grid, 512)) for r in radii]
        writer.csv("shrinking_caps.csv", ["r", "mu1"], [[r, m] for r, m in zip(radii, mu1)])
        summary["mu1_shrinking"] = mu1

    if profile.dim == 3 and profile.is_straight:
        report = hardy_certificate(profile, V, config.hardy.radius, config.hardy.trials, k_max=spec.k_max, n_grid=min(spec.n_grid, 512), seed=config.seed)
        writer.csv(
            "hardy.csv",
            ["trial", "slack_hardy", "slack_half", "slack_energy", "slack_coercive"],
            [
                [i, report.slack_hardy[i], report.slack_half[i], report.slack_energy[i], report.slack_coercive[i]]
                for i in range(report.slack_hardy.size)
            ],
            tolerances={"slack": 1e-10},
        )
        summary["hardy"] = {"trials": int(report.slack_hardy.size), "min_slack": report.min_slack, "passed": report.passed()}

    writer.json("summary.json", summary, tolerances={"richardson": 1e-6})
    return summary


def cmd_frequency(config: RunConfig, writer: ArtifactWriter) -> dict[str, Any]:
    """Trace H, D and N, extract γ and audit the growth of H."""
    problem = build_problem(config)
    trace = frequency_trace(problem.w, problem.coefficients, trace_radii(config, problem.grid), decay=config.radii.decay)
    gamma = problem.gamma_reference if problem.gamma_reference is not None else trace.gamma
    growth = growth_audit(trace, gamma, window_decades=config.radii.window_decades, tolerance=config.radii.tolerance)
    derivative = derivative_identity_residual(trace)
    monotone = monotonicity_report(trace)
    hprime = hprime_consistency(problem.w, problem.coefficients)

    writer.csv("trace.csv", TRACE_COLUMNS, _trace_rows(trace, gamma), tolerances={"growth_variation": config.radii.tolerance})
    summary = {
        "gamma": trace.gamma,
        "gamma_error": trace.gamma_error,
        "gamma_model": trace.gamma_model,
        "gamma_reference": problem.gamma_reference,
        "classification": growth.classification,
        "sup_ratio": growth.sup_ratio,
        "variation": growth.variation,
        "doubling_deviation": growth.doubling_deviation,
        "doubling_deviation_full": growth.doubling_deviation_full,
        "log2_r_squared": growth.log2_r_squared,
        "derivative_residual_max": derivative.max_abs,
        "derivative_residual_slope": derivative.slope,
        "hprime_relative_max": float(np.max(np.abs(hprime.relative))),
        "monotonicity_violations": monotone.violations,
        "monotonicity_max_drop": monotone.max_drop,
        "closure_shift": trace.closure_shift,
        "exact_solution": problem.exact,
    }
    writer.json("summary.json", summary, tolerances={"growth_variation": config.radii.tolerance})
    return summary


def cmd_profile(config: RunConfig, writer: ArtifactWriter) -> dict[str, Any]:
    """Limit coefficients β_i, the reconstructed angular profile and the blow-up comparison."""
    problem = build_problem(config)
    trace = frequency_trace(problem.w, problem.coefficients, trace_radii(config, problem.grid), decay=config.radii.decay)
    spec = config.spectrum
    eig = solve_cap_eigen(config.profile.section(), config.bundle.V, k_max=spec.k_max, n_grid=spec.n_grid, m=spec.azimuthal)
    coefficients = cone_coefficients(config)

    source = None
    if config.solution.manufactured and not problem.exact and problem.cone_form is not None:
        source = ManufacturedProblem(problem.cone_form, coefficients).source_on(exact_cone_grid(problem.grid), interior=True)

    extra = [i - 1 for i in config.fourier.extra_indices]
    R = config.fourier_radius
    result = asymptotic_profile(
        problem.w,
        coefficients,
        eig,
        trace.gamma,
        R,
        source=source,
        extra=extra,
        radius_ratio=config.fourier.radius_ratio,
        tol=config.fourier.block_tolerance,
    )
    v = straightened_field(problem.w)
    projected = {b.index: projected_limit(v, eig, b.index, decay=config.radii.decay) for b in result.betas}

    lam = config.blowup_scale
    snapshot = blowup(v, lam, coefficients)
    angles, _, weights = snapshot.rescaled.grid.ring_at(1.0)
    values, _, _ = snapshot.rescaled.at_radius(1.0)
    block = {b.index: b.beta for b in result.betas if b.index in result.block}
    distance = profile_distance(block, eig, angles, values, weights)

    writer.csv(
        "betas.csv",
        ["i", "mu", "sigma_plus", "beta", "R", "r_independence", "boundary_term", "correction", "tail_share", "projected_limit"],
        [
            [b.index + 1, b.mu, b.sigma, b.beta, b.R, result.r_independence, b.boundary_term, b.correction, b.tail_share, projected[b.index]]
            for b in result.betas
        ],
        tolerances={"r_independence": 1e-3},
    )
    writer.csv("limit_profile.csv", ["angle", "value"], list(zip(result.profile.angles, result.profile.values)))
    norm = result.profile.norm if result.profile.norm > 0 else 1.0
    limit_at_nodes = sum(beta * eig.evaluate(i, angles) for i, beta in block.items()) / norm
    writer.csv("blowup_trace.csv", ["angle", "blowup", "limit"], list(zip(angles, values, limit_at_nodes)))

    summary = {
        "gamma": trace.gamma,
        "gamma_error": trace.gamma_error,
        "j0": result.j0 + 1,
        "m": result.m,
        "betas": {str(b.index + 1): b.beta for b in result.betas},
        "projected_limits": {str(i + 1): p for i, p in projected.items()},
        "r_independence": result.r_independence,
        "profile_norm": result.profile.norm,
        "nontrivial": result.nontrivial,
        "blowup_lambda": lam,
        "blowup_cap_norm": snapshot.cap_norm,
        "blowup_distance": distance,
        "manufactured_source": source is not None,
    }
    writer.json("summary.json", summary, tolerances={"r_independence": 1e-3, "blowup_distance": 2e-2})
    return summary


def cmd_counterexample(config: RunConfig, writer: ArtifactWriter) -> dict[str, Any]:
    """Witness bundle of the logarithmic corner: curves, frequency trace, growth class and corner defect."""
    params = config.counterexample
    corner = LogCorner(alpha=params.alpha, sigma=params.sigma)
    profile = corner.profile()
    g = config.grid
    if g.r_max >= profile.radius:
        msg = f"grid.r_max={g.r_max} exceeds the curve window {profile.radius:.6g}"
        raise GeometryError(msg)

    curves = corner.curve_samples(params.samples * 8)
    rows = [["right", t, r, x, y] for t, r, x, y in zip(curves["theta"], curves["rho"], curves["x"], curves["y"])]
    rows += [["left", math.pi - t, r, -x, y] for t, r, x, y in zip(curves["theta"], curves["rho"], curves["x"], curves["y"])]
    writer.csv("curves.csv", ["branch", "theta", "rho", "x", "y"], rows)
    boundary = corner.boundary_residual()

    grid = PolarGrid.build(profile, g.r_min, g.r_max, g.rings_per_decade, g.angular_nodes)
    w = sample_closed_form(corner.harmonic(), grid)
    trace = frequency_trace(w, trivial_coefficients(2), trace_radii(config, grid), decay=config.radii.decay)
    gamma = corner.kappa
    growth = growth_audit(trace, gamma, window_decades=config.radii.window_decades, tolerance=config.radii.tolerance)
    log_bound = np.abs(trace.N - gamma) * np.abs(np.log(trace.radii))
    writer.csv(
        "trace.csv",
        ["r", "H", "D", "N", "N_minus_gamma_log_r", "H_over_r2gamma"],
        [[r, h, d, n, b, h / r ** (2.0 * gamma)] for r, h, d, n, b in zip(trace.radii, trace.H, trace.D, trace.N, log_bound)],
    )

    defect = defect_constant(corner, x_min=params.x_min, x_max=min(params.x_max, 0.5 * profile.radius), samples=params.samples)
    writer.csv("defect.csv", ["x", "normalized_defect"], list(zip(defect.x, defect.normalized)))
    tangent = tangent_relation_residual(corner, defect.x)

    summary = {
        "alpha": params.alpha,
        "branch": corner.branch,
        "gamma": gamma,
        "boundary_residual": boundary,
        "log_bound_max": float(np.max(log_bound)),
        "classification": growth.classification,
        "log2_r_squared": growth.log2_r_squared,
        "log2_coefficient": growth.log2_coefficient,
        "defect_constant": defect.constant,
        "defect_reference": defect.reference,
        "defect_relative_error": defect.relative_error,
        "tangent_residual_max": float(np.max(np.abs(tangent.residual))),
        "tangent_expansion_inner": float(tangent.expansion[0]),
        "tangent_limit": tangent.limit,
    }
    writer.json("summary.json", summary, tolerances={"boundary": 1e-10, "log2_r_squared": 0.99, "defect_relative": 0.05})
    return summary


def cmd_verify(config: RunConfig, writer: ArtifactWriter) -> dict[str, Any]:
    """Run the property suites and write the pass/fail matrix.

    Raises:
        VerificationFailure: If any check fails.
    """
    from .suites import run_suites

    names = list(config.verify.suites) or list(SUITE_NAMES)
    results = run_suites(names, seed=config.seed, jobs=config.jobs)
    writer.csv("verify.csv", ["suite", "check", "passed", "detail"], [[r.suite, r.name, r.passed, r.detail] for r in results])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.suite:<13} {r.name:<32} {r.detail}")
    failed = [f"{r.suite}.{r.name}" for r in results if not r.passed]
    if failed:
        raise VerificationFailure(failed)
    return {"checks": len(results), "failed": 0}


COMMAND_TABLE: dict[str, Callable[[RunConfig, ArtifactWriter], dict[str, Any]]] = {
    "spectrum": cmd_spectrum,
    "frequency": cmd_frequency,
    "profile": cmd_profile,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


def run(config: RunConfig, command: str) -> dict[str, Any]:
    """Run one command on a resolved configuration, writing into ``config.outputs.directory``.

    Errors are written as ``error.json`` before they propagate.
    """
    configure_logging(config.log_level)
    config.log_summary()
    directory = Path(config.outputs.directory)
    writer = ArtifactWriter(directory, config)
    config.export_config(directory / "config.resolved.json")
    try:
        return COMMAND_TABLE[command](config, writer)
    except CornerLensError as exc:
        logger.error(f"{command} failed: {exc}")
        writer.json("error.json", exc.to_dict())
        raise


@with_config()
def run_command(config: RunConfig, command: str) -> dict[str, Any]:
    """Config-driven entry: parses a command line and dispatches to :func:`run`."""
    return run(config, command)
