"""Numerical certificates for the Hardy inequalities with a boundary term.

Trial fields live on Ω_r of an axisymmetric straight cone in ℝ³ and are
finite sums v = Σ_j R_j(log|y|)Ψ_j(φ) with Ψ_j combinations of Dirichlet
cap eigenfunctions, so v = 0 on the lateral boundary exactly. Integrals
are taken in (t, φ) with t = log|y|, where

    ∫|∇v|² dy = ∫ e^t (v_t² + v_φ²) dt dσ,    ∫ v²/|y|² dy = ∫ e^t v² dt dσ,

by composite Gauss–Legendre rules; below the quadrature window only the
power component survives and its tail is integrated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .coefficients import AngularPotential
from .errors import NumericalError, UnsupportedConfigurationError
from .logger import logger
from .numerics import FloatArray
from .profiles import BoundaryProfile
from .spectral import CapEigensystem, exponents, lambda_V, solve_cap_eigen

WINDOW_DECADES = 10.0
PANEL_WIDTH = 0.25
PANEL_NODES = 12
ANGULAR_NODES = 192


@dataclass(frozen=True)
class HardyTrial:
    """v = e^{a t}η(t)·Σ_k power_k ψ_k + B(t)·Σ_k bump_k ψ_k.

    η equals 1 below ``cut_start`` and moves smoothly to ``1 − cut_depth``
    over ``cut_width``; B is a smooth bump centered at ``bump_center``.
    """

    a: float
    power: tuple[float, ...]
    bump: tuple[float, ...] = ()
    cut_start: float = 0.0
    cut_width: float = 1.0
    cut_depth: float = 0.0
    bump_center: float = 0.0
    bump_width: float = 1.0

    def __post_init__(self) -> None:
        if self.a <= -0.5:
            msg = f"Power trials need a > -1/2 to stay in H^1, got a={self.a}"
            raise NumericalError(msg)

    def radial(self, t: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray]:
        """Power and bump radial factors with their t-derivatives."""
        u = np.clip((t - self.cut_start) / self.cut_width, 0.0, 1.0)
        step = u**3 * (10.0 - 15.0 * u + 6.0 * u**2)
        dstep = 30.0 * u**2 * (1.0 - u) ** 2 / self.cut_width
        eta = 1.0 - self.cut_depth * step
        power = np.exp(self.a * t)
        r0 = power * eta
        dr0 = self.a * r0 - power * self.cut_depth * dstep

        s = (t - self.bump_center) / self.bump_width
        inside = np.abs(s) < 1.0
        safe = np.where(inside, s, 0.0)
        denom = 1.0 - safe**2
        r1 = np.where(inside, np.exp(-1.0 / np.where(inside, denom, 1.0)), 0.0)
        dr1 = np.where(inside, r1 * (-2.0 * safe / np.where(inside, denom, 1.0) ** 2) / self.bump_width, 0.0)
        return r0, dr0, r1, dr1

    def breakpoints(self) -> list[float]:
        points = [self.cut_start, self.cut_start + self.cut_width]
        if self.bump:
            points += [self.bump_center - self.bump_width, self.bump_center + self.bump_width]
        return points


@dataclass(frozen=True)
class HardyTerms:
    """Integrals of one trial over Ω_r (N = 3, straight cone)."""

    gradient: float
    potential: float
    weighted: float
    boundary: float


@dataclass(frozen=True)
class HardyReport:
    """Slacks LHS − RHS per trial, normalized by the sum of absolute terms."""

    radius: float
    mu1: float
    lambda_v: float
    slack_hardy: FloatArray
    slack_half: FloatArray
    slack_energy: FloatArray
    slack_coercive: FloatArray
    trials: list[HardyTrial] = field(repr=False, default_factory=list)

    @property
    def min_slack(self) -> float:
        return float(np.min(self.slack_hardy))

    def passed(self, tol: float = 1e-10) -> bool:
        slacks = (self.slack_hardy, self.slack_half, self.slack_energy, self.slack_coercive)
        worst = min(float(np.min(s)) for s in slacks)
        return worst >= -tol


def _panels(lo: float, hi: float, breaks: list[float]) -> tuple[FloatArray, FloatArray]:
    knots = sorted({lo, hi, *[b for b in breaks if lo < b < hi]})
    nodes, weights = leggauss(PANEL_NODES)
    ts: list[FloatArray] = []
    ws: list[FloatArray] = []
    for a, b in zip(knots[:-1], knots[1:]):
        pieces = max(1, math.ceil((b - a) / PANEL_WIDTH))
        edges = np.linspace(a, b, pieces + 1)
        for p, q in zip(edges[:-1], edges[1:]):
            ts.append(0.5 * (q - p) * nodes + 0.5 * (p + q))
            ws.append(0.5 * (q - p) * weights)
    return np.concatenate(ts), np.concatenate(ws)


class _AngularTables:
    """Eigenfunctions, derivatives and V on a Gauss–Legendre rule over the cap."""

    def __init__(self, eig: CapEigensystem, V: AngularPotential) -> None:
        nodes, weights = leggauss(ANGULAR_NODES)
        top = eig.cap.upper
        self.phi = 0.5 * top * (nodes + 1.0)
        self.weights = 0.5 * top * weights * 2.0 * math.pi * np.sin(self.phi)
        self.psi = np.stack([eig.evaluate(k, self.phi) for k in range(eig.size)])
        self.dpsi = np.stack([eig.derivative(k, self.phi) for k in range(eig.size)])
        self.V = V.of_colatitude(self.phi)
        self.edge_psi = np.stack([eig.evaluate(k, np.array([top]))[0] for k in range(eig.size)])


def trial_terms(trial: HardyTrial, tables: _AngularTables, r: float) -> HardyTerms:
    """Gradient, V-weighted, |y|⁻²-weighted and S_r integrals of a trial."""
    t_max = math.log(r)
    t_min = t_max - WINDOW_DECADES * math.log(10.0)
    if trial.cut_start < t_min or (trial.bump and trial.bump_center - trial.bump_width < t_min):
        msg = "Trial components must stay inside the quadrature window"
        raise NumericalError(msg)
    t, wt = _panels(t_min, t_max, trial.breakpoints())
    r0, dr0, r1, dr1 = trial.radial(t)

    k = len(trial.power)
    psi0 = np.asarray(trial.power) @ tables.psi[:k]
    dpsi0 = np.asarray(trial.power) @ tables.dpsi[:k]
    if trial.bump:
        kb = len(trial.bump)
        psi1 = np.asarray(trial.bump) @ tables.psi[:kb]
        dpsi1 = np.asarray(trial.bump) @ tables.dpsi[:kb]
    else:
        psi1 = dpsi1 = np.zeros_like(psi0)

    v = r0[:, None] * psi0 + r1[:, None] * psi1
    vt = dr0[:, None] * psi0 + dr1[:, None] * psi1
    vphi = r0[:, None] * dpsi0 + r1[:, None] * dpsi1
    et = np.exp(t)

    def integrate(density: FloatArray) -> float:
        return float(np.sum(wt * et * (density @ tables.weights)))

    gradient = integrate(vt**2 + vphi**2)
    potential = integrate(tables.V * v**2)
    weighted = integrate(v**2)

    # exact tail of the pure power component, every density ∝ e^{(2a+1)t}
    kappa = 2.0 * trial.a + 1.0
    scale = math.exp(kappa * t_min) / kappa
    a2 = trial.a**2
    gradient += scale * float(tables.weights @ (a2 * psi0**2 + dpsi0**2))
    potential += scale * float(tables.weights @ (tables.V * psi0**2))
    weighted += scale * float(tables.weights @ psi0**2)

    rr0, _, rr1, _ = trial.radial(np.array([t_max]))
    edge = float(rr0[0]) * psi0 + float(rr1[0]) * psi1
    boundary = 0.5 * r * float(tables.weights @ edge**2)
    return HardyTerms(gradient=gradient, potential=potential, weighted=weighted, boundary=boundary)


def random_trials(count: int, r: float, k_max: int, rng: np.random.Generator) -> list[HardyTrial]:
    """Randomized trials: truncated powers with exponents in (−1/2, 3] plus radial bumps."""
    t_max = math.log(r)
    t_min = t_max - WINDOW_DECADES * math.log(10.0)
    trials = []
    for _ in range(count):
        width = rng.uniform(0.5, 3.0)
        cut_start = rng.uniform(t_min + 1.0, t_max - width)
        bump_width = rng.uniform(0.5, 3.0)
        center = rng.uniform(t_min + bump_width + 0.1, t_max + 0.5 * bump_width)
        with_bump = rng.random() < 0.7
        trials.append(
            HardyTrial(
                a=float(rng.uniform(-0.45, 3.0)),
                power=tuple(rng.normal(size=k_max).tolist()) if rng.random() < 0.9 else tuple([0.0] * k_max),
                bump=tuple(rng.normal(size=k_max).tolist()) if with_bump else (),
                cut_start=float(cut_start),
                cut_width=float(width),
                cut_depth=float(rng.uniform(0.0, 1.0)),
                bump_center=float(center),
                bump_width=float(bump_width),
            )
        )
    return trials


def hardy_certificate(
    profile: BoundaryProfile,
    V: AngularPotential | None,
    r: float,
    trials: int | list[HardyTrial] = 1000,
    *,
    k_max: int = 4,
    n_grid: int = 512,
    seed: int = 0,
) -> HardyReport:
    """Evaluate the Hardy inequality with boundary term and its corollaries.

    The first generated trial is the extremal power r^{σ₁⁺}ψ₁. The four
    slacks compare, for every trial,

    - ∫(|∇v|² − Vv²/|y|²) + (r/2)∫_C v² against (1/4 + μ₁)∫v²/|y|²,
    - the same left side against half of that right side,
    - the left side with boundary factor (1+Λ)/2 against (1−Λ)/2·∫|∇v|²,
    - the left side with boundary factor (3+Λ)/4 against
      min{1/4 + μ₁, 1 − Λ}/4·∫(|∇v|² + v²/|y|²).

    The last is the coercivity bound without its Sobolev term, whose best
    constant on the ball is not known in closed form.

    Raises:
        UnsupportedConfigurationError: Unless the profile is a straight cone in ℝ³.
    """
    if profile.dim != 3 or not profile.is_straight:
        msg = "Hardy certificates are implemented for straight axisymmetric cones in R^3"
        raise UnsupportedConfigurationError(msg)
    potential = V or AngularPotential()
    cap = profile.section()
    eig = solve_cap_eigen(cap, potential, k_max=k_max, n_grid=n_grid)
    mu1 = float(eig.mu[0])
    lam = lambda_V(cap, potential, n_grid)
    tables = _AngularTables(eig, potential)

    if isinstance(trials, int):
        rng = np.random.default_rng(seed)
        t_max = math.log(r)
        sigma = exponents(mu1, 3).sigma_plus
        first = HardyTrial(a=sigma, power=(1.0,), cut_start=t_max - 2.0, cut_width=1.0)
        trial_list = [first, *random_trials(max(trials - 1, 0), r, k_max, rng)]
    else:
        trial_list = list(trials)

    hardy_const = 0.25 + mu1
    coercive_const = 0.25 * min(hardy_const, 1.0 - lam)
    hardy_slack, half_slack, energy_slack, coercive_slack = [], [], [], []
    for trial in trial_list:
        terms = trial_terms(trial, tables, r)
        energy = terms.gradient - terms.potential
        scale = terms.gradient + abs(terms.potential) + terms.boundary + hardy_const * terms.weighted
        scale = scale if scale > 0 else 1.0
        hardy_slack.append((energy + terms.boundary - hardy_const * terms.weighted) / scale)
        half_slack.append((energy + terms.boundary - 0.5 * hardy_const * terms.weighted) / scale)
        energy_slack.append((energy + 0.5 * (1.0 + lam) * terms.boundary - 0.5 * (1.0 - lam) * terms.gradient) / scale)
        coercive_slack.append(
            (energy + 0.25 * (3.0 + lam) * terms.boundary - coercive_const * (terms.gradient + terms.weighted)) / scale
        )

    report = HardyReport(
        radius=r,
        mu1=mu1,
        lambda_v=lam,
        slack_hardy=np.asarray(hardy_slack),
        slack_half=np.asarray(half_slack),
        slack_energy=np.asarray(energy_slack),
        slack_coercive=np.asarray(coercive_slack),
        trials=trial_list,
    )
    logger.debug(f"Hardy certificate at r={r}: {len(trial_list)} trials, min slack {report.min_slack:.3e}")
    return report
