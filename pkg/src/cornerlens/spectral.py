"""Dirichlet eigenproblems for −Δ_S − V on spherical caps.

Planar arcs use three-point second differences. Axisymmetric caps in ℝ³
are solved in x = cos φ, where the Legendre-type operator
−((1−x²)f′)′ + m²f/(1−x²) − Vf is discretized by vertex-centered finite
volumes with a lumped mass matrix (dσ = 2π dx). Both tridiagonal problems
go to ``scipy.linalg.eigh_tridiagonal``; eigenvalues are Richardson
extrapolated from grids n and 2n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .coefficients import AngularPotential
from .errors import AdmissibilityError, DomainError, NumericalError, ResolutionError
from .geometry import section_at_radius
from .logger import logger
from .numerics import FloatArray, richardson_pair
from .profiles import BoundaryProfile, ConeSection

MIN_GRID = 64
NODES_PER_MODE = 8


@dataclass(frozen=True)
class ExponentPair:
    """Roots of σ² + (N−2)σ − μ = 0."""

    sigma_plus: float
    sigma_minus: float


def exponents(mu: float, dim: int) -> ExponentPair:
    """Characteristic exponents −(N−2)/2 ± √(((N−2)/2)² + μ).

    Raises:
        AdmissibilityError: If μ lies below −((N−2)/2)².
    """
    half = 0.5 * (dim - 2)
    disc = half * half + mu
    if disc < -1e-12 * max(1.0, abs(mu)):
        msg = f"mu={mu} is below the threshold {-half * half} for N={dim}"
        raise AdmissibilityError(msg)
    root = math.sqrt(max(disc, 0.0))
    return ExponentPair(sigma_plus=-half + root, sigma_minus=-half - root)


@dataclass(frozen=True)
class _Discretization:
    """Symmetrized tridiagonal operator with its nodes and lumped weights."""

    diag: FloatArray
    offdiag: FloatArray
    weights: FloatArray
    unknowns: slice
    nodes: FloatArray


def _arc_operator(cap: ConeSection, n: int) -> _Discretization:
    h = cap.opening / n
    size = n - 1
    diag = np.full(size, 2.0 / h**2)
    offdiag = np.full(size - 1, -1.0 / h**2)
    nodes = cap.lower + h * np.arange(n + 1)
    weights = np.full(n + 1, h)
    weights[[0, -1]] = 0.5 * h
    return _Discretization(diag=diag, offdiag=offdiag, weights=weights, unknowns=slice(1, n), nodes=nodes)


def _legendre_parts(cap: ConeSection, n: int, m: int) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray, slice]:
    """Stiffness (diagonal, off-diagonal), lumped mass and x-nodes on [cos φ₀, 1]."""
    x0 = math.cos(cap.upper)
    h = (1.0 - x0) / n
    x = x0 + h * np.arange(n + 1)
    x[-1] = 1.0
    mid = 0.5 * (x[:-1] + x[1:])
    flux = (1.0 - mid**2) / h
    mass = np.full(n + 1, h)
    mass[-1] = 0.5 * h
    stop = n + 1 if m == 0 else n
    unknowns = slice(1, stop)
    idx = np.arange(1, stop)
    diag = flux[idx - 1] + np.where(idx < n, flux[np.minimum(idx, n - 1)], 0.0)
    if m > 0:
        diag = diag + m * m / (1.0 - x[idx] ** 2) * mass[idx]
    offdiag = -flux[idx[:-1]]
    return diag, offdiag, mass, x, unknowns


def _cap_operator(cap: ConeSection, V: AngularPotential, n: int, m: int) -> _Discretization:
    if cap.dim == 2:
        if not V.is_zero:
            msg = "Planar caps carry no angular potential"
            raise DomainError(msg)
        return _arc_operator(cap, n)
    diag, offdiag, mass, x, unknowns = _legendre_parts(cap, n, m)
    idx = np.arange(unknowns.start, unknowns.stop)
    diag = diag - V.of_colatitude(np.arccos(x[idx])) * mass[idx]
    scale = 1.0 / np.sqrt(mass[idx])
    weights = 2.0 * math.pi * mass
    weights[0] = 2.0 * math.pi * 0.5 * (x[1] - x[0])
    return _Discretization(
        diag=diag * scale**2,
        offdiag=offdiag * scale[:-1] * scale[1:],
        weights=weights,
        unknowns=unknowns,
        nodes=x,
    )


def discrete_eigenpairs(
    cap: ConeSection, V: AngularPotential, k_max: int, n: int, m: int = 0
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Unextrapolated eigenvalues, node values (k_max, n+1) and nodes of the grid with n cells."""
    if n < MIN_GRID:
        msg = f"n_grid={n} is below the minimum {MIN_GRID}"
        raise ResolutionError(msg)
    if k_max < 1 or k_max > n // NODES_PER_MODE:
        msg = f"k_max={k_max} exceeds the {n // NODES_PER_MODE} modes resolved by n_grid={n}"
        raise ResolutionError(msg)
    if cap.dim == 2 and m != 0:
        msg = "Azimuthal index applies to N=3 caps only"
        raise DomainError(msg)
    disc = _cap_operator(cap, V, n, m)
    if cap.dim == 2:
        return _arc_eigenpairs(cap, k_max, n, disc.nodes)
    try:
        values, vectors = eigh_tridiagonal(disc.diag, disc.offdiag, select="i", select_range=(0, k_max - 1))
    except np.linalg.LinAlgError as exc:
        msg = f"Tridiagonal eigensolve failed: {exc}"
        raise NumericalError(msg) from exc

    samples = np.zeros((k_max, disc.nodes.size))
    mass = disc.weights[disc.unknowns] / (2.0 * math.pi)
    samples[:, disc.unknowns] = vectors.T / np.sqrt(mass)
    norms = np.sqrt(samples**2 @ disc.weights)
    samples /= norms[:, None]
    for row in samples:
        lead = row[np.flatnonzero(np.abs(row) > 1e-8 * np.max(np.abs(row)))[-1]]
        if lead < 0:
            row *= -1.0
    return values, samples, disc.nodes


def _arc_eigenpairs(cap: ConeSection, k_max: int, n: int, nodes: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Spectrum of the second-difference arc operator in closed form.

    Its eigenvalues are (4/h²)sin²(kπ/2n) and its eigenvectors are the node
    values of sin(kπθ′/L), normalized for the trapezoid weights.
    """
    k = np.arange(1, k_max + 1)
    h = cap.opening / n
    values = (2.0 / h * np.sin(0.5 * math.pi * k / n)) ** 2
    samples = math.sqrt(2.0 / cap.opening) * np.sin(np.outer(k, np.arange(n + 1)) * (math.pi / n))
    samples[:, [0, -1]] = 0.0
    return values, samples, nodes


@dataclass(frozen=True)
class CapEigensystem:
    """First eigenpairs of −Δ_S − V on a cap, L²(dσ)-normalized.

    ``angles`` are ascending polar angles (N = 2) or colatitudes (N = 3) and
    ``psi[k]`` holds the k-th eigenfunction at those nodes. Arc eigenfunctions
    are evaluated in closed form, cap eigenfunctions by splines in cos φ.
    """

    cap: ConeSection
    V: AngularPotential
    mu: FloatArray
    errors: FloatArray
    angles: FloatArray
    psi: FloatArray
    weights: FloatArray
    m: int = 0
    n_grid: int = 0
    _x: FloatArray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.cap.dim

    @property
    def size(self) -> int:
        return int(self.mu.size)

    @cached_property
    def _splines(self) -> list[CubicSpline]:
        x = np.cos(self.angles)[::-1]
        return [CubicSpline(x, row[::-1]) for row in self.psi]

    def _inside(self, angles: FloatArray) -> FloatArray:
        tol = 1e-12
        return (angles >= self.cap.lower - tol) & (angles <= self.cap.upper + tol)

    def _arc_mode(self, index: int) -> tuple[float, float]:
        if not 0 <= index < self.size:
            msg = f"Eigen index {index} outside the {self.size} computed pairs"
            raise IndexError(msg)
        return math.sqrt(2.0 / self.cap.opening), (index + 1) * math.pi / self.cap.opening

    def evaluate(self, index: int, angles: ArrayLike) -> FloatArray:
        """ψ_index at the given angles; zero outside the cap."""
        a = np.asarray(angles, dtype=float)
        if self.dim == 2:
            amp, wave = self._arc_mode(index)
            return np.where(self._inside(a), amp * np.sin(wave * (a - self.cap.lower)), 0.0)
        return np.where(self._inside(a), self._splines[index](np.cos(a)), 0.0)

    def derivative(self, index: int, angles: ArrayLike) -> FloatArray:
        """Angular derivative dψ_index/dθ (N = 2) or dψ_index/dφ (N = 3)."""
        a = np.asarray(angles, dtype=float)
        if self.dim == 2:
            amp, wave = self._arc_mode(index)
            return np.where(self._inside(a), amp * wave * np.cos(wave * (a - self.cap.lower)), 0.0)
        return np.where(self._inside(a), -np.sin(a) * self._splines[index](np.cos(a), 1), 0.0)

    def gram(self) -> FloatArray:
        """Discrete Gram matrix ∫ψ_jψ_k dσ."""
        return (self.psi * self.weights) @ self.psi.T

    def exponent_ladder(self) -> list[ExponentPair]:
        return [exponents(float(mu), self.dim) for mu in self.mu]


def solve_cap_eigen(
    cap: ConeSection,
    V: AngularPotential | None = None,
    k_max: int = 4,
    n_grid: int = 1024,
    m: int = 0,
) -> CapEigensystem:
    """First ``k_max`` eigenpairs on ``cap``, eigenvalues extrapolated from grids n and 2n.

    Raises:
        ResolutionError: If n_grid < 64 or k_max exceeds the resolved modes.
    """
    potential = V or AngularPotential()
    coarse, _, _ = discrete_eigenpairs(cap, potential, k_max, n_grid, m)
    fine, samples, nodes = discrete_eigenpairs(cap, potential, k_max, 2 * n_grid, m)
    mu, errors = richardson_pair(coarse, fine, order=2)
    logger.debug(f"Cap eigen-solve on {cap}: mu={mu.tolist()} (error estimates {errors.tolist()})")

    if cap.dim == 2:
        h = cap.opening / (2 * n_grid)
        weights = np.full(nodes.size, h)
        weights[[0, -1]] = 0.5 * h
        return CapEigensystem(cap=cap, V=potential, mu=mu, errors=errors, angles=nodes, psi=samples, weights=weights, m=m, n_grid=n_grid)

    x = nodes
    angles = np.arccos(np.clip(x, -1.0, 1.0))[::-1]
    angles[0] = 0.0
    disc = _cap_operator(cap, potential, 2 * n_grid, m)
    return CapEigensystem(
        cap=cap,
        V=potential,
        mu=mu,
        errors=errors,
        angles=angles,
        psi=samples[:, ::-1].copy(),
        weights=disc.weights[::-1].copy(),
        m=m,
        n_grid=n_grid,
        _x=x,
    )


def mu1_on_shrinking_cap(
    profile: BoundaryProfile,
    V: AngularPotential | None,
    r: float,
    C0: float = 0.0,
    delta: float = 0.5,
    n_grid: int = 512,
) -> float:
    """First eigenvalue on the cap C_r of the convexified domain at radius r."""
    section = section_at_radius(profile, C0, delta, r)
    return float(solve_cap_eigen(section, V, k_max=1, n_grid=n_grid).mu[0])


def _lambda_discrete(cap: ConeSection, V: AngularPotential, n: int) -> float:
    diag, offdiag, mass, x, unknowns = _legendre_parts(cap, n, 0)
    idx = np.arange(unknowns.start, unknowns.stop)
    weight = V.of_colatitude(np.arccos(x[idx])) * mass[idx]
    if not np.any(weight > 0):
        return 0.0
    half = 0.5 * (cap.dim - 2)
    base = diag + half * half * mass[idx]
    scale = 1.0 / np.sqrt(mass[idx])
    off = offdiag * scale[:-1] * scale[1:]

    def lowest(lam: float) -> float:
        d = (base - lam * weight) * scale**2
        return float(eigh_tridiagonal(d, off, eigvals_only=True, select="i", select_range=(0, 0))[0])

    hi = 1.0
    for _ in range(200):
        if lowest(hi) < 0:
            break
        hi *= 2.0
    else:
        msg = "Could not bracket the maximal Rayleigh quotient of V"
        raise NumericalError(msg)
    return float(brentq(lowest, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


def lambda_V(cap: ConeSection, V: AngularPotential | None, n_grid: int = 1024) -> float:
    """Λ(V) = sup ∫Vψ² / ∫(|∇_Sψ|² + ((N−2)/2)²ψ²) over H¹₀(cap).

    The supremum is the value of λ at which the pencil K + ((N−2)/2)²M − λW
    stops being positive definite; it is bracketed and found with ``brentq``,
    then extrapolated from grids n and 2n.
    """
    potential = V or AngularPotential()
    if cap.dim == 2 or potential.is_zero:
        return 0.0
    coarse = _lambda_discrete(cap, potential, n_grid)
    fine = _lambda_discrete(cap, potential, 2 * n_grid)
    value, _ = richardson_pair(coarse, fine, order=2)
    return float(value)


@dataclass(frozen=True)
class Admissibility:
    """Both forms of the positivity condition on V."""

    lambda_v: float
    mu1: float
    threshold: float

    @property
    def by_lambda(self) -> bool:
        return self.lambda_v < 1.0

    @property
    def by_eigenvalue(self) -> bool:
        return self.mu1 > self.threshold

    @property
    def consistent(self) -> bool:
        return self.by_lambda == self.by_eigenvalue


def admissibility(cap: ConeSection, V: AngularPotential | None, n_grid: int = 512) -> Admissibility:
    """Evaluate Λ(V) < 1 and μ₁(V) > −((N−2)/2)² on the same cap."""
    mu1 = float(solve_cap_eigen(cap, V, k_max=1, n_grid=n_grid).mu[0])
    half = 0.5 * (cap.dim - 2)
    return Admissibility(lambda_v=lambda_V(cap, V, n_grid), mu1=mu1, threshold=-half * half)
