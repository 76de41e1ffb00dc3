"""Coefficient data of the equation and its pushforwards.

The equation is −div(A∇u) + b·∇u − V(x/|x|)|x|⁻²u − hu = f(x, u). Every
coefficient source (raw bundle, its pullback by Ψ, the straightened
pushforward) evaluates through the ``CoefficientField`` protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Protocol

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field

from .errors import DomainError
from .geometry import psi_map, unstraighten_map
from .numerics import FloatArray, SlopeFit, central_jacobian, loglog_slope
from .profiles import BoundaryProfile


class MatrixSpec(BaseModel):
    """A(x) = Id, or Id + amp·(x₁(e₁⊗e_N + e_N⊗e₁) + x_N·Id) for ``linear``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["identity", "linear"] = "identity"
    amp: float = 0.0


class DriftSpec(BaseModel):
    """b(x) = amp·|x|^order·(1, …, 1)/√N."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    amp: float = 0.0
    order: float = Field(default=-0.5, gt=-1.0)


class PotentialSpec(BaseModel):
    """h(x) = amp·|x|^order."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    amp: float = 0.0
    order: float = Field(default=-1.5, gt=-2.0)


class AngularPotential(BaseModel):
    """Axisymmetric potential on the sphere: 0, a constant c, or c·cos(colatitude)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["zero", "constant", "cosine"] = "zero"
    c: float = 0.0

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.c == 0.0

    def of_colatitude(self, phi: ArrayLike) -> FloatArray:
        angle = np.asarray(phi, dtype=float)
        if self.kind == "constant":
            return np.full_like(angle, self.c)
        if self.kind == "cosine":
            return self.c * np.cos(angle)
        return np.zeros_like(angle)

    def on_sphere(self, points: ArrayLike) -> FloatArray:
        """V(y/|y|) at points of shape (..., N)."""
        pts = np.asarray(points, dtype=float)
        if self.kind == "constant":
            return np.full(pts.shape[:-1], self.c)
        if self.kind == "cosine":
            return self.c * pts[..., -1] / np.linalg.norm(pts, axis=-1)
        return np.zeros(pts.shape[:-1])


class Nonlinearity(BaseModel):
    """f(x, s) = c|s|^{p−2}s with primitive F = c|s|^p/p."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    c: float = 0.0
    p: float = Field(default=4.0, ge=2.0)

    def value(self, s: ArrayLike) -> FloatArray:
        arr = np.asarray(s, dtype=float)
        return self.c * np.abs(arr) ** (self.p - 2.0) * arr

    def primitive(self, s: ArrayLike) -> FloatArray:
        arr = np.asarray(s, dtype=float)
        return self.c * np.abs(arr) ** self.p / self.p


class CoefficientBundle(BaseModel):
    """Closed-form coefficients (A, b, h, V, f); the default bundle is trivial."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    A: MatrixSpec = Field(default_factory=MatrixSpec)
    b: DriftSpec = Field(default_factory=DriftSpec)
    h: PotentialSpec = Field(default_factory=PotentialSpec)
    V: AngularPotential = Field(default_factory=AngularPotential)
    f: Nonlinearity = Field(default_factory=Nonlinearity)

    @property
    def is_trivial(self) -> bool:
        return (
            (self.A.kind == "identity" or self.A.amp == 0.0)
            and self.b.amp == 0.0
            and self.h.amp == 0.0
            and self.V.is_zero
            and self.f.c == 0.0
        )

    def check_dimension(self, dim: int) -> None:
        """Raise DomainError when the bundle is not admissible in ℝ^dim."""
        if dim == 2 and not self.V.is_zero:
            msg = "Planar problems require V = 0"
            raise DomainError(msg)
        if dim >= 3 and self.f.p > 2.0 * dim / (dim - 2.0):
            msg = f"Exponent p={self.f.p} exceeds the critical Sobolev exponent {2.0 * dim / (dim - 2.0)}"
            raise DomainError(msg)

    def min_ellipticity(self, dim: int, radius: float, samples: int = 1000, seed: int = 0) -> float:
        """Smallest eigenvalue of A over random points of the ball of given radius."""
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(samples, dim))
        pts *= (radius * rng.random(samples) ** (1.0 / dim) / np.linalg.norm(pts, axis=-1))[:, None]
        return float(np.min(np.linalg.eigvalsh(matrix_field(self.A, pts))))


def matrix_field(spec: MatrixSpec, points: ArrayLike) -> FloatArray:
    """A(x) at points of shape (..., N), shape (..., N, N)."""
    pts = np.asarray(points, dtype=float)
    dim = pts.shape[-1]
    out = np.broadcast_to(np.eye(dim), pts.shape[:-1] + (dim, dim)).copy()
    if spec.kind == "linear" and spec.amp != 0.0:
        out += spec.amp * pts[..., -1][..., None, None] * np.eye(dim)
        out[..., 0, -1] += spec.amp * pts[..., 0]
        out[..., -1, 0] += spec.amp * pts[..., 0]
    return out


@dataclass(frozen=True)
class CoefficientValues:
    """All coefficients of the operator sampled at a batch of points."""

    matrix: FloatArray
    drift: FloatArray
    potential: FloatArray
    angular: FloatArray
    f_scale: FloatArray


class CoefficientField(Protocol):
    dim: int
    bundle: CoefficientBundle

    def matrix(self, points: ArrayLike) -> FloatArray: ...

    def evaluate(self, points: ArrayLike) -> CoefficientValues: ...


def _nonzero(points: ArrayLike) -> FloatArray:
    pts = np.asarray(points, dtype=float)
    if np.any(np.linalg.norm(pts, axis=-1) == 0):
        msg = "Coefficient fields are singular at the vertex"
        raise DomainError(msg)
    return pts


@dataclass(frozen=True)
class BundleField:
    """The raw bundle evaluated at x."""

    bundle: CoefficientBundle
    dim: int

    def __post_init__(self) -> None:
        self.bundle.check_dimension(self.dim)

    def matrix(self, points: ArrayLike) -> FloatArray:
        return matrix_field(self.bundle.A, points)

    def evaluate(self, points: ArrayLike) -> CoefficientValues:
        pts = _nonzero(points)
        norm = np.linalg.norm(pts, axis=-1)
        b = self.bundle.b
        h = self.bundle.h
        drift = (b.amp * norm**b.order / math.sqrt(self.dim))[..., None] * np.ones(self.dim)
        return CoefficientValues(
            matrix=self.matrix(pts),
            drift=drift,
            potential=h.amp * norm**h.order,
            angular=self.bundle.V.on_sphere(pts),
            f_scale=np.ones(pts.shape[:-1]),
        )


def trivial_coefficients(dim: int) -> BundleField:
    """Laplacian coefficients: A = Id and every lower-order term zero."""
    return BundleField(bundle=CoefficientBundle(), dim=dim)


@dataclass(frozen=True)
class TransformedBundle:
    """Pullback of a bundle by Ψ: Ã, b̃, h̃ and the scale |det JΨ| of f̃."""

    bundle: CoefficientBundle
    dim: int
    C0: float
    delta: float

    def __post_init__(self) -> None:
        self.bundle.check_dimension(self.dim)

    def matrix(self, points: ArrayLike) -> FloatArray:
        pts = np.asarray(points, dtype=float)
        psi = psi_map(self.C0, self.delta, pts)
        inv = np.linalg.inv(psi.jacobian)
        det = np.abs(psi.det)[..., None, None]
        return det * inv @ matrix_field(self.bundle.A, psi.value) @ np.swapaxes(inv, -1, -2)

    def evaluate(self, points: ArrayLike) -> CoefficientValues:
        y = _nonzero(points)
        psi = psi_map(self.C0, self.delta, y)
        raw = BundleField(self.bundle, self.dim).evaluate(psi.value)
        inv = np.linalg.inv(psi.jacobian)
        det = np.abs(psi.det)
        matrix = det[..., None, None] * inv @ raw.matrix @ np.swapaxes(inv, -1, -2)
        drift = det[..., None] * np.einsum("...ij,...j->...i", inv, raw.drift)
        v_y = self.bundle.V.on_sphere(y)
        ny2 = np.sum(y**2, axis=-1)
        nx2 = np.sum(psi.value**2, axis=-1)
        potential = det * raw.potential + det * (raw.angular / nx2 - v_y / ny2) + (det - 1.0) * v_y / ny2
        return CoefficientValues(matrix=matrix, drift=drift, potential=potential, angular=v_y, f_scale=det)


def transform_bundle(bundle: CoefficientBundle, dim: int, C0: float, delta: float) -> TransformedBundle:
    """Pull ``bundle`` back by Ψ with parameters (C0, δ)."""
    if C0 < 0 or not 0.0 < delta <= 1.0:
        msg = f"Invalid map parameters C0={C0}, delta={delta}"
        raise DomainError(msg)
    return TransformedBundle(bundle=bundle, dim=dim, C0=C0, delta=delta)


@dataclass(frozen=True)
class HatBundle:
    """Pushforward of a transformed bundle to the tangent cone by Φ = Ξ⁻¹.

    Â = |det JΦ| JΦ⁻¹ Ã(Φ) JΦ⁻ᵀ, b̂ = |det JΦ| JΦ⁻¹ b̃(Φ), f̂ = |det JΦ| f̃(Φ, ·) and
    ĥ = |det JΦ| h̃(Φ) + |det JΦ|(V(Φ/|Φ|)/|Φ|² − V(x/|x|)/|x|²) + (|det JΦ| − 1)V(x/|x|)/|x|².
    """

    tilde: TransformedBundle
    profile: BoundaryProfile

    @property
    def dim(self) -> int:
        return self.tilde.dim

    @property
    def bundle(self) -> CoefficientBundle:
        return self.tilde.bundle

    def _pullback(self, points: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
        phi = unstraighten_map(self.profile, self.tilde.C0, self.tilde.delta, points)
        return phi.value, np.linalg.inv(phi.jacobian), np.abs(phi.det)

    def matrix(self, points: ArrayLike) -> FloatArray:
        x = np.asarray(points, dtype=float)
        y, inv, det = self._pullback(x)
        return det[..., None, None] * inv @ self.tilde.matrix(y) @ np.swapaxes(inv, -1, -2)

    def evaluate(self, points: ArrayLike) -> CoefficientValues:
        x = _nonzero(points)
        y, inv, det = self._pullback(x)
        tv = self.tilde.evaluate(y)
        matrix = det[..., None, None] * inv @ tv.matrix @ np.swapaxes(inv, -1, -2)
        drift = det[..., None] * np.einsum("...ij,...j->...i", inv, tv.drift)
        v_x = self.bundle.V.on_sphere(x)
        nx2 = np.sum(x**2, axis=-1)
        ny2 = np.sum(y**2, axis=-1)
        potential = det * tv.potential + det * (tv.angular / ny2 - v_x / nx2) + (det - 1.0) * v_x / nx2
        return CoefficientValues(matrix=matrix, drift=drift, potential=potential, angular=v_x, f_scale=det * tv.f_scale)


def hat_bundle(tilde: TransformedBundle, profile: BoundaryProfile) -> HatBundle:
    """Push a transformed bundle forward to the tangent cone of ``profile``."""
    if profile.dim != tilde.dim:
        msg = f"Bundle dimension {tilde.dim} does not match profile dimension {profile.dim}"
        raise DomainError(msg)
    return HatBundle(tilde=tilde, profile=profile)


def mu_field(coefficients: CoefficientField, y: ArrayLike) -> FloatArray:
    """μ(y) = |y|⁻² Ã(y)y·y."""
    pts = _nonzero(y)
    a = coefficients.matrix(pts)
    return np.einsum("...ij,...i,...j->...", a, pts, pts) / np.sum(pts**2, axis=-1)


@dataclass(frozen=True)
class BetaEvaluation:
    value: FloatArray
    jacobian: FloatArray
    divergence: FloatArray


def beta_field(coefficients: CoefficientField, y: ArrayLike, *, step: float = 1e-5) -> BetaEvaluation:
    """β(y) = Ã(y)y/μ(y) with Jac β and div β by central differences of step |y|·step."""
    pts = _nonzero(y)

    def beta(points: FloatArray) -> FloatArray:
        a = coefficients.matrix(points)
        return np.einsum("...ij,...j->...i", a, points) / mu_field(coefficients, points)[..., None]

    jacobian = central_jacobian(beta, pts, np.linalg.norm(pts, axis=-1) * step)
    return BetaEvaluation(value=beta(pts), jacobian=jacobian, divergence=np.trace(jacobian, axis1=-2, axis2=-1))


def ray_points(direction: ArrayLike, radii: ArrayLike) -> FloatArray:
    """Points r·ν on the ray through the unit vector ν."""
    nu = np.asarray(direction, dtype=float)
    nu = nu / np.linalg.norm(nu)
    return np.asarray(radii, dtype=float)[:, None] * nu


@dataclass(frozen=True)
class OrderReport:
    """Log-log slope of a field along a ray against the exponent it should reach."""

    fit: SlopeFit
    expected: float
    margin: float

    @property
    def slope(self) -> float:
        return self.fit.slope

    @property
    def passed(self) -> bool:
        return bool(self.fit.slope >= self.expected - self.margin)


def order_audit(
    field: Callable[[FloatArray], FloatArray],
    expected_exponent: float,
    ray_samples: ArrayLike,
    *,
    margin: float = 0.05,
) -> OrderReport:
    """Fit |field| ~ |y|^s along ray samples and compare s to ``expected_exponent``.

    Args:
        field: Callable mapping points (m, N) to scalars (m,) or vectors/matrices (m, ...)
        expected_exponent: Exponent the O(·) claim asserts
        ray_samples: Points of shape (m, N), m ≥ 8 distinct radii
        margin: Allowed shortfall of the fitted slope
    """
    pts = np.asarray(ray_samples, dtype=float)
    radii = np.linalg.norm(pts, axis=-1)
    if np.unique(radii).size < 8:
        msg = "Order audits need at least 8 distinct radii"
        raise DomainError(msg)
    values = np.asarray(field(pts), dtype=float)
    magnitude = np.abs(values) if values.ndim == 1 else np.linalg.norm(values.reshape(values.shape[0], -1), axis=-1)
    return OrderReport(fit=loglog_slope(radii, magnitude), expected=expected_exponent, margin=margin)
