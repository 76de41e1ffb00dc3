"""Planar corner whose boundary curves carry a logarithmic harmonic.

With κ = 2/α and s = θ − π/2,

    u(r, θ) = r^κ [log r · sin(κs) + s · cos(κs)] = Im(e^{−iκπ/2} z^κ log z) up to rotation,

vanishes on r = ρ₁(θ) = exp(−s·cot(κs)). The two branches of these curves
next to the rays θ₋ = π/2 − απ/2 and π − θ₋ bound a domain whose height
function grows like r^{2κ}log²r, so λ^{−2κ}H(λ) has no positive finite limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError, GeometryError
from .field import angular_unit
from .geometry import corner_defect, polar_angle
from .logger import logger
from .numerics import FloatArray, linear_fit
from .profiles import BoundaryProfile, LogCurve

POLE_TOLERANCE = 1e-12


def rho1(theta: ArrayLike, alpha: float) -> FloatArray:
    """Radius of the zero set of u at polar angle θ (removable value e^{−α/2} at π/2).

    Raises:
        DomainError: At the poles of cot(κs), s ≠ 0.
    """
    s = np.asarray(theta, dtype=float) - 0.5 * math.pi
    kappa = 2.0 / alpha
    sin = np.sin(kappa * s)
    near_axis = np.abs(s) < 1e-8
    if np.any((np.abs(sin) < POLE_TOLERANCE) & ~near_axis):
        msg = "Angle hits a pole of cot(2(theta - pi/2)/alpha)"
        raise DomainError(msg)
    with np.errstate(divide="ignore", invalid="ignore"):
        exponent = np.where(near_axis, -1.0 / kappa + kappa * s**2 / 3.0, -s * np.cos(kappa * s) / np.where(near_axis, 1.0, sin))
    return np.exp(exponent)


def _log_mode(r: FloatArray, s: FloatArray, kappa: float) -> tuple[FloatArray, FloatArray, FloatArray]:
    """r^κ(log r·sin κs + s·cos κs) with its derivatives in r and in the angle."""
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r = np.log(np.where(r > 0, r, 1.0))
        power = np.where(r > 0, r**kappa, 0.0)
        lower = np.where(r > 0, r ** (kappa - 1.0), 0.0)
    sin = np.sin(kappa * s)
    cos = np.cos(kappa * s)
    bracket = log_r * sin + s * cos
    value = power * bracket
    d_r = kappa * lower * bracket + lower * sin
    d_angle = power * (kappa * log_r * cos + cos - kappa * s * sin)
    return value, d_r, d_angle


def u_log(r: ArrayLike, theta: ArrayLike, alpha: float) -> FloatArray:
    """The logarithmic harmonic in polar coordinates; 0 at r = 0."""
    r_arr, t_arr = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    if np.any(r_arr < 0):
        msg = "Radii must be nonnegative"
        raise DomainError(msg)
    value, _, _ = _log_mode(r_arr, t_arr - 0.5 * math.pi, 2.0 / alpha)
    return value


def u_log_gradient(r: ArrayLike, theta: ArrayLike, alpha: float) -> FloatArray:
    """Cartesian gradient of u_log, shape (..., 2)."""
    r_arr, t_arr = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    _, d_r, d_angle = _log_mode(r_arr, t_arr - 0.5 * math.pi, 2.0 / alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        tangential = np.where(r_arr > 0, d_angle / np.where(r_arr > 0, r_arr, 1.0), 0.0)
    e_r = np.stack([np.cos(t_arr), np.sin(t_arr)], axis=-1)
    return d_r[..., None] * e_r + tangential[..., None] * angular_unit(2, t_arr)


@dataclass(frozen=True)
class LogHarmonic:
    """u_log as a closed-form planar field."""

    alpha: float
    dim: int = 2

    def value(self, points: ArrayLike) -> FloatArray:
        pts = np.asarray(points, dtype=float)
        return u_log(np.linalg.norm(pts, axis=-1), polar_angle(pts), self.alpha)

    def gradient(self, points: ArrayLike) -> FloatArray:
        pts = np.asarray(points, dtype=float)
        return u_log_gradient(np.linalg.norm(pts, axis=-1), polar_angle(pts), self.alpha)


@dataclass(frozen=True)
class ImZmLogZ:
    """Im(z^m log z) on the sector 0 < θ < π/m.

    Its traces are 0 on θ = 0 and −(π/m)r^m on θ = π/m, both analytic in r,
    while the leading term r^m log r·sin(mθ) is logarithmic.
    """

    m: float
    dim: int = 2

    def __post_init__(self) -> None:
        if self.m <= 0:
            msg = f"m must be positive, got {self.m}"
            raise DomainError(msg)

    def _parts(self, points: ArrayLike) -> tuple[FloatArray, FloatArray, FloatArray, FloatArray, FloatArray]:
        pts = np.asarray(points, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        theta = np.arctan2(pts[..., 1], pts[..., 0])
        value, d_r, d_angle = _log_mode(r, theta, self.m)
        return r, theta, value, d_r, d_angle

    def value(self, points: ArrayLike) -> FloatArray:
        return self._parts(points)[2]

    def gradient(self, points: ArrayLike) -> FloatArray:
        r, theta, _, d_r, d_angle = self._parts(points)
        with np.errstate(divide="ignore", invalid="ignore"):
            tangential = np.where(r > 0, d_angle / np.where(r > 0, r, 1.0), 0.0)
        e_r = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return d_r[..., None] * e_r + tangential[..., None] * angular_unit(2, theta)

    def ray_traces(self, r: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """Values on the rays θ = 0 and θ = π/m."""
        r_arr = np.asarray(r, dtype=float)
        upper = math.pi / self.m
        lower_pts = np.stack([r_arr, np.zeros_like(r_arr)], axis=-1)
        upper_pts = np.stack([r_arr * math.cos(upper), r_arr * math.sin(upper)], axis=-1)
        return self.value(lower_pts), self.value(upper_pts)


def im_zm_log_z(m: float) -> ImZmLogZ:
    return ImZmLogZ(m=m)


def build_boundary(alpha: float, sigma: float) -> BoundaryProfile:
    """Profile made of the two zero-set curves next to the rays θ₋ and π − θ₋.

    Raises:
        GeometryError: If the curves are not graphs over x₁ on the window.
    """
    try:
        curve = LogCurve(alpha=alpha, sigma=sigma)
    except ValueError as exc:
        msg = f"Invalid logarithmic corner (alpha={alpha}, sigma={sigma}): {exc}"
        raise GeometryError(msg) from exc
    slope = math.tan(curve.theta_minus)
    logger.debug(f"Logarithmic corner alpha={alpha} ({curve.branch}) on x1 < {curve.x_max:.6g}")
    return BoundaryProfile(dim=2, g=[slope, slope], perturbation=curve, radius=curve.x_max)


@dataclass(frozen=True)
class LogCorner:
    """The logarithmic corner domain with opening fraction α and window σ."""

    alpha: float
    sigma: float

    @property
    def branch(self) -> Literal["alpha_lt_1", "alpha_ge_1"]:
        return "alpha_lt_1" if self.alpha < 1.0 else "alpha_ge_1"

    @property
    def kappa(self) -> float:
        return 2.0 / self.alpha

    @property
    def curve(self) -> LogCurve:
        return LogCurve(alpha=self.alpha, sigma=self.sigma)

    def profile(self) -> BoundaryProfile:
        return build_boundary(self.alpha, self.sigma)

    def harmonic(self) -> LogHarmonic:
        return LogHarmonic(alpha=self.alpha)

    def curve_samples(self, samples: int = 200) -> dict[str, FloatArray]:
        """Points (θ, ρ₁, x₁, x₂) of the right curve over its window, nearest the vertex first."""
        curve = self.curve
        eps = np.geomspace(curve.eps_floor * 10.0, self.sigma, samples)
        theta = curve.theta_minus - eps
        rho = np.exp(curve.log_rho(eps))
        return {"theta": theta, "rho": rho, "x": rho * np.cos(theta), "y": rho * np.sin(theta)}

    def boundary_residual(self, samples: int = 200) -> float:
        """Largest |u_log| on both curves relative to r^κ(1 + |log r|)."""
        pts = self.curve_samples(samples)
        worst = 0.0
        for theta in (pts["theta"], math.pi - pts["theta"]):
            r = rho1(theta, self.alpha)
            scale = r**self.kappa * (1.0 + np.abs(np.log(r)))
            worst = max(worst, float(np.max(np.abs(u_log(r, theta, self.alpha)) / scale)))
        return worst


@dataclass(frozen=True)
class TangentReport:
    residual: FloatArray
    expansion: FloatArray
    limit: float


def tangent_relation_residual(corner: LogCorner, x1: ArrayLike, phi: ArrayLike | None = None) -> TangentReport:
    """Implicit relation ½log(x₁² + φ²)·tan(κ(arctan(φ/x₁) − π/2)) + arctan(φ/x₁) − π/2.

    Also returns tan(κ(arctan(φ/x₁) − π/2))·log x₁, which tends to απ/2.
    """
    x = np.asarray(x1, dtype=float)
    values = corner.profile().phi_line(x) if phi is None else np.asarray(phi, dtype=float)
    s = np.arctan(values / x) - 0.5 * math.pi
    tangent = np.tan(corner.kappa * s)
    residual = 0.5 * np.log(x**2 + values**2) * tangent + s
    return TangentReport(residual=residual, expansion=tangent * np.log(x), limit=0.5 * corner.alpha * math.pi)


@dataclass(frozen=True)
class DefectExtrapolation:
    """(φ − x₁φ′)·log²x₁/x₁ on samples and its limit from a fit in 1/log x₁."""

    x: FloatArray
    normalized: FloatArray
    constant: float
    reference: float | None

    @property
    def relative_error(self) -> float | None:
        if self.reference is None:
            return None
        return abs(self.constant - self.reference) / abs(self.reference)


def defect_constant(
    corner: LogCorner,
    *,
    x_min: float = 1e-7,
    x_max: float = 1e-3,
    samples: int = 25,
    analytic: bool = False,
) -> DefectExtrapolation:
    """Extrapolate the normalized corner defect to x₁ → 0.

    The reference α²π/(4cos²θ₋) is given on the α < 1 branch only.
    """
    profile = corner.profile()
    if x_max >= profile.radius:
        msg = f"x_max={x_max} exceeds the curve window {profile.radius:.6g}"
        raise DomainError(msg)
    x = np.geomspace(x_min, x_max, samples)
    defect = corner_defect(profile, x[:, None], analytic=analytic)
    log_x = np.log(x)
    normalized = defect * log_x**2 / x
    fit = linear_fit(np.column_stack([np.ones_like(x), 1.0 / log_x, 1.0 / log_x**2]), normalized)
    reference = None
    if corner.branch == "alpha_lt_1":
        reference = corner.alpha**2 * math.pi / (4.0 * math.cos(corner.curve.theta_minus) ** 2)
    return DefectExtrapolation(x=x, normalized=normalized, constant=float(fit.coefficients[0]), reference=reference)
