"""Corner domains near the vertex and the maps that relate them to straight cones.

Ψ(y) = (y', y_N + 2C0|y|^{1+δ}) convexifies the boundary; Ω̃ = Ψ⁻¹(Ω) is
bounded by y_N = φ̃(y'). Ξ maps Ω̃ onto the tangent cone preserving |y|;
Φ = Ξ⁻¹ is evaluated by bisection in the polar angle.

Axisymmetric N = 3 points are handled through the meridian half plane
(t, z) = (|y'|, y_3), so every map has a single planar core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError, GeometryError, NumericalError
from .logger import logger
from .numerics import FloatArray, bisect
from .profiles import BoundaryProfile, ConeSection, LogCurve, NoPerturbation

BOUNDARY_TOLERANCE = 1e-10


@dataclass(frozen=True)
class MapEvaluation:
    """Value, Jacobian and Jacobian determinant of a map at a batch of points."""

    value: FloatArray
    jacobian: FloatArray
    det: FloatArray


def eval_phi0(profile: BoundaryProfile, xp: ArrayLike) -> FloatArray:
    """Tangent-cone profile φ₀(x') = |x'|·g(x'/|x'|).

    Planar profiles also accept bare abscissas.
    """
    arr = np.asarray(xp, dtype=float)
    if profile.dim == 2 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    return profile.phi0(arr)


def polar_angle(points: ArrayLike) -> FloatArray:
    """Polar angle of planar points, taking values in [−π/2, 3π/2)."""
    pts = np.asarray(points, dtype=float)
    raw = np.arctan2(pts[..., 1], pts[..., 0])
    return np.mod(raw + 0.5 * math.pi, 2.0 * math.pi) - 0.5 * math.pi


def _check_map_params(C0: float, delta: float) -> None:
    if C0 < 0:
        msg = f"C0 must be nonnegative, got {C0}"
        raise DomainError(msg)
    if not 0.0 < delta <= 1.0:
        msg = f"delta must lie in (0, 1], got {delta}"
        raise DomainError(msg)


def psi_map(C0: float, delta: float, y: ArrayLike) -> MapEvaluation:
    """Evaluate Ψ, its Jacobian and determinant at points of shape (..., N)."""
    _check_map_params(C0, delta)
    pts = np.asarray(y, dtype=float)
    dim = pts.shape[-1]
    norm = np.linalg.norm(pts, axis=-1)
    value = pts.copy()
    value[..., -1] += 2.0 * C0 * norm ** (1.0 + delta)

    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(norm > 0, 2.0 * C0 * (1.0 + delta) * norm ** (delta - 1.0), 0.0)
    jacobian = np.broadcast_to(np.eye(dim), pts.shape[:-1] + (dim, dim)).copy()
    jacobian[..., -1, :] += weight[..., None] * pts
    det = 1.0 + weight * pts[..., -1]
    return MapEvaluation(value=value, jacobian=jacobian, det=det)


# Planar core on the line coordinate t and the height z


def tilde_phi_line(profile: BoundaryProfile, C0: float, delta: float, t: ArrayLike) -> FloatArray:
    """Solve s + 2C0(t² + s²)^{(1+δ)/2} = φ(t) for s = φ̃(t)."""
    t_arr = np.asarray(t, dtype=float)
    phi = profile.phi_line(t_arr)
    if C0 == 0.0:
        return phi
    power = 0.5 * (1.0 + delta)

    def residual(s: FloatArray) -> FloatArray:
        return s + 2.0 * C0 * (t_arr**2 + s**2) ** power - phi

    hi = phi
    gap = 2.0 * (2.0 * C0 * (t_arr**2 + phi**2) ** power) + 1e-300
    lo = phi - gap
    for _ in range(80):
        pending = residual(lo) > 0
        if not np.any(pending):
            break
        gap = np.where(pending, 2.0 * gap, gap)
        lo = np.where(pending, phi - gap, lo)
    else:
        msg = "Could not bracket the root of the convexified profile; radius too large"
        raise GeometryError(msg)
    try:
        return bisect(residual, lo, hi)
    except NumericalError as exc:
        msg = f"Root bracketing failed for the convexified profile: {exc}"
        raise GeometryError(msg) from exc


def dtilde_phi_line(
    profile: BoundaryProfile, C0: float, delta: float, t: FloatArray, s: FloatArray
) -> FloatArray:
    """Derivative of φ̃ at t given s = φ̃(t), by implicit differentiation."""
    dphi = profile.dphi_line(t)
    if C0 == 0.0:
        return dphi
    r2 = t**2 + s**2
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(r2 > 0, 2.0 * C0 * (1.0 + delta) * r2 ** (0.5 * (delta - 1.0)), 0.0)
        return np.where(r2 > 0, (dphi - k * t) / (1.0 + k * s), dphi)


def _xi_core(
    profile: BoundaryProfile, C0: float, delta: float, t: FloatArray, z: FloatArray
) -> tuple[FloatArray, FloatArray]:
    s = tilde_phi_line(profile, C0, delta, t)
    d = profile.phi0_line(t) - s
    r2 = t**2 + z**2
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.sqrt(np.where(r2 > 0, 1.0 + (d**2 + 2.0 * z * d) / np.where(r2 > 0, r2, 1.0), 1.0))
    return t / c, (z + d) / c


def _core_bounds(profile: BoundaryProfile) -> tuple[float, float, float | None]:
    """(right cone angle, middle angle, left cone angle) in the core half plane."""
    section = profile.section()
    if profile.dim == 2:
        return section.lower, 0.5 * (section.lower + section.upper), section.upper
    return 0.5 * math.pi - section.upper, 0.5 * math.pi, None


def _endpoint(profile: BoundaryProfile, C0: float, delta: float, r: FloatArray, start: float, stop: float) -> FloatArray:
    def residual(theta: FloatArray) -> FloatArray:
        return r * np.sin(theta) - tilde_phi_line(profile, C0, delta, r * np.cos(theta))

    try:
        return bisect(residual, np.full_like(r, start), np.full_like(r, stop))
    except NumericalError as exc:
        msg = f"Empty or unbracketed cap at radii up to {float(np.max(r)):.3g}: {exc}"
        raise GeometryError(msg) from exc


def core_cap(profile: BoundaryProfile, C0: float, delta: float, r: ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Angular extent of Ω̃ ∩ S_r in the core half plane.

    Returns the right and left endpoint angles; for N = 3 the left endpoint is
    the pole π/2.
    """
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr <= 0):
        msg = "Cap endpoints need positive radii"
        raise DomainError(msg)
    if np.any(r_arr >= profile.radius):
        msg = f"Radius beyond the profile validity radius {profile.radius}"
        raise DomainError(msg)
    right, middle, left = _core_bounds(profile)
    pert = profile.perturbation
    if C0 == 0.0 and isinstance(pert, LogCurve):
        lo = pert.theta_minus - pert.eps_at_radius(r_arr)
        return lo, math.pi - lo
    if C0 == 0.0 and isinstance(pert, NoPerturbation):
        hi_value = left if left is not None else middle
        return np.full_like(r_arr, right), np.full_like(r_arr, hi_value)

    margin = min(0.5, 0.5 * (right + 0.5 * math.pi))
    lo = _endpoint(profile, C0, delta, r_arr, right - margin, middle)
    if left is None:
        return lo, np.full_like(r_arr, middle)
    margin = min(0.5, 0.5 * (1.5 * math.pi - left))
    hi = _endpoint(profile, C0, delta, r_arr, middle, left + margin)
    return lo, hi


def cap_endpoints(profile: BoundaryProfile, C0: float, delta: float, r: ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Angular extent of Ω̃ ∩ S_r in the coordinates of the angular grids.

    N = 2: polar angles of the arc ends. N = 3: colatitudes (0, φ₀(r)).
    """
    lo, hi = core_cap(profile, C0, delta, r)
    if profile.dim == 2:
        return lo, hi
    return np.zeros_like(lo), 0.5 * math.pi - lo


def section_at_radius(profile: BoundaryProfile, C0: float, delta: float, r: float) -> ConeSection:
    """Cap C_r of Ω̃ at a single radius as a cone section."""
    lo, hi = cap_endpoints(profile, C0, delta, np.array([r]))
    return ConeSection(dim=profile.dim, lower=float(lo[0]), upper=float(hi[0]))


# Lifting between points of shape (..., N) and the core


def _to_core(profile: BoundaryProfile, pts: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray | None]:
    if pts.shape[-1] != profile.dim:
        msg = f"Expected points in R^{profile.dim}, got shape {pts.shape}"
        raise DomainError(msg)
    if profile.dim == 2:
        return pts[..., 0], pts[..., 1], None
    rho = np.linalg.norm(pts[..., :2], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        direction = np.where(rho[..., None] > 0, pts[..., :2] / np.where(rho > 0, rho, 1.0)[..., None], np.array([1.0, 0.0]))
    return rho, pts[..., 2], direction


def _from_core(t: FloatArray, z: FloatArray, direction: FloatArray | None) -> FloatArray:
    if direction is None:
        return np.stack([t, z], axis=-1)
    return np.concatenate([t[..., None] * direction, z[..., None]], axis=-1)


def tilde_phi(profile: BoundaryProfile, C0: float, delta: float, yp: ArrayLike) -> FloatArray:
    """Boundary function φ̃ of Ω̃ at points y' of shape (..., N−1)."""
    _check_map_params(C0, delta)
    arr = np.asarray(yp, dtype=float)
    t = arr[..., 0] if profile.dim == 2 else np.linalg.norm(arr, axis=-1)
    if np.any(np.abs(t) >= profile.radius):
        msg = f"Point outside the validity radius {profile.radius}"
        raise DomainError(msg)
    return tilde_phi_line(profile, C0, delta, t)


def grad_tilde_phi(profile: BoundaryProfile, C0: float, delta: float, yp: ArrayLike) -> FloatArray:
    """Gradient of φ̃ at points y' of shape (..., N−1)."""
    arr = np.asarray(yp, dtype=float)
    t = arr[..., 0] if profile.dim == 2 else np.linalg.norm(arr, axis=-1)
    s = tilde_phi(profile, C0, delta, arr)
    slope = dtilde_phi_line(profile, C0, delta, t, s)
    if profile.dim == 2:
        return slope[..., None]
    with np.errstate(invalid="ignore", divide="ignore"):
        direction = np.where(t[..., None] > 0, arr / np.where(t > 0, t, 1.0)[..., None], 0.0)
    return slope[..., None] * direction


def corner_defect(profile: BoundaryProfile, xp: ArrayLike, *, analytic: bool = True) -> FloatArray:
    """φ(x') − ∇φ(x')·x'.

    The analytic form is exact for every profile family; ``analytic=False``
    differentiates φ by central differences with step |x'|·1e−6 instead.
    """
    arr = np.asarray(xp, dtype=float)
    t = arr[..., 0] if profile.dim == 2 else np.linalg.norm(arr, axis=-1)
    if np.any(t == 0):
        msg = "Corner defect is undefined at the vertex"
        raise DomainError(msg)
    if np.any(np.abs(t) >= profile.radius):
        msg = f"Point outside the validity radius {profile.radius}"
        raise DomainError(msg)
    if analytic:
        return profile.defect_line(t)
    h = np.abs(t) * 1e-6
    slope = (profile.phi_line(t + h) - profile.phi_line(t - h)) / (2.0 * h)
    return profile.phi_line(t) - slope * t


def validate_c0(profile: BoundaryProfile, C0: float, delta: float, samples: int = 64) -> float:
    """Check |φ − ∇φ·x'| ≤ C0|x'|^{1+δ} on samples and return the worst ratio.

    Profiles that do not satisfy a power-law defect bound (the logarithmic
    curve) are reported with a warning instead.

    Raises:
        GeometryError: If a compliant profile violates the bound.
    """
    top = 0.5 * profile.radius
    radii = np.geomspace(top * 1e-6, top, samples)
    signs = [1.0, -1.0] if profile.dim == 2 else [1.0]
    ratios = []
    for sign in signs:
        pts = (sign * radii)[:, None] if profile.dim == 2 else np.stack([radii, np.zeros_like(radii)], axis=-1)
        ratios.append(np.abs(corner_defect(profile, pts)) / radii ** (1.0 + delta))
    worst = float(np.max(np.concatenate(ratios)))
    if isinstance(profile.perturbation, LogCurve):
        logger.warning(f"Logarithmic curve profile has no power-law defect bound (sampled ratio {worst:.3g})")
        return worst
    if worst > C0 * (1.0 + 1e-12):
        msg = f"Corner defect ratio {worst:.6g} exceeds C0={C0} for delta={delta}"
        raise GeometryError(msg)
    return worst


def straighten(profile: BoundaryProfile, C0: float, delta: float, y: ArrayLike, *, strict: bool = True) -> FloatArray:
    """Ξ(y): radius-preserving map from Ω̃ onto the tangent cone.

    With ``strict`` off, points slightly below the boundary are mapped by the
    same formula (finite-difference stencils straddle Γ).
    """
    _check_map_params(C0, delta)
    pts = np.asarray(y, dtype=float)
    t, z, direction = _to_core(profile, pts)
    if np.any(np.hypot(t, z) >= profile.radius):
        msg = f"Point outside the validity radius {profile.radius}"
        raise DomainError(msg)
    s = tilde_phi_line(profile, C0, delta, t)
    below = z < s - BOUNDARY_TOLERANCE * np.maximum(1.0, np.hypot(t, z))
    if strict and np.any(below):
        msg = f"{int(np.count_nonzero(below))} point(s) lie outside the convexified domain"
        raise DomainError(msg)
    xt, xz = _xi_core(profile, C0, delta, t, z)
    return _from_core(xt, xz, direction)


def straighten_map(
    profile: BoundaryProfile, C0: float, delta: float, y: ArrayLike, *, strict: bool = True
) -> MapEvaluation:
    """Ξ with its Jacobian n̂⊗ŷ + (|y|/|n|)(I − n̂n̂ᵀ)(I + e_N⊗∇d), n = y + d e_N."""
    pts = np.asarray(y, dtype=float)
    value = straighten(profile, C0, delta, pts, strict=strict)
    dim = profile.dim
    t, z, direction = _to_core(profile, pts)
    s = tilde_phi_line(profile, C0, delta, t)
    d = profile.phi0_line(t) - s
    slope = profile.dphi0_line(t) - dtilde_phi_line(profile, C0, delta, t, s)
    slope = np.where(t == 0, 0.0, slope)
    grad_d = np.zeros(pts.shape)
    if dim == 2:
        grad_d[..., 0] = slope
    else:
        assert direction is not None
        grad_d[..., :2] = slope[..., None] * direction

    n = pts.copy()
    n[..., -1] += d
    norm_y = np.linalg.norm(pts, axis=-1)
    norm_n = np.linalg.norm(n, axis=-1)
    safe_y = np.where(norm_y > 0, norm_y, 1.0)
    safe_n = np.where(norm_n > 0, norm_n, 1.0)
    n_hat = n / safe_n[..., None]
    y_hat = pts / safe_y[..., None]
    eye = np.eye(dim)
    jn = np.broadcast_to(eye, pts.shape[:-1] + (dim, dim)).copy()
    jn[..., -1, :] += grad_d
    projector = eye - n_hat[..., :, None] * n_hat[..., None, :]
    jacobian = n_hat[..., :, None] * y_hat[..., None, :] + (norm_y / safe_n)[..., None, None] * (projector @ jn)
    jacobian = np.where((norm_y > 0)[..., None, None], jacobian, eye)
    return MapEvaluation(value=value, jacobian=jacobian, det=np.linalg.det(jacobian))


def unstraighten(profile: BoundaryProfile, C0: float, delta: float, x: ArrayLike) -> FloatArray:
    """Φ(x) = Ξ⁻¹(x) by bisection in the polar angle on the sphere of radius |x|."""
    _check_map_params(C0, delta)
    pts = np.asarray(x, dtype=float)
    t, z, direction = _to_core(profile, pts)
    flat_t = np.atleast_1d(t).ravel()
    flat_z = np.atleast_1d(z).ravel()
    r = np.hypot(flat_t, flat_z)
    if np.any(r >= profile.radius):
        msg = f"Point outside the validity radius {profile.radius}"
        raise DomainError(msg)
    out_t = flat_t.copy()
    out_z = flat_z.copy()
    active = r > 0
    if C0 == 0.0 and isinstance(profile.perturbation, NoPerturbation):
        active = np.zeros_like(active)
    if np.any(active):
        ra = r[active]
        target = polar_angle(np.stack([flat_t[active], flat_z[active]], axis=-1))
        right, _, left = _core_bounds(profile)
        upper = left if left is not None else 0.5 * math.pi
        tol = 1e-12
        if np.any((target < right - tol) | (target > upper + tol)):
            msg = "Point lies outside the tangent cone"
            raise DomainError(msg)
        target = np.clip(target, right, upper)
        lo, hi = core_cap(profile, C0, delta, ra)
        edge = 4.0 * np.finfo(float).eps * max(1.0, abs(upper))
        at_lo = target <= right + edge
        at_hi = target >= upper - edge
        inner = ~(at_lo | at_hi)
        theta = np.where(at_lo, lo, hi)

        def residual(angle: FloatArray) -> FloatArray:
            xt, xz = _xi_core(profile, C0, delta, ra[inner] * np.cos(angle), ra[inner] * np.sin(angle))
            return polar_angle(np.stack([xt, xz], axis=-1)) - target[inner]

        if np.any(inner):
            theta[inner] = bisect(residual, lo[inner], hi[inner])
        out_t[active] = ra * np.cos(theta)
        out_z[active] = ra * np.sin(theta)
    return _from_core(out_t.reshape(np.shape(t)), out_z.reshape(np.shape(z)), direction)


def unstraighten_map(profile: BoundaryProfile, C0: float, delta: float, x: ArrayLike) -> MapEvaluation:
    """Φ with Jacobian (Jac Ξ)⁻¹ evaluated at Φ(x)."""
    y = unstraighten(profile, C0, delta, x)
    forward = straighten_map(profile, C0, delta, y)
    jacobian = np.linalg.inv(forward.jacobian)
    return MapEvaluation(value=y, jacobian=jacobian, det=1.0 / forward.det)


def straightening_radius(profile: BoundaryProfile, C0: float, delta: float, samples: int = 257) -> float:
    """Largest radius (capped at a quarter of the validity radius) on which Ξ stays injective.

    Injectivity is checked on spheres, where Ξ acts as an angular map that must
    be strictly increasing; Ψ must also keep a positive determinant.
    """
    cap = 0.25 * profile.radius
    if C0 > 0:
        cap = min(cap, 0.5 * (2.0 * C0 * (1.0 + delta)) ** (-1.0 / delta))

    def injective(r: float) -> bool:
        try:
            lo, hi = core_cap(profile, C0, delta, np.array([r]))
        except (GeometryError, DomainError):
            return False
        theta = np.linspace(float(lo[0]), float(hi[0]), samples)
        xt, xz = _xi_core(profile, C0, delta, r * np.cos(theta), r * np.sin(theta))
        return bool(np.all(np.diff(polar_angle(np.stack([xt, xz], axis=-1))) > 0))

    if injective(cap):
        return cap
    lo_r, hi_r = cap * 1e-8, cap
    if not injective(lo_r):
        msg = "Straightening map is not injective at any sampled radius"
        raise GeometryError(msg)
    for _ in range(60):
        mid = math.sqrt(lo_r * hi_r)
        if injective(mid):
            lo_r = mid
        else:
            hi_r = mid
    logger.debug(f"Straightening radius reduced to {lo_r:.6g}")
    return lo_r


def normal_and_transversality(
    profile: BoundaryProfile,
    C0: float,
    delta: float,
    y: ArrayLike,
    matrix: Callable[[FloatArray], FloatArray] | None = None,
) -> tuple[FloatArray, FloatArray]:
    """Exterior normal ν̃ of Ω̃ at boundary points and the scalar Ã(y)y·ν̃(y).

    ``matrix`` evaluates Ã at points; by default Ã is the pushforward of the
    identity, |det JΨ| JΨ⁻¹ JΨ⁻ᵀ.
    """
    pts = np.asarray(y, dtype=float)
    if np.any(np.linalg.norm(pts, axis=-1) == 0):
        msg = "Normal is undefined at the vertex"
        raise DomainError(msg)
    yp = pts[..., :-1]
    s = tilde_phi(profile, C0, delta, yp)
    if np.any(np.abs(pts[..., -1] - s) > BOUNDARY_TOLERANCE):
        msg = "Point is not on the boundary of the convexified domain"
        raise DomainError(msg)
    grad = grad_tilde_phi(profile, C0, delta, yp)
    normal = np.concatenate([grad, -np.ones(grad.shape[:-1] + (1,))], axis=-1)
    normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
    if matrix is None:
        psi = psi_map(C0, delta, pts)
        inv = np.linalg.inv(psi.jacobian)
        a_tilde = np.abs(psi.det)[..., None, None] * inv @ np.swapaxes(inv, -1, -2)
    else:
        a_tilde = matrix(pts)
    scalar = np.einsum("...ij,...j,...i->...", a_tilde, pts, normal)
    return normal, scalar
