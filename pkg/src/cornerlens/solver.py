"""Linear Dirichlet problems on the straightened planar sector.

In t = log r the operator −div(Â∇v) + b̂·∇v − ĥv becomes, after
multiplication by e^{2t},

    −∂_t(Mg)₁ − ∂_θ(Mg)₂ + e^t (Qᵀb̂)·g − e^{2t} ĥ v,

with g = (v_t, v_θ), Q = [e_r e_θ] and M = QᵀÂQ. Fluxes are taken at face
midpoints with central cross terms; the system goes to ``spsolve``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from .coefficients import BundleField, CoefficientBundle, CoefficientField, hat_bundle, transform_bundle
from .errors import NumericalError, UnsupportedConfigurationError
from .field import PolarField, PolarGrid, angular_unit, ring_points
from .geometry import polar_angle, straighten_map
from .logger import logger
from .numerics import FloatArray
from .profiles import BoundaryProfile

CLOSURE_TOLERANCE = 1e-6


def sector_coefficients(bundle: CoefficientBundle, profile: BoundaryProfile, C0: float, delta: float) -> CoefficientField:
    """Coefficients of the equation pushed to the tangent sector."""
    if profile.is_straight and C0 == 0.0:
        return BundleField(bundle=bundle, dim=profile.dim)
    return hat_bundle(transform_bundle(bundle, profile.dim, C0, delta), profile)


def _polar_matrix(coefficients: CoefficientField, t: FloatArray, theta: FloatArray) -> FloatArray:
    points = ring_points(2, np.exp(t), theta)
    q = np.stack([ring_points(2, 1.0, theta), angular_unit(2, theta)], axis=-1)
    return np.swapaxes(q, -1, -2) @ coefficients.matrix(points) @ q


def _assemble(
    coefficients: CoefficientField,
    grid: PolarGrid,
    outer: FloatArray,
) -> FloatArray:
    nt, nth = grid.shape
    ht = grid.h
    hth = float(grid.upper[0] - grid.lower[0]) / (nth - 1)
    t = grid.t
    theta = grid.angles[0]

    def index(i: FloatArray, j: FloatArray) -> FloatArray:
        return i * nth + j

    ii, jj = np.meshgrid(np.arange(1, nt - 1), np.arange(1, nth - 1), indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    rows: list[FloatArray] = []
    cols: list[FloatArray] = []
    vals: list[FloatArray] = []

    def add(di: int, dj: int, coeff: FloatArray) -> None:
        rows.append(index(ii, jj))
        cols.append(index(ii + di, jj + dj))
        vals.append(coeff)

    t_plus = 0.5 * (t[ii] + t[ii + 1])
    t_minus = 0.5 * (t[ii] + t[ii - 1])
    th_plus = 0.5 * (theta[jj] + theta[jj + 1])
    th_minus = 0.5 * (theta[jj] + theta[jj - 1])
    m_tp = _polar_matrix(coefficients, t_plus, theta[jj])
    m_tm = _polar_matrix(coefficients, t_minus, theta[jj])
    m_hp = _polar_matrix(coefficients, t[ii], th_plus)
    m_hm = _polar_matrix(coefficients, t[ii], th_minus)

    a, ap = m_tp[:, 0, 0], m_tm[:, 0, 0]
    b, bp = m_tp[:, 0, 1], m_tm[:, 0, 1]
    c, cp = m_hp[:, 1, 1], m_hm[:, 1, 1]
    d, dp = m_hp[:, 1, 0], m_hm[:, 1, 0]
    cross = 1.0 / (4.0 * ht * hth)

    # radial fluxes
    add(1, 0, -a / ht**2)
    add(0, 0, (a + ap) / ht**2)
    add(-1, 0, -ap / ht**2)
    for dj, sign in ((1, -1.0), (-1, 1.0)):
        add(0, dj, sign * (b - bp) * cross)
        add(1, dj, sign * b * cross)
        add(-1, dj, -sign * bp * cross)
    # angular fluxes
    add(0, 1, -c / hth**2)
    add(0, 0, (c + cp) / hth**2)
    add(0, -1, -cp / hth**2)
    add(1, 0, -(d - dp) * cross)
    add(-1, 0, (d - dp) * cross)
    add(1, 1, -d * cross)
    add(-1, 1, d * cross)
    add(1, -1, dp * cross)
    add(-1, -1, -dp * cross)

    points = ring_points(2, np.exp(t[ii]), theta[jj])
    values = coefficients.evaluate(points)
    e_r = ring_points(2, 1.0, theta[jj])
    e_th = angular_unit(2, theta[jj])
    et = np.exp(t[ii])
    c1 = et * np.einsum("...i,...i->...", values.drift, e_r)
    c2 = et * np.einsum("...i,...i->...", values.drift, e_th)
    add(1, 0, c1 / (2.0 * ht))
    add(-1, 0, -c1 / (2.0 * ht))
    add(0, 1, c2 / (2.0 * hth))
    add(0, -1, -c2 / (2.0 * hth))
    add(0, 0, -(et**2) * values.potential)

    boundary = np.ones((nt, nth), dtype=bool)
    boundary[1:-1, 1:-1] = False
    b_idx = np.flatnonzero(boundary.ravel())
    rows.append(b_idx)
    cols.append(b_idx)
    vals.append(np.ones(b_idx.size))

    size = nt * nth
    matrix = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)).tocsr()
    rhs = np.zeros((nt, nth))
    rhs[-1, :] = outer
    rhs[:, [0, -1]] = 0.0
    try:
        solution = spsolve(matrix, rhs.ravel())
    except (RuntimeError, ValueError) as exc:
        msg = f"Sparse solve failed: {exc}"
        raise NumericalError(msg) from exc
    if not np.all(np.isfinite(solution)):
        msg = "Sparse solve returned non-finite values (singular system)"
        raise NumericalError(msg)
    return solution.reshape(nt, nth)


def _field_from_nodes(grid: PolarGrid, values: FloatArray) -> PolarField:
    hth = float(grid.upper[0] - grid.lower[0]) / (grid.s.size - 1)
    vt = np.gradient(values, grid.h, axis=0, edge_order=2)
    vth = np.gradient(values, hth, axis=1, edge_order=2)
    decay = np.exp(-grid.t)[:, None]
    return PolarField(grid=grid, values=values, grad_r=decay * vt, grad_ang=decay * vth)


def _solve_on(
    coefficients: CoefficientField,
    straight: BoundaryProfile,
    boundary_data: Callable[[FloatArray], FloatArray],
    r_inner: float,
    r_max: float,
    rings_per_decade: int,
    angular_nodes: int,
) -> PolarField:
    grid = PolarGrid.build(straight, r_inner, r_max, rings_per_decade, angular_nodes)
    outer = np.asarray(boundary_data(grid.angles[-1]), dtype=float)
    logger.debug(f"Dirichlet solve on {grid.shape[0]} x {grid.shape[1]} nodes from r={r_inner:.3g}")
    return _field_from_nodes(grid, _assemble(coefficients, grid, outer))


def _ring_norms(field: PolarField) -> FloatArray:
    return np.sqrt(np.sum(field.values**2 * field.grid.sphere_weights, axis=-1))


def solve_linear_dirichlet(
    bundle: CoefficientBundle,
    profile: BoundaryProfile,
    boundary_data: Callable[[FloatArray], FloatArray],
    *,
    r_min: float = 1e-6,
    r_max: float = 1.0,
    rings_per_decade: int = 24,
    angular_nodes: int = 129,
    inner_decades: int = 3,
    C0: float = 0.0,
    delta: float = 0.5,
    check_closure: bool = True,
) -> PolarField:
    """Solve the linear equation on the tangent sector with zero lateral data.

    ``boundary_data`` maps polar angles of the outer arc r = r_max to values.
    An artificial homogeneous Dirichlet ring sits ``inner_decades`` below
    r_min; a rerun one decade lower measures the relative change of the ring
    norms on [r_min, r_max], stored as ``closure_shift``.

    Raises:
        UnsupportedConfigurationError: For N ≠ 2 or a nonlinear bundle.
        NumericalError: If the sparse solve fails.
    """
    if profile.dim != 2:
        msg = "The Dirichlet solver handles planar sectors only"
        raise UnsupportedConfigurationError(msg)
    if bundle.f.c != 0.0:
        msg = "The Dirichlet solver is linear; use a manufactured problem for nonlinear terms"
        raise UnsupportedConfigurationError(msg)
    straight = BoundaryProfile(dim=2, g=list(profile.g), radius=max(profile.radius, 2.0 * r_max))
    coefficients = sector_coefficients(bundle, profile, C0, delta)

    def run(decades: int) -> PolarField:
        solved = _solve_on(
            coefficients, straight, boundary_data, r_min * 10.0 ** (-decades), r_max, rings_per_decade, angular_nodes
        )
        start = solved.grid.t.size - (round(math.log10(r_max / r_min) * rings_per_decade) + 1)
        return solved.restrict(start)

    field = run(inner_decades)
    if not check_closure:
        return field
    deeper = run(inner_decades + 1)
    base = _ring_norms(deeper)
    shift = float(np.max(np.abs(_ring_norms(field) - base) / np.where(base > 0, base, 1.0)))
    if shift > CLOSURE_TOLERANCE:
        logger.warning(f"Inner closure sensitivity {shift:.3e} exceeds {CLOSURE_TOLERANCE:g}")
    return PolarField(grid=field.grid, values=field.values, grad_r=field.grad_r, grad_ang=field.grad_ang, closure_shift=shift)


def pull_back_field(field: PolarField, target: PolarGrid) -> PolarField:
    """w = v∘Ξ on a grid of Ω̃ that shares the rings of ``field``.

    Values and Cartesian gradients are interpolated along each ring in the
    polar angle; gradients are pulled back with Jac Ξᵀ.
    """
    if target.t.size != field.grid.t.size or not np.allclose(target.t, field.grid.t, rtol=0.0, atol=1e-12):
        msg = "Pull-back needs grids with identical rings"
        raise NumericalError(msg)
    xi = straighten_map(target.profile, target.C0, target.delta, target.points * target.scale, strict=False)
    theta = polar_angle(xi.value)
    values = np.empty(target.shape)
    grad = np.empty(target.shape + (2,))
    source_grad = field.cartesian_gradient
    for j in range(target.t.size):
        spline = CubicSpline(field.grid.angles[j], np.column_stack([field.values[j], source_grad[j]]), axis=0)
        out = spline(np.clip(theta[j], field.grid.lower[j], field.grid.upper[j]))
        values[j] = out[:, 0]
        grad[j] = out[:, 1:]
    grad = np.einsum("...ji,...j->...i", xi.jacobian, grad)
    return PolarField(
        grid=target,
        values=values,
        grad_r=np.einsum("...i,...i->...", grad, target.e_r),
        grad_ang=np.einsum("...i,...i->...", grad, target.e_ang),
        closure_shift=field.closure_shift,
    )
