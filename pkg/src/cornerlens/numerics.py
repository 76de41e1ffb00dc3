"""Shared numerical kernels: bracketing, extrapolation, fits and radial quadrature."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NumericalError
from .logger import logger

FloatArray = NDArray[np.float64]


def bisect(
    fn: Callable[[FloatArray], FloatArray],
    lo: ArrayLike,
    hi: ArrayLike,
    *,
    max_iter: int = 160,
) -> FloatArray:
    """Vectorized bisection down to adjacent floating point numbers.

    ``fn`` must take opposite signs (or vanish) at ``lo`` and ``hi``,
    elementwise. Iteration stops once every midpoint collapses onto an
    endpoint.

    Raises:
        NumericalError: If some bracket does not enclose a sign change.
    """
    lo_arr, hi_arr = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    lo_arr = lo_arr.copy()
    hi_arr = hi_arr.copy()
    f_lo = np.asarray(fn(lo_arr), dtype=float)
    f_hi = np.asarray(fn(hi_arr), dtype=float)
    if np.any(np.sign(f_lo) * np.sign(f_hi) > 0):
        bad = int(np.count_nonzero(np.sign(f_lo) * np.sign(f_hi) > 0))
        msg = f"{bad} bracket(s) do not enclose a sign change"
        raise NumericalError(msg)

    exact_lo = f_lo == 0
    exact_hi = f_hi == 0
    hi_arr = np.where(exact_lo, lo_arr, hi_arr)
    lo_arr = np.where(exact_hi & ~exact_lo, hi_arr, lo_arr)

    for _ in range(max_iter):
        mid = 0.5 * (lo_arr + hi_arr)
        if np.all((mid == lo_arr) | (mid == hi_arr)):
            break
        f_mid = np.asarray(fn(mid), dtype=float)
        same = np.sign(f_mid) == np.sign(f_lo)
        lo_arr = np.where(same, mid, lo_arr)
        f_lo = np.where(same, f_mid, f_lo)
        hi_arr = np.where(same, hi_arr, mid)
    return 0.5 * (lo_arr + hi_arr)


def richardson_limit(step_ratio: float, values: ArrayLike) -> float:
    """Repeated Richardson extrapolation of a sequence refined by ``step_ratio``.

    ``values`` are ordered coarse to fine; the m-th sweep removes the error term
    of order m in the step ratio.
    """
    last_level = [float(v) for v in np.atleast_1d(values)]
    if len(last_level) == 1:
        return last_level[0]
    for m in range(1, len(last_level)):
        mult = step_ratio**m
        factor = 1.0 / (mult - 1.0)
        last_level = [factor * (mult * high - low) for low, high in zip(last_level[:-1], last_level[1:])]
    return last_level[0]


def richardson_pair(coarse: ArrayLike, fine: ArrayLike, order: int = 2) -> tuple[FloatArray, FloatArray]:
    """Extrapolate from grids ``n`` and ``2n`` for an error of the given order.

    Returns:
        Tuple of (extrapolated values, error estimate of the fine values)
    """
    coarse_arr = np.asarray(coarse, dtype=float)
    fine_arr = np.asarray(fine, dtype=float)
    correction = (fine_arr - coarse_arr) / (2.0**order - 1.0)
    return fine_arr + correction, np.abs(correction)


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through (log x, log |y|)."""

    slope: float
    intercept: float
    residual: float
    points: int


def loglog_slope(x: ArrayLike, y: ArrayLike) -> SlopeFit:
    """Fit log|y| = slope·log x + intercept, ignoring vanishing samples."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.abs(np.asarray(y, dtype=float))
    keep = (x_arr > 0) & (y_arr > 0) & np.isfinite(y_arr)
    if np.count_nonzero(keep) < 2:
        return SlopeFit(slope=float("nan"), intercept=float("nan"), residual=float("nan"), points=int(np.count_nonzero(keep)))
    lx = np.log(x_arr[keep])
    ly = np.log(y_arr[keep])
    (slope, intercept), residuals, *_ = np.polyfit(lx, ly, 1, full=True)
    residual = float(np.sqrt(residuals[0] / lx.size)) if residuals.size else 0.0
    return SlopeFit(slope=float(slope), intercept=float(intercept), residual=residual, points=int(lx.size))


@dataclass(frozen=True)
class LinearFit:
    """Linear least-squares fit on an explicit design matrix."""

    coefficients: FloatArray
    residual: float
    r_squared: float


def linear_fit(design: ArrayLike, y: ArrayLike) -> LinearFit:
    """Solve ``design @ c ≈ y`` in the least-squares sense and report R²."""
    design_arr = np.asarray(design, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    coefficients, *_ = np.linalg.lstsq(design_arr, y_arr, rcond=None)
    fitted = design_arr @ coefficients
    ss_res = float(np.sum((y_arr - fitted) ** 2))
    ss_tot = float(np.sum((y_arr - y_arr.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(coefficients=coefficients, residual=float(np.sqrt(ss_res / y_arr.size)), r_squared=r_squared)


# Radial quadrature in t = log r. Ring integrals G(t) of homogeneous integrands
# are exponentials in t, so each cell is integrated exactly for G = c·e^{κt}.


def _same_sign(g0: FloatArray, g1: FloatArray) -> NDArray[np.bool_]:
    return (g0 * g1) > 0


def power_law_cells(values: ArrayLike, h: float) -> FloatArray:
    """Integrate consecutive samples of G(t) on cells of width ``h``.

    Cells whose end values share a sign use the exponential fit through both
    ends; the rest fall back to the trapezoid rule.
    """
    g = np.asarray(values, dtype=float)
    g0, g1 = g[..., :-1], g[..., 1:]
    trapezoid = 0.5 * h * (g0 + g1)
    fit = _same_sign(g0, g1)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(fit, np.log(np.abs(g1) / np.abs(np.where(fit, g0, 1.0))) / h, 0.0)
        small = np.abs(kappa * h) < 1e-9
        exact = np.where(small, trapezoid, (g1 - g0) / np.where(small, 1.0, kappa))
    return np.where(fit, exact, trapezoid)


def power_law_partial(g0: ArrayLike, g1: ArrayLike, h: float, fraction: ArrayLike) -> FloatArray:
    """Integrate G over the first ``fraction`` of a cell, interpolating log-linearly."""
    g0_arr = np.asarray(g0, dtype=float)
    g1_arr = np.asarray(g1, dtype=float)
    frac = np.asarray(fraction, dtype=float)
    fit = _same_sign(g0_arr, g1_arr)
    linear = frac * h * (g0_arr + 0.5 * frac * (g1_arr - g0_arr))
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(fit, np.log(np.abs(g1_arr) / np.abs(np.where(fit, g0_arr, 1.0))) / h, 0.0)
        small = np.abs(kappa * h) < 1e-9
        safe = np.where(small, 1.0, kappa)
        exact = np.where(small, linear, g0_arr * np.expm1(kappa * frac * h) / safe)
    return np.where(fit, exact, linear)


def power_law_tail(g0: float, g1: float, h: float) -> tuple[float, bool]:
    """Integrate G from −∞ up to the first node, extending the first cell's power law.

    Returns:
        Tuple of (tail value, whether a decaying power law closed the tail)
    """
    if g0 == 0.0:
        return 0.0, True
    if g0 * g1 <= 0:
        return 0.0, False
    kappa = np.log(g1 / g0) / h
    if kappa <= 0:
        return 0.0, False
    return float(g0 / kappa), True


def cumulative_radial(values: ArrayLike, h: float, *, tail: bool = True) -> FloatArray:
    """Cumulative ∫_{−∞}^{t_j} G dt at every node (or from the first node when ``tail`` is off)."""
    g = np.asarray(values, dtype=float)
    out = np.zeros_like(g)
    out[1:] = np.cumsum(power_law_cells(g, h))
    if tail and g.size >= 2:
        tail_value, closed = power_law_tail(float(g[0]), float(g[1]), h)
        if not closed:
            logger.debug("Radial tail not closed by a decaying power law; starting at the first ring")
        out += tail_value
    return out


def central_jacobian(
    fn: Callable[[FloatArray], FloatArray],
    points: ArrayLike,
    steps: ArrayLike,
) -> FloatArray:
    """Fourth-order central-difference Jacobian of a vector field.

    Args:
        fn: Maps points of shape (..., N) to values of shape (..., M)
        points: Evaluation points, shape (..., N)
        steps: Step per point, broadcastable to (...)

    Returns:
        Array of shape (..., M, N) with entry [i, j] = ∂f_i/∂x_j
    """
    pts = np.asarray(points, dtype=float)
    h = np.asarray(steps, dtype=float)[..., None]
    dim = pts.shape[-1]
    columns = []
    for j in range(dim):
        e = np.zeros(dim)
        e[j] = 1.0
        shift = h * e
        f_p2 = np.asarray(fn(pts + 2 * shift))
        f_p1 = np.asarray(fn(pts + shift))
        f_m1 = np.asarray(fn(pts - shift))
        f_m2 = np.asarray(fn(pts - 2 * shift))
        columns.append((-f_p2 + 8 * f_p1 - 8 * f_m1 + f_m2) / (12.0 * h))
    return np.stack(columns, axis=-1)


def central_gradient(
    fn: Callable[[FloatArray], FloatArray],
    points: ArrayLike,
    steps: ArrayLike,
) -> FloatArray:
    """Fourth-order central-difference gradient of a scalar field, shape (..., N)."""

    def lifted(x: FloatArray) -> FloatArray:
        return np.asarray(fn(x))[..., None]

    return central_jacobian(lifted, points, steps)[..., 0, :]
