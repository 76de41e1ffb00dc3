"""Boundary profiles of corner domains and the cone sections they are asymptotic to.

A profile describes Ω ∩ B_R = {x_N > φ(x')} near the vertex. Evaluation
works on a "line coordinate": the signed abscissa x₁ when N = 2 and the
meridian distance |x'| when N = 3 (axisymmetric cones only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import DomainError, GeometryError
from .numerics import FloatArray, bisect


@dataclass(frozen=True)
class ConeSection:
    """Cap of a straight cone on the unit sphere.

    For N = 2 ``lower`` and ``upper`` are polar angles of the arc endpoints.
    For N = 3 the cap is axisymmetric: ``lower`` is 0 (the pole) and
    ``upper`` the colatitude opening.
    """

    dim: int
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            msg = f"Cone sections exist for N in {{2, 3}}, got N={self.dim}"
            raise DomainError(msg)
        if not self.upper > self.lower:
            msg = f"Empty cap: upper angle {self.upper} does not exceed lower angle {self.lower}"
            raise GeometryError(msg)
        if self.dim == 2 and (self.lower <= -math.pi / 2 or self.upper >= 1.5 * math.pi):
            msg = f"Arc ({self.lower}, {self.upper}) leaves the angular range (-pi/2, 3pi/2)"
            raise GeometryError(msg)
        if self.dim == 3 and (self.lower != 0.0 or self.upper >= math.pi):
            msg = f"Axisymmetric cap needs lower=0 and opening below pi, got ({self.lower}, {self.upper})"
            raise GeometryError(msg)

    @property
    def opening(self) -> float:
        return self.upper - self.lower

    @classmethod
    def sector(cls, alpha: float) -> ConeSection:
        """Symmetric planar sector of opening απ around the vertical axis."""
        half = 0.5 * alpha * math.pi
        return cls(dim=2, lower=0.5 * math.pi - half, upper=0.5 * math.pi + half)

    @classmethod
    def cone(cls, opening: float) -> ConeSection:
        """Axisymmetric cone in ℝ³ with the given colatitude opening."""
        return cls(dim=3, lower=0.0, upper=opening)

    @classmethod
    def hemisphere(cls) -> ConeSection:
        return cls.cone(0.5 * math.pi)


def sector_slopes(alpha: float) -> list[float]:
    """Slopes (g(+1), g(-1)) of the symmetric sector with opening απ."""
    slope = math.tan(0.5 * math.pi - 0.5 * alpha * math.pi)
    return [slope, slope]


class NoPerturbation(BaseModel):
    """The boundary is the straight cone itself."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["none"] = "none"


class PowerBump(BaseModel):
    """φ = φ₀ + a|x'|^{1+δ}."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["power_bump"] = "power_bump"
    a: float = 0.5
    delta: float = Field(default=0.5, gt=0.0, lt=1.0)


class LogCurve(BaseModel):
    """Boundary made of the two curves on which the logarithmic harmonic vanishes.

    The right curve is parametrized by ε = θ₋ − θ ∈ (0, σ] where
    θ₋ = π/2 − απ/2; the left curve is its mirror image, so φ is even.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["log_curve"] = "log_curve"
    alpha: float = Field(default=0.5, gt=0.0, lt=2.0)
    sigma: float = Field(default=0.3, gt=0.0)

    @property
    def branch(self) -> Literal["alpha_lt_1", "alpha_ge_1"]:
        return "alpha_lt_1" if self.alpha < 1.0 else "alpha_ge_1"

    @property
    def theta_minus(self) -> float:
        return 0.5 * math.pi * (1.0 - self.alpha)

    @model_validator(mode="after")
    def _check_window(self) -> LogCurve:
        # θ₋ − σ must stay inside the half plane of the branch
        bound = 0.5 * math.pi * (1.0 - self.alpha) if self.alpha < 1.0 else 0.5 * math.pi * (2.0 - self.alpha)
        limit = min(bound, 0.25 * self.alpha * math.pi)
        if self.sigma >= limit:
            msg = f"sigma={self.sigma} must be below {limit:.6g} for alpha={self.alpha}"
            raise ValueError(msg)
        return self

    def log_rho(self, eps: ArrayLike) -> FloatArray:
        e = np.asarray(eps, dtype=float)
        x = 2.0 * e / self.alpha
        return -(0.5 * self.alpha * math.pi + e) * np.cos(x) / np.sin(x)

    def dlog_rho(self, eps: ArrayLike) -> FloatArray:
        e = np.asarray(eps, dtype=float)
        x = 2.0 * e / self.alpha
        s = np.sin(x)
        return -np.cos(x) / s + (0.5 * self.alpha * math.pi + e) * (2.0 / self.alpha) / s**2

    def dlog_x(self, eps: ArrayLike) -> FloatArray:
        e = np.asarray(eps, dtype=float)
        return self.dlog_rho(e) + np.tan(self.theta_minus - e)

    def log_x(self, eps: ArrayLike) -> FloatArray:
        e = np.asarray(eps, dtype=float)
        return self.log_rho(e) + np.log(np.cos(self.theta_minus - e))

    @property
    def eps_floor(self) -> float:
        return 1e-6 * self.alpha

    @property
    def x_max(self) -> float:
        return float(np.exp(self.log_x(self.sigma)))

    def validate_graph(self, samples: int = 2001) -> None:
        """Raise GeometryError unless x₁(ε) is strictly increasing on the window."""
        eps = np.geomspace(self.eps_floor, self.sigma, samples)
        if not np.all(self.dlog_x(eps) > 0):
            msg = f"Curve is not a graph over x1 for alpha={self.alpha}, sigma={self.sigma}"
            raise GeometryError(msg)

    def eps_at_x(self, x: ArrayLike) -> FloatArray:
        """Invert x₁(ε) = x on the window by bisection."""
        x_arr = np.asarray(x, dtype=float)
        target = np.log(x_arr)
        return bisect(lambda e: self.log_x(e) - target, np.full_like(x_arr, self.eps_floor), np.full_like(x_arr, self.sigma))

    def eps_at_radius(self, r: ArrayLike) -> FloatArray:
        """Window parameter of the right curve point at distance r from the vertex."""
        r_arr = np.asarray(r, dtype=float)
        target = np.log(r_arr)
        return bisect(lambda e: self.log_rho(e) - target, np.full_like(r_arr, self.eps_floor), np.full_like(r_arr, self.sigma))

    def phi(self, t: FloatArray) -> FloatArray:
        out = np.zeros_like(t)
        nz = t != 0
        if np.any(nz):
            eps = self.eps_at_x(np.abs(t[nz]))
            theta = self.theta_minus - eps
            out[nz] = np.exp(self.log_rho(eps)) * np.sin(theta)
        return out

    def dphi(self, t: FloatArray) -> FloatArray:
        out = np.zeros_like(t)
        nz = t != 0
        if np.any(nz):
            eps = self.eps_at_x(np.abs(t[nz]))
            theta = self.theta_minus - eps
            lp = self.dlog_rho(eps)
            slope = (lp * np.sin(theta) - np.cos(theta)) / (lp * np.cos(theta) + np.sin(theta))
            out[nz] = np.sign(t[nz]) * slope
        return out

    def defect(self, t: FloatArray) -> FloatArray:
        """φ − tφ′ in the cancellation-free form ρ/(ρ′/ρ·cos θ + sin θ)."""
        eps = self.eps_at_x(np.abs(t))
        theta = self.theta_minus - eps
        lp = self.dlog_rho(eps)
        return np.exp(self.log_rho(eps)) / (lp * np.cos(theta) + np.sin(theta))


Perturbation = Annotated[Union[NoPerturbation, PowerBump, LogCurve], Field(discriminator="kind")]


class BoundaryProfile(BaseModel):
    """Boundary function φ of a corner domain near its vertex.

    Example:
        ```python
        profile = BoundaryProfile.sector(2 / 3, perturbation=PowerBump(a=0.5, delta=0.5))
        profile.phi(np.array([[0.01]]))
        ```
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: Literal[2, 3] = 2
    g: list[float] = Field(default_factory=lambda: [0.0, 0.0])
    perturbation: Perturbation = Field(default_factory=NoPerturbation)
    radius: float = Field(default=1.0, gt=0.0)

    @model_validator(mode="after")
    def _check_consistency(self) -> BoundaryProfile:
        expected = 2 if self.dim == 2 else 1
        if len(self.g) != expected:
            msg = f"N={self.dim} profiles need {expected} slope value(s), got {len(self.g)}"
            raise ValueError(msg)
        if isinstance(self.perturbation, LogCurve):
            if self.dim != 2:
                msg = "Logarithmic curve profiles are planar (N=2)"
                raise ValueError(msg)
            slope = math.tan(self.perturbation.theta_minus)
            if any(abs(v - slope) > 1e-9 * max(1.0, abs(slope)) for v in self.g):
                msg = f"Slopes {self.g} do not match the logarithmic corner slope {slope}"
                raise ValueError(msg)
            self.perturbation.validate_graph()
            if self.radius > self.perturbation.x_max:
                msg = f"radius {self.radius} exceeds the curve window extent {self.perturbation.x_max:.6g}"
                raise GeometryError(msg)
        return self

    @classmethod
    def sector(
        cls,
        alpha: float,
        perturbation: NoPerturbation | PowerBump | None = None,
        radius: float = 1.0,
    ) -> BoundaryProfile:
        """Planar profile asymptotic to the symmetric sector of opening απ."""
        return cls(dim=2, g=sector_slopes(alpha), perturbation=perturbation or NoPerturbation(), radius=radius)

    @classmethod
    def cone(
        cls,
        opening: float,
        perturbation: NoPerturbation | PowerBump | None = None,
        radius: float = 1.0,
    ) -> BoundaryProfile:
        """Axisymmetric profile in ℝ³ asymptotic to the cone of colatitude ``opening``."""
        return cls(dim=3, g=[math.tan(0.5 * math.pi - opening)], perturbation=perturbation or NoPerturbation(), radius=radius)

    @property
    def is_straight(self) -> bool:
        return isinstance(self.perturbation, NoPerturbation)

    @property
    def delta(self) -> float | None:
        """Decay exponent of φ − φ₀ relative to |x'|, when the profile has one."""
        if isinstance(self.perturbation, PowerBump):
            return self.perturbation.delta
        return None

    def section(self) -> ConeSection:
        """Cap of the tangent cone φ₀."""
        if self.dim == 2:
            return ConeSection(dim=2, lower=math.atan(self.g[0]), upper=math.pi - math.atan(self.g[1]))
        return ConeSection.cone(0.5 * math.pi - math.atan(self.g[0]))

    # Line-coordinate evaluators

    def slope_line(self, t: FloatArray) -> FloatArray:
        if self.dim == 3:
            return np.full_like(t, self.g[0])
        return np.where(t >= 0, self.g[0], self.g[1])

    def phi0_line(self, t: FloatArray) -> FloatArray:
        return np.abs(t) * self.slope_line(t)

    def dphi0_line(self, t: FloatArray) -> FloatArray:
        return np.sign(t) * self.slope_line(t)

    def phi_line(self, t: FloatArray) -> FloatArray:
        pert = self.perturbation
        if isinstance(pert, PowerBump):
            return self.phi0_line(t) + pert.a * np.abs(t) ** (1.0 + pert.delta)
        if isinstance(pert, LogCurve):
            return pert.phi(t)
        return self.phi0_line(t)

    def dphi_line(self, t: FloatArray) -> FloatArray:
        pert = self.perturbation
        if isinstance(pert, PowerBump):
            return self.dphi0_line(t) + pert.a * (1.0 + pert.delta) * np.abs(t) ** pert.delta * np.sign(t)
        if isinstance(pert, LogCurve):
            return pert.dphi(t)
        return self.dphi0_line(t)

    def defect_line(self, t: FloatArray) -> FloatArray:
        pert = self.perturbation
        if isinstance(pert, PowerBump):
            return -pert.a * pert.delta * np.abs(t) ** (1.0 + pert.delta)
        if isinstance(pert, LogCurve):
            return pert.defect(t)
        return np.zeros_like(t)

    # Point evaluators on x' of shape (..., N-1)

    def _line(self, xp: ArrayLike) -> FloatArray:
        arr = np.asarray(xp, dtype=float)
        if arr.shape[-1:] != (self.dim - 1,):
            msg = f"Expected points with trailing dimension {self.dim - 1}, got shape {arr.shape}"
            raise DomainError(msg)
        t = arr[..., 0] if self.dim == 2 else np.linalg.norm(arr, axis=-1)
        if np.any(np.abs(t) >= self.radius):
            msg = f"Point outside the validity radius {self.radius}"
            raise DomainError(msg)
        return t

    def _lift(self, xp: ArrayLike, t: FloatArray, derivative: FloatArray) -> FloatArray:
        if self.dim == 2:
            return derivative[..., None]
        arr = np.asarray(xp, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            direction = np.where(t[..., None] > 0, arr / np.where(t > 0, t, 1.0)[..., None], 0.0)
        return derivative[..., None] * direction

    def phi0(self, xp: ArrayLike) -> FloatArray:
        return self.phi0_line(self._line(xp))

    def phi(self, xp: ArrayLike) -> FloatArray:
        return self.phi_line(self._line(xp))

    def grad_phi0(self, xp: ArrayLike) -> FloatArray:
        t = self._line(xp)
        return self._lift(xp, t, self.dphi0_line(t))

    def grad_phi(self, xp: ArrayLike) -> FloatArray:
        t = self._line(xp)
        return self._lift(xp, t, self.dphi_line(t))
