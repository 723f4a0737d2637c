"""Burgers characteristic transform: forward map, monotone inverse, Jacobian.

The surface parameter change theta = vartheta + Lambda(vartheta) t freezes
the transport field lambda(t, theta) along straight characteristics.  When
Lambda' >= 0 the map is a diffeomorphism for all t >= 0 and the inverse
vartheta(t, theta) is found by safeguarded Newton inside a monotone bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import MapBreakdownError, MapInversionError
from .initial_data import EPS_MONO, InitialCurve, lambda0
from .spacetime import Spacetime


@dataclass(frozen=True)
class CharacteristicMap:
    """The solved initial field Lambda with its derivative and domain."""

    lambda_fn: Callable[[float], float]
    lambda_prime_fn: Callable[[float], float]
    theta_min: float
    theta_max: float
    periodic: bool = False
    eps_mono: float = EPS_MONO
    min_slope: float = 0.0
    t_max: float | None = None

    @property
    def period(self) -> float:
        return self.theta_max - self.theta_min

    @property
    def certified(self) -> bool:
        return self.min_slope >= -self.eps_mono

    def forward(self, vartheta: float, t: float) -> float:
        """theta reached at time t by the characteristic from vartheta."""
        return vartheta + self.lambda_fn(vartheta) * t

    def jacobian(self, t: float, vartheta: float) -> float:
        """d vartheta / d theta = 1 / (1 + Lambda'(vartheta) t), positive."""
        den = 1.0 + self.lambda_prime_fn(vartheta) * t
        if den <= 0.0:
            raise MapBreakdownError(
                f"characteristic map broke down at t={t!r}, vartheta={vartheta!r}: "
                f"1 + Lambda' t = {den!r}",
                t=t,
                vartheta=vartheta,
            )
        return 1.0 / den

    def invert(self, t: float, theta: float) -> float:
        """The unique vartheta with vartheta + Lambda(vartheta) t = theta."""
        if t < 0:
            raise ValueError(f"t must be non-negative, got {t}")
        lo, hi = self.theta_min, self.theta_max
        if self.periodic:
            # shift theta by whole periods into the image of one fundamental domain
            start = self.forward(lo, t)
            theta = theta - self.period * math.floor((theta - start) / self.period)

        # contract: residual < 1e-12 (1 + |theta|); Newton usually reaches
        # machine precision, so converge to the tighter target first
        tol = 1e-12 * (1.0 + abs(theta))
        target = 1e-15 * (1.0 + abs(theta))
        f_lo = self.forward(lo, t) - theta
        f_hi = self.forward(hi, t) - theta
        if f_lo > tol or f_hi < -tol:
            raise MapInversionError(
                f"theta = {theta!r} outside the characteristic image "
                f"[{self.forward(lo, t)!r}, {self.forward(hi, t)!r}] at t = {t!r}"
            )
        if abs(f_lo) <= target:
            return lo
        if abs(f_hi) <= target:
            return hi

        x = 0.5 * (lo + hi)
        for _ in range(200):
            f = self.forward(x, t) - theta
            if abs(f) <= target:
                return x
            if f > 0.0:
                hi = x
            else:
                lo = x
            slope = 1.0 + self.lambda_prime_fn(x) * t
            if slope <= 0.0:
                raise MapBreakdownError(
                    f"non-monotone map detected at t={t!r}, vartheta={x!r}",
                    t=t,
                    vartheta=x,
                )
            step = f / slope
            x_new = x - step
            if not (lo < x_new < hi):
                x_new = 0.5 * (lo + hi)  # Newton left the bracket: bisect
            if x_new == x:
                break
            x = x_new
        f = self.forward(x, t) - theta
        if abs(f) <= tol:
            return x
        raise MapInversionError(
            f"inversion stalled at t={t!r}, theta={theta!r}, residual={f!r}"
        )

    def lambda_field(self, t: float, theta: float) -> float:
        """The transported field lambda(t, theta) = Lambda(vartheta(t, theta))."""
        return self.lambda_fn(self.invert(t, theta))

    def image_interval(self, t: float) -> tuple[float, float]:
        """theta-range covered by the characteristics at time t."""
        return self.forward(self.theta_min, t), self.forward(self.theta_max, t)


def map_from_callables(
    lambda_fn: Callable[[float], float],
    lambda_prime_fn: Callable[[float], float],
    theta_range: tuple[float, float],
    periodic: bool = False,
    eps_mono: float = EPS_MONO,
    n_certify: int = 1001,
) -> CharacteristicMap:
    """Wrap a closed-form Lambda, certifying monotonicity on a grid."""
    lo, hi = float(theta_range[0]), float(theta_range[1])
    grid = np.linspace(lo, hi, n_certify)
    min_slope = float(min(lambda_prime_fn(v) for v in grid))
    return CharacteristicMap(
        lambda_fn=lambda_fn,
        lambda_prime_fn=lambda_prime_fn,
        theta_min=lo,
        theta_max=hi,
        periodic=periodic,
        eps_mono=eps_mono,
        min_slope=min_slope,
    )


def map_from_initial_data(
    curve: InitialCurve,
    spacetime: Spacetime,
    n_samples: int = 513,
    eps_mono: float = EPS_MONO,
) -> CharacteristicMap:
    """Sample Lambda(vartheta) over the curve and spline it.

    The spline (not the raw pointwise evaluation) becomes the map's field,
    so forward and invert are exactly consistent with each other; the
    sampling density only controls fidelity to the underlying data.
    """
    if curve.periodic:
        base = curve.grid(n_samples)
        grid = np.append(base, curve.theta_max)
        lam = np.array([lambda0(curve, spacetime, v) for v in base])
        lam = np.append(lam, lam[0])
        spline = CubicSpline(grid, lam, bc_type="periodic")
    else:
        grid = np.linspace(curve.theta_min, curve.theta_max, n_samples)
        lam = np.array([lambda0(curve, spacetime, v) for v in grid])
        spline = CubicSpline(grid, lam, bc_type="not-a-knot")
    dspline = spline.derivative()
    slopes = dspline(grid)
    return CharacteristicMap(
        lambda_fn=lambda v: float(spline(v)),
        lambda_prime_fn=lambda v: float(dspline(v)),
        theta_min=curve.theta_min,
        theta_max=curve.theta_max,
        periodic=curve.periodic,
        eps_mono=eps_mono,
        min_slope=float(slopes.min()),
    )


def burgers_residual_grid(
    cmap: CharacteristicMap,
    t_values: np.ndarray,
    theta_values: np.ndarray,
) -> float:
    """Max |lambda_t + lambda lambda_theta| by centered differences.

    Both grids must be uniform; the residual is evaluated on interior nodes
    only.  Second-order convergence of this quantity under refinement is the
    numerical witness that the transported field solves the Burgers equation.
    """
    t_values = np.asarray(t_values, dtype=float)
    theta_values = np.asarray(theta_values, dtype=float)
    dt = t_values[1] - t_values[0]
    dth = theta_values[1] - theta_values[0]
    lam = np.array(
        [[cmap.lambda_field(t, th) for th in theta_values] for t in t_values]
    )
    lam_t = (lam[2:, 1:-1] - lam[:-2, 1:-1]) / (2 * dt)
    lam_th = (lam[1:-1, 2:] - lam[1:-1, :-2]) / (2 * dth)
    residual = lam_t + lam[1:-1, 1:-1] * lam_th
    return float(np.abs(residual).max())
