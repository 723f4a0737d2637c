"""Initial curves (phi, psi), their constraint checks, and conserved functions.

An initial curve supplies the position phi(vartheta) and velocity
psi(vartheta) of every surface point at t = 0.  Admissible data must be
light-like, delta(0, vartheta) = 0, and must generate a non-breaking
characteristic field, Lambda'(vartheta) >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateDataError, ExpressionError
from .expressions import CurveExpression
from .spacetime import SchwarzschildParams, Spacetime, induced_metric

EPS_DELTA = 1e-9
EPS_MONO = 1e-10
EPS_G11 = 1e-12

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class InitialCurve:
    """Sampled or closed-form initial position/velocity over vartheta.

    ``phi``, ``psi`` and ``phi_prime`` map a scalar vartheta to a length-dim
    coordinate vector.  Periodic curves must agree at both domain endpoints
    (angular coordinates may differ by an exact multiple of 2*pi).
    """

    phi: Callable[[float], np.ndarray]
    psi: Callable[[float], np.ndarray]
    phi_prime: Callable[[float], np.ndarray]
    theta_min: float
    theta_max: float
    periodic: bool = False
    dim: int = 4

    def __post_init__(self):
        if not self.theta_max > self.theta_min:
            raise ValueError("empty vartheta domain")
        if self.periodic:
            lo_phi, hi_phi = self.phi(self.theta_min), self.phi(self.theta_max)
            lo_psi, hi_psi = self.psi(self.theta_min), self.psi(self.theta_max)
            gap = np.abs(hi_phi - lo_phi)
            # allow exact 2*pi winding in angular coordinates
            winding = np.abs(gap - _TWO_PI * np.round(gap / _TWO_PI))
            if np.any(np.minimum(gap, winding) > 1e-12):
                raise ValueError("periodic curve: phi endpoints do not match")
            if np.any(np.abs(hi_psi - lo_psi) > 1e-12):
                raise ValueError("periodic curve: psi endpoints do not match")

    @property
    def period(self) -> float:
        return self.theta_max - self.theta_min

    def grid(self, n: int) -> np.ndarray:
        """Uniform vartheta samples; periodic curves omit the duplicate endpoint."""
        if self.periodic:
            return self.theta_min + self.period * np.arange(n) / n
        return np.linspace(self.theta_min, self.theta_max, n)


def curve_from_expressions(
    phi_exprs: Sequence[str],
    psi_exprs: Sequence[str],
    theta_range: tuple[float, float],
    periodic: bool = False,
) -> InitialCurve:
    """Build a curve from 4 position and 4 velocity expressions in vartheta."""
    if len(phi_exprs) != len(psi_exprs):
        raise ExpressionError("phi and psi must have the same number of components")
    phi_c = [CurveExpression(s) for s in phi_exprs]
    psi_c = [CurveExpression(s) for s in psi_exprs]
    dim = len(phi_c)

    def phi(v: float) -> np.ndarray:
        return np.array([c(v) for c in phi_c])

    def psi(v: float) -> np.ndarray:
        return np.array([c(v) for c in psi_c])

    def phi_prime(v: float) -> np.ndarray:
        return np.array([c.deriv(v) for c in phi_c])

    return InitialCurve(
        phi=phi,
        psi=psi,
        phi_prime=phi_prime,
        theta_min=float(theta_range[0]),
        theta_max=float(theta_range[1]),
        periodic=periodic,
        dim=dim,
    )


def curve_from_callables(
    phi: Callable[[float], np.ndarray],
    psi: Callable[[float], np.ndarray],
    phi_prime: Callable[[float], np.ndarray],
    theta_range: tuple[float, float],
    periodic: bool = False,
    dim: int = 4,
) -> InitialCurve:
    return InitialCurve(
        phi=phi,
        psi=psi,
        phi_prime=phi_prime,
        theta_min=float(theta_range[0]),
        theta_max=float(theta_range[1]),
        periodic=periodic,
        dim=dim,
    )


def _central_diff_4th(values: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    """4th-order first derivative on a uniform grid."""
    out = np.empty_like(values)
    if periodic:
        vm2, vm1 = np.roll(values, 2), np.roll(values, 1)
        vp1, vp2 = np.roll(values, -1), np.roll(values, -2)
        return (vm2 - 8 * vm1 + 8 * vp1 - vp2) / (12 * h)
    out[2:-2] = (
        values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]
    ) / (12 * h)
    # 4th-order one-sided / offset stencils at the boundary rows
    out[0] = (-25 * values[0] + 48 * values[1] - 36 * values[2]
              + 16 * values[3] - 3 * values[4]) / (12 * h)
    out[1] = (-3 * values[0] - 10 * values[1] + 18 * values[2]
              - 6 * values[3] + values[4]) / (12 * h)
    out[-2] = (3 * values[-1] + 10 * values[-2] - 18 * values[-3]
               + 6 * values[-4] - values[-5]) / (12 * h)
    out[-1] = (25 * values[-1] - 48 * values[-2] + 36 * values[-3]
               - 16 * values[-4] + 3 * values[-5]) / (12 * h)
    return out


def curve_from_samples(
    thetas: np.ndarray,
    phi_samples: np.ndarray,
    psi_samples: np.ndarray,
    periodic: bool = False,
) -> InitialCurve:
    """Cubic-spline curve through uniformly sampled (phi, psi) arrays.

    phi_samples/psi_samples have shape (n, dim).  phi' is built from
    4th-order central differences of the samples, then splined.
    """
    thetas = np.asarray(thetas, dtype=float)
    phi_samples = np.asarray(phi_samples, dtype=float)
    psi_samples = np.asarray(psi_samples, dtype=float)
    if phi_samples.ndim != 2:
        raise ValueError("phi_samples must be (n, dim)")
    n, dim = phi_samples.shape
    if n < 5:
        raise ValueError("need at least 5 samples")
    h = thetas[1] - thetas[0]
    if not np.allclose(np.diff(thetas), h, rtol=0, atol=1e-12 * max(1.0, abs(h))):
        raise ValueError("samples must be uniform in vartheta")

    if periodic:
        # angular coordinates may wind by 2*pi*k over one period; spline the
        # de-trended (strictly periodic) part and restore the linear trend
        gap = phi_samples[-1] - phi_samples[0]
        winding = _TWO_PI * np.round(gap / _TWO_PI)
        if np.any(np.abs(gap - winding) > 1e-9):
            raise ValueError(
                "periodic samples must match at the endpoints "
                "(up to 2*pi windings)"
            )
        if np.any(np.abs(psi_samples[-1] - psi_samples[0]) > 1e-9):
            raise ValueError("periodic psi samples must match at the endpoints")
        span = thetas[-1] - thetas[0]
        trend = winding / span
        detrended = phi_samples - np.outer(thetas - thetas[0], trend)
        detrended[-1] = detrended[0]
        psi_fixed = psi_samples.copy()
        psi_fixed[-1] = psi_fixed[0]
        phi_sp = CubicSpline(thetas, detrended, bc_type="periodic")
        psi_sp = CubicSpline(thetas, psi_fixed, bc_type="periodic")
        cols = []
        for j in range(dim):
            d = _central_diff_4th(detrended[:-1, j], h, periodic=True) + trend[j]
            cols.append(np.append(d, d[0]))
        dphi_sp = CubicSpline(thetas, np.vstack(cols).T, bc_type="periodic")
        theta0 = float(thetas[0])
        return InitialCurve(
            phi=lambda v: phi_sp(v) + (v - theta0) * trend,
            psi=lambda v: psi_sp(v),
            phi_prime=lambda v: dphi_sp(v),
            theta_min=theta0,
            theta_max=float(thetas[-1]),
            periodic=True,
            dim=dim,
        )

    phi_sp = CubicSpline(thetas, phi_samples, bc_type="not-a-knot")
    psi_sp = CubicSpline(thetas, psi_samples, bc_type="not-a-knot")
    dphi = np.vstack(
        [_central_diff_4th(phi_samples[:, j], h, periodic=False) for j in range(dim)]
    ).T
    dphi_sp = CubicSpline(thetas, dphi, bc_type="not-a-knot")

    return InitialCurve(
        phi=lambda v: phi_sp(v),
        psi=lambda v: psi_sp(v),
        phi_prime=lambda v: dphi_sp(v),
        theta_min=float(thetas[0]),
        theta_max=float(thetas[-1]),
        periodic=periodic,
        dim=dim,
    )


@dataclass(frozen=True)
class ConservedSet:
    """First integrals of one Schwarzschild characteristic.

    E is the energy-like integral tau_t (1 - 2m/r), L the azimuthal integral
    beta_t r^2 sin^2(alpha), K the Carter-like integral (non-negative), and
    C the radial integration constant of the first-order r equation.
    """

    E: float
    L: float
    K: float
    C: float

    def __post_init__(self):
        if self.K < -1e-12:
            raise ValueError(f"K must be non-negative, got {self.K}")
        if self.K < 0:
            object.__setattr__(self, "K", 0.0)


def lightlikeness_residual(
    curve: InitialCurve, spacetime: Spacetime, vartheta: float
) -> float:
    """delta(0, vartheta) of the initial data; zero for admissible curves."""
    x = curve.phi(vartheta)
    return induced_metric(spacetime, x, curve.psi(vartheta), curve.phi_prime(vartheta)).delta


def delta_expanded_schwarzschild(
    curve: InitialCurve, params: SchwarzschildParams, vartheta: float
) -> float:
    """delta(0, vartheta) via the expanded sum-of-cross-terms form.

    For the diagonal Schwarzschild metric with weights w_i the degeneracy
    indicator reduces to -sum_{i<j} w_i w_j (psi_i phi'_j - psi_j phi'_i)^2,
    an independent evaluation path used to cross-check the generic pullback.
    """
    m = params.m
    phi = curve.phi(vartheta)
    psi = curve.psi(vartheta)
    dphi = curve.phi_prime(vartheta)
    r, alpha = phi[1], phi[2]
    f = 1.0 - 2.0 * m / r
    w = np.array([-f, 1.0 / f, r * r, r * r * math.sin(alpha) ** 2])
    total = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            cross = psi[i] * dphi[j] - psi[j] * dphi[i]
            total -= w[i] * w[j] * cross * cross
    return total


def lambda0(
    curve: InitialCurve,
    spacetime: Spacetime,
    vartheta: float,
    eps_g11: float = EPS_G11,
) -> float:
    """Initial Burgers field Lambda(vartheta) = -g01/g11 of the curve."""
    x = curve.phi(vartheta)
    ind = induced_metric(spacetime, x, curve.psi(vartheta), curve.phi_prime(vartheta))
    if abs(ind.g11) <= eps_g11:
        raise DegenerateDataError(
            f"Lambda undefined at vartheta = {vartheta!r}: |g11| = {abs(ind.g11)!r}"
        )
    return -ind.g01 / ind.g11


def lambda0_schwarzschild(
    curve: InitialCurve,
    params: SchwarzschildParams,
    vartheta: float,
    eps_g11: float = EPS_G11,
) -> float:
    """Lambda(vartheta) via the explicit Schwarzschild component ratio."""
    m = params.m
    phi = curve.phi(vartheta)
    psi = curve.psi(vartheta)
    dphi = curve.phi_prime(vartheta)
    f = 1.0 - 2.0 * m / phi[1]
    r2 = phi[1] * phi[1]
    s2 = math.sin(phi[2]) ** 2
    num = (
        -f * dphi[0] * psi[0]
        + dphi[1] * psi[1] / f
        + r2 * dphi[2] * psi[2]
        + r2 * s2 * dphi[3] * psi[3]
    )
    den = (
        -f * dphi[0] ** 2
        + dphi[1] ** 2 / f
        + r2 * dphi[2] ** 2
        + r2 * s2 * dphi[3] ** 2
    )
    if abs(den) <= eps_g11:
        raise DegenerateDataError(
            f"Lambda undefined at vartheta = {vartheta!r}: |g11| = {abs(den)!r}"
        )
    return -num / den


@dataclass(frozen=True)
class MonotoneReport:
    """Outcome of the Lambda-monotonicity check over a vartheta grid."""

    passed: bool
    min_slope: float
    first_violation: tuple[float, float] | None
    borderline: tuple[float, ...]
    grid: np.ndarray
    lambdas: np.ndarray


def check_monotone(
    curve: InitialCurve,
    spacetime: Spacetime,
    grid: np.ndarray,
    eps_mono: float = EPS_MONO,
) -> MonotoneReport:
    """Difference-quotient check of Lambda'(vartheta) >= 0 over the grid."""
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must contain >= 2 strictly increasing samples")
    lam = np.array([lambda0(curve, spacetime, v) for v in grid])
    slopes = np.diff(lam) / np.diff(grid)
    min_slope = float(slopes.min())
    first_violation = None
    if min_slope < -eps_mono:
        i = int(np.argmax(slopes < -eps_mono))
        first_violation = (float(grid[i]), float(grid[i + 1]))
    borderline = tuple(
        float(grid[i]) for i in range(len(slopes)) if abs(slopes[i]) <= eps_mono
    )
    return MonotoneReport(
        passed=first_violation is None,
        min_slope=min_slope,
        first_violation=first_violation,
        borderline=borderline,
        grid=grid,
        lambdas=lam,
    )


def conserved_from_data(
    curve: InitialCurve, params: SchwarzschildParams, vartheta: float
) -> ConservedSet:
    """E, L, K and the radial constant C of one characteristic's data."""
    m = params.m
    phi = curve.phi(vartheta)
    psi = curve.psi(vartheta)
    r = phi[1]
    if r <= 2.0 * m:
        raise DegenerateDataError(
            f"initial radius {r!r} is inside the horizon 2m = {2*m!r}"
        )
    sin_a = math.sin(phi[2])
    cos_a = math.cos(phi[2])
    E = psi[0] * (1.0 - 2.0 * m / r)
    L = psi[3] * r * r * sin_a * sin_a
    K = r**4 * (psi[2] ** 2 + psi[3] ** 2 * sin_a * sin_a * cos_a * cos_a)
    if K < 0:
        K = 0.0
    C = (psi[1] ** 2 * r**3 + K * (r - 2.0 * m) - 2.0 * m * E * E * r * r) / (
        r * r * (r - 2.0 * m)
    )
    return ConservedSet(E=float(E), L=float(L), K=float(K), C=float(C))


@dataclass(frozen=True)
class ValidationReport:
    """Combined light-likeness + monotonicity verdict for an initial curve."""

    lightlike: bool
    max_abs_delta: float
    argmax_delta: float
    monotone: MonotoneReport

    @property
    def passed(self) -> bool:
        return self.lightlike and self.monotone.passed


def validate_curve(
    curve: InitialCurve,
    spacetime: Spacetime,
    n_samples: int = 201,
    eps_delta: float = EPS_DELTA,
    eps_mono: float = EPS_MONO,
) -> ValidationReport:
    grid = curve.grid(n_samples)
    deltas = np.array([lightlikeness_residual(curve, spacetime, v) for v in grid])
    worst = int(np.argmax(np.abs(deltas)))
    mono = check_monotone(curve, spacetime, grid, eps_mono=eps_mono)
    return ValidationReport(
        lightlike=bool(np.abs(deltas).max() <= eps_delta),
        max_abs_delta=float(np.abs(deltas).max()),
        argmax_delta=float(grid[worst]),
        monotone=mono,
    )
