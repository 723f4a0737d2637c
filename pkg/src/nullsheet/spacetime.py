"""Ambient Lorentzian metrics: components, connection coefficients, induced metrics.

The package works in geometric units (G = c = 1).  The Schwarzschild chart
uses coordinates (tau, r, alpha, beta) with indices 0..3, line element

    ds^2 = -(1 - 2m/r) dtau^2 + (1 - 2m/r)^(-1) dr^2
           + r^2 (dalpha^2 + sin(alpha)^2 dbeta^2),

valid outside the horizon r > 2m.  A surface x(t, theta) embedded in the
ambient spacetime carries the induced metric g_ab = g~(x_a, x_b); its
degeneracy indicator is delta = g01^2 - g00*g11 (zero on light-like
surfaces, positive on time-like ones, negative on space-like ones).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError

# Horizon margin for chart validity: (1 - 2m/r)^(-1) blows up at r = 2m.
HORIZON_MARGIN = 1e-10


@dataclass(frozen=True)
class SchwarzschildParams:
    """Mass of the central body, geometric units (carries length units)."""

    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")


@dataclass(frozen=True)
class InducedMetric:
    """Components of the metric induced on a 2-surface by tangents (x_t, x_theta)."""

    g00: float
    g01: float
    g11: float
    delta: float

    @classmethod
    def from_components(cls, g00: float, g01: float, g11: float) -> "InducedMetric":
        return cls(g00=g00, g01=g01, g11=g11, delta=g01 * g01 - g00 * g11)


@dataclass(frozen=True)
class Spacetime:
    """An ambient metric: component evaluators plus chart metadata.

    ``metric_at`` returns the symmetric dim x dim matrix of components,
    ``christoffel_at`` the rank-(1,2) connection array Gamma[mu, nu, rho]
    (symmetric in nu, rho).  ``coordinate_domain`` returns None for an
    admissible point or a human-readable violation message.
    ``acceleration_at``, when present, is a fast closed-form evaluation of
    the geodesic acceleration -Gamma^mu_{nu rho} v^nu v^rho; it must agree
    with the contraction of ``christoffel_at`` and exists so that the two
    can be checked against each other.
    """

    name: str
    dim: int
    metric_at: Callable[[np.ndarray], np.ndarray]
    christoffel_at: Callable[[np.ndarray], np.ndarray]
    coordinate_domain: Callable[[np.ndarray], str | None]
    acceleration_at: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    meta: Mapping[str, float] = field(default_factory=dict)

    def check_admissible(self, x: np.ndarray) -> None:
        violation = self.coordinate_domain(x)
        if violation is not None:
            raise DomainError(f"{self.name}: {violation}")


def schwarzschild(params: SchwarzschildParams) -> Spacetime:
    """Schwarzschild exterior in (tau, r, alpha, beta) coordinates."""
    m = float(params.m)
    r_min = 2.0 * m * (1.0 + HORIZON_MARGIN)

    def domain(x):
        r = x[1]
        if not r >= r_min:
            return f"r = {r!r} is inside or too close to the horizon r = {2*m!r}"
        return None

    def metric(x):
        g = np.zeros((4, 4))
        r, alpha = x[1], x[2]
        if not r >= r_min:
            raise DomainError(
                f"schwarzschild: r = {r!r} violates r > 2m", coordinate="r", value=r
            )
        f = 1.0 - 2.0 * m / r
        g[0, 0] = -f
        g[1, 1] = 1.0 / f
        g[2, 2] = r * r
        g[3, 3] = r * r * math.sin(alpha) ** 2
        return g

    def christoffel(x):
        r, alpha = x[1], x[2]
        if not r >= r_min:
            raise DomainError(
                f"schwarzschild: r = {r!r} violates r > 2m", coordinate="r", value=r
            )
        sin_a, cos_a = math.sin(alpha), math.cos(alpha)
        if abs(sin_a) < 1e-15:
            raise DomainError(
                f"schwarzschild: sin(alpha) = 0 at alpha = {alpha!r} (axis)",
                coordinate="alpha",
                value=alpha,
            )
        f = 1.0 - 2.0 * m / r
        gamma = np.zeros((4, 4, 4))
        a = m / (r * (r - 2.0 * m))  # = m / (r^2 f)
        gamma[0, 0, 1] = gamma[0, 1, 0] = a
        gamma[1, 0, 0] = m * f / (r * r)
        gamma[1, 1, 1] = -a
        gamma[1, 2, 2] = -(r - 2.0 * m)
        gamma[1, 3, 3] = -(r - 2.0 * m) * sin_a * sin_a
        gamma[2, 1, 2] = gamma[2, 2, 1] = 1.0 / r
        gamma[2, 3, 3] = -sin_a * cos_a
        gamma[3, 1, 3] = gamma[3, 3, 1] = 1.0 / r
        gamma[3, 2, 3] = gamma[3, 3, 2] = cos_a / sin_a
        return gamma

    def acceleration(y, v):
        r, alpha = y[1], y[2]
        if not r >= r_min:
            raise DomainError(
                f"schwarzschild: r = {r!r} violates r > 2m", coordinate="r", value=r
            )
        sin_a, cos_a = math.sin(alpha), math.cos(alpha)
        rm = r - 2.0 * m
        a = np.empty(4)
        a[0] = -2.0 * m / (r * rm) * v[0] * v[1]
        a[1] = (
            rm * sin_a * sin_a * v[3] * v[3]
            + rm * v[2] * v[2]
            + m / (r * rm) * v[1] * v[1]
            - m * rm / r**3 * v[0] * v[0]
        )
        a[2] = -2.0 / r * v[1] * v[2] + sin_a * cos_a * v[3] * v[3]
        a[3] = -2.0 / r * v[1] * v[3]
        if v[2] != 0.0 and v[3] != 0.0:
            # cot(alpha) pole only matters when the beta motion is active
            a[3] -= 2.0 * cos_a / sin_a * v[2] * v[3]
        return a

    return Spacetime(
        name="schwarzschild",
        dim=4,
        metric_at=metric,
        christoffel_at=christoffel,
        coordinate_domain=domain,
        acceleration_at=acceleration,
        meta={"mass": m, "spherical": True},
    )


def minkowski(dim: int = 4) -> Spacetime:
    """Flat spacetime in Cartesian coordinates; all connections vanish."""
    eta = np.diag([-1.0] + [1.0] * (dim - 1))
    zero = np.zeros((dim, dim, dim))

    return Spacetime(
        name="minkowski",
        dim=dim,
        metric_at=lambda x: eta.copy(),
        christoffel_at=lambda x: zero.copy(),
        coordinate_domain=lambda x: None,
        acceleration_at=lambda y, v: np.zeros(dim),
        meta={},
    )


def minkowski_spherical() -> Spacetime:
    """Flat spacetime in spherical coordinates (tau, r, alpha, beta); m -> 0 limit."""

    def domain(x):
        if not x[1] > 0:
            return f"r = {x[1]!r} must be positive"
        return None

    def metric(x):
        r, alpha = x[1], x[2]
        if not r > 0:
            raise DomainError(
                f"minkowski_spherical: r = {r!r} must be positive",
                coordinate="r",
                value=r,
            )
        return np.diag([-1.0, 1.0, r * r, (r * math.sin(alpha)) ** 2])

    def christoffel(x):
        r, alpha = x[1], x[2]
        if not r > 0:
            raise DomainError(
                f"minkowski_spherical: r = {r!r} must be positive",
                coordinate="r",
                value=r,
            )
        sin_a, cos_a = math.sin(alpha), math.cos(alpha)
        if abs(sin_a) < 1e-15:
            raise DomainError(
                f"minkowski_spherical: sin(alpha) = 0 at alpha = {alpha!r} (axis)",
                coordinate="alpha",
                value=alpha,
            )
        gamma = np.zeros((4, 4, 4))
        gamma[1, 2, 2] = -r
        gamma[1, 3, 3] = -r * sin_a * sin_a
        gamma[2, 1, 2] = gamma[2, 2, 1] = 1.0 / r
        gamma[2, 3, 3] = -sin_a * cos_a
        gamma[3, 1, 3] = gamma[3, 3, 1] = 1.0 / r
        gamma[3, 2, 3] = gamma[3, 3, 2] = cos_a / sin_a
        return gamma

    def acceleration(y, v):
        r, alpha = y[1], y[2]
        sin_a, cos_a = math.sin(alpha), math.cos(alpha)
        a = np.empty(4)
        a[0] = 0.0
        a[1] = r * v[2] * v[2] + r * sin_a * sin_a * v[3] * v[3]
        a[2] = -2.0 / r * v[1] * v[2] + sin_a * cos_a * v[3] * v[3]
        a[3] = -2.0 / r * v[1] * v[3]
        if v[2] != 0.0 and v[3] != 0.0:
            a[3] -= 2.0 * cos_a / sin_a * v[2] * v[3]
        return a

    return Spacetime(
        name="minkowski_spherical",
        dim=4,
        metric_at=metric,
        christoffel_at=christoffel,
        coordinate_domain=domain,
        acceleration_at=acceleration,
        meta={"spherical": True},
    )


def christoffel_fd(
    spacetime: Spacetime, x: np.ndarray, h: float | np.ndarray | None = None
) -> np.ndarray:
    """Central-difference connection coefficients from the metric alone.

    Fallback for user-supplied metrics without closed-form symbols.  The
    point must be interior to the chart with margin >= h in every
    coordinate.  Accuracy is O(h^2); the default step is the usual
    eps^(1/3) scaling for central differences.
    """
    x = np.asarray(x, dtype=float)
    dim = spacetime.dim
    if h is None:
        steps = np.finfo(float).eps ** (1.0 / 3.0) * np.maximum(1.0, np.abs(x))
    else:
        steps = np.broadcast_to(np.asarray(h, dtype=float), (dim,)).copy()

    spacetime.check_admissible(x)
    dg = np.zeros((dim, dim, dim))  # dg[s, n, r] = d g_{nr} / d x^s
    for s in range(dim):
        xp = x.copy()
        xm = x.copy()
        xp[s] += steps[s]
        xm[s] -= steps[s]
        for probe in (xp, xm):
            violation = spacetime.coordinate_domain(probe)
            if violation is not None:
                raise DomainError(
                    f"finite-difference margin violation along coordinate {s}: "
                    f"{violation}"
                )
        dg[s] = (spacetime.metric_at(xp) - spacetime.metric_at(xm)) / (2.0 * steps[s])

    g = spacetime.metric_at(x)
    try:
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"metric is singular at {x!r}") from exc

    # Gamma^mu_{nu rho} = 1/2 g^{mu s} (d_nu g_{s rho} + d_rho g_{s nu} - d_s g_{nu rho})
    brackets = (
        np.einsum("nsr->snr", dg) + np.einsum("rsn->snr", dg) - dg
    )
    return 0.5 * np.einsum("ms,snr->mnr", g_inv, brackets)


def induced_metric(
    spacetime: Spacetime, x: np.ndarray, xt: np.ndarray, xtheta: np.ndarray
) -> InducedMetric:
    """Pullback metric components for the tangent pair (x_t, x_theta)."""
    g = spacetime.metric_at(np.asarray(x, dtype=float))
    xt = np.asarray(xt, dtype=float)
    xtheta = np.asarray(xtheta, dtype=float)
    g00 = float(xt @ g @ xt)
    g01 = float(xt @ g @ xtheta)
    g11 = float(xtheta @ g @ xtheta)
    return InducedMetric.from_components(g00, g01, g11)
