"""Closed-form reference solutions used as ground truth for the pipeline.

Three families of light-like extremal surfaces in Schwarzschild spacetime
admit exact descriptions:

* radial null surfaces: r moves linearly in t, tau follows a log relation,
  the polar angle rides along unchanged;
* turning-point surfaces launched tangentially at radius r0: circular at
  the photon sphere r0 = 3m, otherwise r(alpha) solves a cubic quadrature
  expressed through the incomplete elliptic integral F;
* boosted curves with psi = phi' (unit characteristic speed, Lambda = -1):
  circular at r0 = 4m, elliptic otherwise.

Elliptic branches are exposed both as residual evaluators of the
alpha <-> u relation and as solved coordinate functions of (t, vartheta);
the latter invert the quadrature t(xi) with bracketed Newton so they remain
independent of the Runge-Kutta integration they are used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .elliptic import complete_elliptic_k, elliptic_f
from .errors import DomainError, NullsheetError, OracleMismatchError
from .expressions import CurveExpression
from .initial_data import ConservedSet, InitialCurve, curve_from_callables
from .reduction import example2_roots, example3_roots
from .spacetime import SchwarzschildParams

CASE_TOL = 1e-12  # relative tolerance on r0/m for double-root detection
_HORIZON_PAD = 1e-8


class OracleKind(Enum):
    RADIAL_NULL = "radial_null"
    PHOTON_SPHERE = "photon_sphere"
    EX2_INNER = "ex2_inner"
    EX2_OUTER = "ex2_outer"
    EX3_CIRCULAR = "ex3_circular"
    EX3_OUTER = "ex3_outer"
    EX3_INNER = "ex3_inner"


def _as_curve_expression(value) -> CurveExpression:
    if isinstance(value, CurveExpression):
        return value
    if isinstance(value, str):
        return CurveExpression(value)
    return CurveExpression(repr(float(value)))


@dataclass(frozen=True)
class OracleParams:
    m: float = 1.0
    r0: float = 10.0
    r1: float = 1.0
    f: str | float = 1.0
    tau0: float = 0.0
    alpha0: str | float = math.pi / 2
    beta0: float = 0.0
    sign: int = 1
    sign_alpha: int = 1
    theta_range: tuple[float, float] = (0.0, 2.0 * math.pi)
    periodic: bool = True


class RadialNullOracle:
    """r = r1 t + r0 with the log tau relation; alpha frozen per characteristic."""

    kind = OracleKind.RADIAL_NULL

    def __init__(self, params: OracleParams):
        if params.r0 <= 2.0 * params.m:
            raise ValueError("r0 must exceed the horizon 2m")
        if params.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.params = params
        self.m = params.m
        self.r0 = params.r0
        self.r1 = params.r1
        self.tau0 = params.tau0
        self.sign = params.sign
        self._alpha0 = _as_curve_expression(params.alpha0)

    def conserved(self, vartheta: float) -> ConservedSet:
        return ConservedSet(E=self.sign * self.r1, L=0.0, K=0.0, C=self.r1**2)

    def evaluate(self, t: float, vartheta: float) -> np.ndarray:
        m, r0 = self.m, self.r0
        r = self.r1 * t + r0
        if r <= 2.0 * m * (1.0 + _HORIZON_PAD):
            raise DomainError(f"radial solution reached the horizon at t = {t!r}")
        tau = self.tau0 + self.sign * (
            r - r0 + 2.0 * m * math.log((r - 2.0 * m) / (r0 - 2.0 * m))
        )
        return np.array([tau, r, self._alpha0(vartheta), vartheta])

    def relation_residual(self, t: float, x: np.ndarray, vartheta: float) -> float:
        """Residual of the implicit tau(r) relation."""
        m, r0 = self.m, self.r0
        tau, r = x[0], x[1]
        lhs = r - r0 + 2.0 * m * math.log((r - 2.0 * m) / (r0 - 2.0 * m))
        return abs(lhs - self.sign * (tau - self.tau0))

    def initial_curve(self) -> InitialCurve:
        m, r0, r1 = self.m, self.r0, self.r1
        psi0 = self.sign * r1 / (1.0 - 2.0 * m / r0)
        alpha0 = self._alpha0

        return curve_from_callables(
            phi=lambda v: np.array([self.tau0, r0, alpha0(v), v]),
            psi=lambda v: np.array([psi0, r1, 0.0, 0.0]),
            phi_prime=lambda v: np.array([0.0, 0.0, alpha0.deriv(v), 1.0]),
            theta_range=self.params.theta_range,
            periodic=self.params.periodic,
        )


class PhotonSphereOracle:
    """Circular null characteristics at r = 3m with uniform polar drift."""

    kind = OracleKind.PHOTON_SPHERE

    def __init__(self, params: OracleParams):
        m = params.m
        if abs(params.r0 / m - 3.0) > 3.0 * CASE_TOL:
            raise ValueError("photon-sphere solution requires r0 = 3m")
        if params.sign_alpha not in (1, -1):
            raise ValueError("sign_alpha must be +1 or -1")
        self.params = params
        self.m = m
        self.r0 = 3.0 * m
        self.tau0 = params.tau0
        self.s_alpha = params.sign_alpha
        self._f = _as_curve_expression(params.f)
        alpha0 = _as_curve_expression(params.alpha0)
        if not alpha0.is_constant():
            raise ValueError("alpha0 must be constant for turning-point data")
        self.alpha0 = alpha0(0.0)

    def conserved(self, vartheta: float) -> ConservedSet:
        m, r0 = self.m, self.r0
        f = self._f(vartheta)
        E = (1.0 - 2.0 * m / r0) * f
        K = r0 * (r0 - 2.0 * m) * f * f
        C = (K * (r0 - 2.0 * m) - 2.0 * m * E * E * r0 * r0) / (
            r0 * r0 * (r0 - 2.0 * m)
        )
        return ConservedSet(E=E, L=0.0, K=K, C=C)

    def evaluate(self, t: float, vartheta: float) -> np.ndarray:
        f = self._f(vartheta)
        tau = f * t + self.tau0
        alpha = self.alpha0 + self.s_alpha * abs(f) * t / (3.0 * math.sqrt(3.0) * self.m)
        return np.array([tau, self.r0, alpha, vartheta])

    def relation_residual(self, t: float, x: np.ndarray, vartheta: float) -> float:
        ref = self.evaluate(t, vartheta)
        return float(np.max(np.abs(x - ref)))

    def initial_curve(self) -> InitialCurve:
        m, r0 = self.m, self.r0
        f = self._f
        s = self.s_alpha
        coef = math.sqrt(r0 * (r0 - 2.0 * m)) / (r0 * r0)

        return curve_from_callables(
            phi=lambda v: np.array([self.tau0, r0, self.alpha0, v]),
            psi=lambda v: np.array([f(v), 0.0, s * coef * abs(f(v)), 0.0]),
            phi_prime=lambda v: np.array([0.0, 0.0, 0.0, 1.0]),
            theta_range=self.params.theta_range,
            periodic=self.params.periodic,
        )


class Example3CircularOracle:
    """Time-like circular characteristics at r = 4m spanning a null surface."""

    kind = OracleKind.EX3_CIRCULAR

    def __init__(self, params: OracleParams):
        m = params.m
        if abs(params.r0 / m - 4.0) > 4.0 * CASE_TOL:
            raise ValueError("circular boosted solution requires r0 = 4m")
        if params.sign_alpha not in (1, -1):
            raise ValueError("sign_alpha must be +1 or -1")
        self.params = params
        self.m = m
        self.r0 = 4.0 * m
        self.beta0 = params.beta0
        self.s_alpha = params.sign_alpha

    def conserved(self, vartheta: float) -> ConservedSet:
        m, r0 = self.m, self.r0
        return ConservedSet(
            E=1.0 - 2.0 * m / r0, L=0.0, K=2.0 * m * (r0 - 2.0 * m), C=0.0
        )

    def evaluate(self, t: float, vartheta: float) -> np.ndarray:
        alpha = self.s_alpha * (t + vartheta) / (8.0 * self.m)
        return np.array([t + vartheta, self.r0, alpha, self.beta0])

    def relation_residual(self, t: float, x: np.ndarray, vartheta: float) -> float:
        ref = self.evaluate(t, vartheta)
        return float(np.max(np.abs(x - ref)))

    def initial_curve(self) -> InitialCurve:
        m, r0 = self.m, self.r0
        s = self.s_alpha
        coef = math.sqrt(2.0 * m * (r0 - 2.0 * m)) / (r0 * r0)  # = 1/(8m) at r0 = 4m

        def tangent(v: float) -> np.ndarray:
            return np.array([1.0, 0.0, s * coef, 0.0])

        return curve_from_callables(
            phi=lambda v: np.array([v, r0, s * coef * v, self.beta0]),
            psi=tangent,
            phi_prime=tangent,
            theta_range=self.params.theta_range,
            periodic=False,
        )


class EllipticBranchOracle:
    """Non-circular turning-point branches expressed through F(xi/2, k).

    ``branch`` is "sec" for infall toward the horizon (u grows from the
    largest root) or "cos" for escape (u shrinks from the middle root).
    The alpha <-> u relation is exact; t(xi) and tau(xi) are cumulative
    adaptive quadratures, inverted by bracketed Newton for evaluation.
    """

    _N_TABLE = 200

    def __init__(
        self,
        kind: OracleKind,
        params: OracleParams,
        branch: str,
        roots: tuple[float, float, float],
        alpha_init: Callable[[float], float],
        tau_init: Callable[[float], float],
        beta_of: Callable[[float], float],
        conserved_of: Callable[[float], ConservedSet],
        curve_builder: Callable[[], InitialCurve],
    ):
        self.kind = kind
        self.params = params
        self.m = params.m
        self.r0 = params.r0
        self.branch = branch
        self.s_alpha = params.sign_alpha
        lo, mid, hi = sorted(roots)
        self.u_lo, self.u_mid, self.u_hi = lo, mid, hi
        self.k2 = (mid - lo) / (hi - lo)
        if not 0.0 < self.k2 < 1.0:
            raise ValueError(f"elliptic modulus out of range: k^2 = {self.k2}")
        self.k = math.sqrt(self.k2)
        self.c = 1.0 / math.sqrt(2.0 * self.m * (hi - lo))
        self._alpha_init = alpha_init
        self._tau_init = tau_init
        self._beta_of = beta_of
        self.conserved = conserved_of
        self.initial_curve = curve_builder
        self._tables: dict[float, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

        # evaluation stops slightly outside the horizon: the tau quadrature
        # has a pole at u = 1/(2m)
        u_cap = 1.0 / (2.0 * self.m * (1.0 + 1e-6))
        if branch == "sec":
            self.xi_start = 0.0
            if self.u_hi >= u_cap:
                raise ValueError("initial radius too close to the horizon")
            self.xi_end = self._xi_of_u_sec(u_cap)
        elif branch == "cos":
            self.xi_start = math.pi
            u_floor = max(self.u_lo, 0.0) + 1e-3 * (self.u_mid - max(self.u_lo, 0.0))
            self.xi_end = self._xi_of_u_cos(u_floor)
        else:
            raise ValueError(f"unknown branch {branch!r}")

    # -- substitution and its inverse ------------------------------------
    def u_of_xi(self, xi: float) -> float:
        if self.branch == "sec":
            sec2 = 1.0 / math.cos(0.5 * xi) ** 2
            return self.u_mid + (self.u_hi - self.u_mid) * sec2
        return self.u_lo + 0.5 * (self.u_mid - self.u_lo) * (1.0 - math.cos(xi))

    def _xi_of_u_sec(self, u: float) -> float:
        ratio = (self.u_hi - self.u_mid) / (u - self.u_mid)
        ratio = min(1.0, max(0.0, ratio))
        return 2.0 * math.acos(math.sqrt(ratio))

    def _xi_of_u_cos(self, u: float) -> float:
        arg = 1.0 - 2.0 * (u - self.u_lo) / (self.u_mid - self.u_lo)
        return math.acos(min(1.0, max(-1.0, arg)))

    def xi_of_u(self, u: float) -> float:
        if self.branch == "sec":
            if u < self.u_hi - 1e-12 * max(1.0, abs(self.u_hi)):
                raise DomainError(f"u = {u!r} below the branch start {self.u_hi!r}")
            return self._xi_of_u_sec(max(u, self.u_hi))
        if u > self.u_mid + 1e-12 * max(1.0, abs(self.u_mid)):
            raise DomainError(f"u = {u!r} above the branch start {self.u_mid!r}")
        return self._xi_of_u_cos(min(u, self.u_mid))

    # -- the exact alpha relation ----------------------------------------
    def alpha_of_xi(self, xi: float, vartheta: float) -> float:
        base = self._alpha_init(vartheta)
        if self.branch == "sec":
            return base + self.s_alpha * 2.0 * self.c * elliptic_f(0.5 * xi, self.k)
        sweep = complete_elliptic_k(self.k) - elliptic_f(0.5 * xi, self.k)
        return base + self.s_alpha * 2.0 * self.c * sweep

    def relation_residual(self, t: float, x: np.ndarray, vartheta: float) -> float:
        """|alpha - alpha_predicted(u)| for a trajectory point."""
        xi = self.xi_of_u(1.0 / x[1])
        return abs(x[2] - self.alpha_of_xi(xi, vartheta))

    # -- quadrature machinery ---------------------------------------------
    def _dt_dxi(self, xi: float, sqrt_k: float) -> float:
        u = self.u_of_xi(xi)
        root = math.sqrt(1.0 - self.k2 * math.sin(0.5 * xi) ** 2)
        return self.c / (sqrt_k * u * u * root)

    def _dtau_dxi(self, xi: float, sqrt_k: float, energy: float) -> float:
        u = self.u_of_xi(xi)
        return self._dt_dxi(xi, sqrt_k) * energy / (1.0 - 2.0 * self.m * u)

    def _table(self, vartheta: float):
        key = float(vartheta)
        if key not in self._tables:
            cs = self.conserved(vartheta)
            sqrt_k = math.sqrt(cs.K)
            direction = 1.0 if self.branch == "sec" else -1.0
            xis = np.linspace(self.xi_start, self.xi_end, self._N_TABLE)
            t_vals = [0.0]
            tau_vals = [self._tau_init(vartheta)]
            for i in range(1, len(xis)):
                dt, _ = quad(
                    lambda x: self._dt_dxi(x, sqrt_k),
                    xis[i - 1],
                    xis[i],
                    epsabs=1e-14,
                    epsrel=1e-13,
                )
                dtau, _ = quad(
                    lambda x: self._dtau_dxi(x, sqrt_k, cs.E),
                    xis[i - 1],
                    xis[i],
                    epsabs=0.0,
                    epsrel=1e-12,
                )
                t_vals.append(t_vals[-1] + direction * dt)
                tau_vals.append(tau_vals[-1] + direction * dtau)
            self._tables[key] = (xis, np.array(t_vals), np.array(tau_vals))
        return self._tables[key]

    def _xi_of_t(self, t: float, vartheta: float) -> tuple[float, int]:
        """Invert t(xi) by table bracket plus Newton with the exact derivative."""
        xis, t_vals, _ = self._table(vartheta)
        if t < -1e-12 or t > t_vals[-1]:
            raise DomainError(
                f"t = {t!r} outside the oracle's certified range [0, {t_vals[-1]!r}]"
            )
        cs = self.conserved(vartheta)
        sqrt_k = math.sqrt(cs.K)
        direction = 1.0 if self.branch == "sec" else -1.0
        j = int(np.searchsorted(t_vals, t, side="right")) - 1
        j = min(max(j, 0), len(xis) - 2)
        xi = float(
            xis[j]
            + (xis[j + 1] - xis[j])
            * (t - t_vals[j])
            / max(t_vals[j + 1] - t_vals[j], 1e-300)
        )
        for _ in range(60):
            t_here = t_vals[j] + direction * quad(
                lambda x: self._dt_dxi(x, sqrt_k),
                xis[j],
                xi,
                epsabs=1e-14,
                epsrel=1e-13,
            )[0]
            err = t_here - t
            if abs(err) < 1e-13 * (1.0 + abs(t)):
                break
            slope = direction * self._dt_dxi(xi, sqrt_k)
            xi -= err / slope
            lo, hi = min(self.xi_start, self.xi_end), max(self.xi_start, self.xi_end)
            xi = min(max(xi, lo), hi)
        return xi, j

    def evaluate(self, t: float, vartheta: float) -> np.ndarray:
        xi, j = self._xi_of_t(t, vartheta)
        xis, _, tau_vals = self._table(vartheta)
        cs = self.conserved(vartheta)
        sqrt_k = math.sqrt(cs.K)
        direction = 1.0 if self.branch == "sec" else -1.0
        tau = tau_vals[j] + direction * quad(
            lambda x: self._dtau_dxi(x, sqrt_k, cs.E),
            xis[j],
            xi,
            epsabs=0.0,
            epsrel=1e-12,
        )[0]
        u = self.u_of_xi(xi)
        return np.array(
            [tau, 1.0 / u, self.alpha_of_xi(xi, vartheta), self._beta_of(vartheta)]
        )


def _ex2_elliptic(params: OracleParams, inner: bool) -> EllipticBranchOracle:
    m, r0 = params.m, params.r0
    if params.sign_alpha not in (1, -1):
        raise ValueError("sign_alpha must be +1 or -1")
    f_expr = _as_curve_expression(params.f)
    alpha0 = _as_curve_expression(params.alpha0)
    if not alpha0.is_constant():
        raise ValueError("alpha0 must be constant for turning-point data")
    alpha0_val = alpha0(0.0)
    roots = example2_roots(m, r0)
    s = params.sign_alpha
    coef = math.sqrt(r0 * (r0 - 2.0 * m)) / (r0 * r0)

    def conserved_of(v: float) -> ConservedSet:
        f = f_expr(v)
        E = (1.0 - 2.0 * m / r0) * f
        K = r0 * (r0 - 2.0 * m) * f * f
        C = (K * (r0 - 2.0 * m) - 2.0 * m * E * E * r0 * r0) / (
            r0 * r0 * (r0 - 2.0 * m)
        )
        return ConservedSet(E=E, L=0.0, K=K, C=C)

    def curve_builder() -> InitialCurve:
        return curve_from_callables(
            phi=lambda v: np.array([params.tau0, r0, alpha0_val, v]),
            psi=lambda v: np.array([f_expr(v), 0.0, s * coef * abs(f_expr(v)), 0.0]),
            phi_prime=lambda v: np.array([0.0, 0.0, 0.0, 1.0]),
            theta_range=params.theta_range,
            periodic=params.periodic,
        )

    return EllipticBranchOracle(
        kind=OracleKind.EX2_INNER if inner else OracleKind.EX2_OUTER,
        params=params,
        branch="sec" if inner else "cos",
        roots=roots,
        alpha_init=lambda v: alpha0_val,
        tau_init=lambda v: params.tau0,
        beta_of=lambda v: v,
        conserved_of=conserved_of,
        curve_builder=curve_builder,
    )


def _ex3_elliptic(params: OracleParams, inner: bool) -> EllipticBranchOracle:
    m, r0 = params.m, params.r0
    if params.sign_alpha not in (1, -1):
        raise ValueError("sign_alpha must be +1 or -1")
    roots = example3_roots(m, r0)
    s = params.sign_alpha
    coef = math.sqrt(2.0 * m * (r0 - 2.0 * m)) / (r0 * r0)

    def conserved_of(v: float) -> ConservedSet:
        return ConservedSet(
            E=1.0 - 2.0 * m / r0, L=0.0, K=2.0 * m * (r0 - 2.0 * m), C=0.0
        )

    def curve_builder() -> InitialCurve:
        def tangent(v: float) -> np.ndarray:
            return np.array([1.0, 0.0, s * coef, 0.0])

        return curve_from_callables(
            phi=lambda v: np.array([v, r0, s * coef * v, params.beta0]),
            psi=tangent,
            phi_prime=tangent,
            theta_range=params.theta_range,
            periodic=False,
        )

    return EllipticBranchOracle(
        kind=OracleKind.EX3_INNER if inner else OracleKind.EX3_OUTER,
        params=params,
        branch="sec" if inner else "cos",
        roots=roots,
        alpha_init=lambda v: s * coef * v,
        tau_init=lambda v: v,
        beta_of=lambda v: params.beta0,
        conserved_of=conserved_of,
        curve_builder=curve_builder,
    )


def make_oracle(example: int, case: str = "auto", params: OracleParams | None = None):
    """Construct the oracle for one worked example, auto-detecting the case.

    ``case`` accepts "auto", "I", "II" or "III" with the usual meaning per
    example; forcing a case inconsistent with r0 raises OracleMismatchError.
    """
    p = params or OracleParams()
    m, r0 = p.m, p.r0
    if r0 <= 2.0 * m:
        raise ValueError("r0 must exceed the horizon 2m")
    case = case.upper() if case != "auto" else "auto"

    if example == 1:
        return RadialNullOracle(p)

    if example == 2:
        at_double = abs(r0 / m - 3.0) <= 3.0 * CASE_TOL
        detected = "I" if at_double else ("II" if r0 < 3.0 * m else "III")
        chosen = detected if case == "auto" else case
        if chosen != detected:
            raise OracleMismatchError(
                f"case {chosen} inconsistent with r0 = {r0}, m = {m} "
                f"(detected case {detected})"
            )
        if chosen == "I":
            return PhotonSphereOracle(p)
        return _ex2_elliptic(p, inner=(chosen == "II"))

    if example == 3:
        at_double = abs(r0 / m - 4.0) <= 4.0 * CASE_TOL
        detected = "I" if at_double else ("II" if r0 > 4.0 * m else "III")
        chosen = detected if case == "auto" else case
        if chosen != detected:
            raise OracleMismatchError(
                f"case {chosen} inconsistent with r0 = {r0}, m = {m} "
                f"(detected case {detected})"
            )
        if chosen == "I":
            return Example3CircularOracle(p)
        return _ex3_elliptic(p, inner=(chosen == "III"))

    raise NullsheetError(f"unknown example id {example}")


def check_oracle_consistency(
    oracle, spacetime_params: SchwarzschildParams, curve: InitialCurve, n: int = 9
) -> None:
    """Raise OracleMismatchError unless the oracle regenerates the given data."""
    if abs(oracle.m - spacetime_params.m) > 1e-12 * max(1.0, spacetime_params.m):
        raise OracleMismatchError(
            f"oracle mass {oracle.m} != spacetime mass {spacetime_params.m}"
        )
    ref = oracle.initial_curve()
    lo = max(curve.theta_min, ref.theta_min)
    hi = min(curve.theta_max, ref.theta_max)
    if not hi > lo:
        raise OracleMismatchError("oracle and config vartheta domains do not overlap")
    for v in np.linspace(lo, hi, n):
        dphi = np.max(np.abs(curve.phi(v) - ref.phi(v)))
        dpsi = np.max(np.abs(curve.psi(v) - ref.psi(v)))
        if max(dphi, dpsi) > 1e-9:
            raise OracleMismatchError(
                f"initial data differ from the oracle's at vartheta = {v}: "
                f"|dphi| = {dphi:.3e}, |dpsi| = {dpsi:.3e}"
            )
