import math

import numpy as np
import pytest

import nullsheet as ns
from nullsheet.errors import DomainError

SQRT3 = math.sqrt(3.0)


class TestRhs:
    def test_flat_zero(self, flat):
        state = ns.GeodesicState(
            y=np.array([0.0, 1.0, 2.0, 3.0]), v=np.array([1.0, 0.5, -0.2, 0.1]), t=0.0
        )
        assert np.abs(ns.geodesic_rhs(flat, state)).max() == 0.0

    def test_photon_sphere_radial_balance(self, schw):
        state = ns.GeodesicState(
            y=np.array([0.0, 3.0, math.pi / 2, 0.0]),
            v=np.array([1.0, 0.0, 1.0 / (3 * SQRT3), 0.0]),
            t=0.0,
        )
        a = ns.geodesic_rhs(schw, state)
        assert abs(a[1]) < 1e-15

    def test_r4_circular_radial_balance(self, schw):
        for sign in (1.0, -1.0):
            state = ns.GeodesicState(
                y=np.array([0.0, 4.0, math.pi / 2, 0.0]),
                v=np.array([1.0, 0.0, sign / 8.0, 0.0]),
                t=0.0,
            )
            a = ns.geodesic_rhs(schw, state)
            assert abs(a[1]) < 1e-15

    def test_domain_violation(self, schw):
        state = ns.GeodesicState(
            y=np.array([0.0, 1.5, 1.0, 0.0]), v=np.zeros(4), t=0.0
        )
        with pytest.raises(DomainError):
            ns.geodesic_rhs(schw, state)


class TestIntegrateAgainstClosedForms:
    def test_example1_linear_radius(self, schw, ex1_trajectory):
        ts = np.linspace(0.0, 20.0, 101)
        err = max(abs(ex1_trajectory.sample(t).y[1] - (t + 10.0)) for t in ts)
        assert err < 1e-8
        assert ex1_trajectory.events[-1].kind == "t_max"

    def test_example1_tau_relation(self, ex1_trajectory):
        m, r0 = 1.0, 10.0
        for t in np.linspace(0.0, 20.0, 41):
            s = ex1_trajectory.sample(t)
            lhs = s.y[1] - r0 + 2 * m * math.log((s.y[1] - 2 * m) / (r0 - 2 * m))
            assert abs(lhs - s.y[0]) < 1e-6

    def test_photon_sphere_orbit(self, photon_trajectory):
        ts = np.linspace(0.0, 5.0, 101)
        r_err = max(abs(photon_trajectory.sample(t).y[1] - 3.0) for t in ts)
        a_err = max(
            abs(photon_trajectory.sample(t).y[2] - (t / (3 * SQRT3) + 1.0)) for t in ts
        )
        assert r_err < 1e-6
        assert a_err < 1e-6

    def test_ex3_circular(self, ex3_circular_trajectory):
        vth = 1.0
        ts = np.linspace(0.0, 5.0, 101)
        r_err = max(abs(ex3_circular_trajectory.sample(t).y[1] - 4.0) for t in ts)
        tau_err = max(
            abs(ex3_circular_trajectory.sample(t).y[0] - (t + vth)) for t in ts
        )
        assert r_err < 1e-6
        assert tau_err < 1e-8

    def test_flat_straight_line(self, flat):
        state0 = ns.GeodesicState(
            y=np.zeros(4), v=np.array([1.0, 0.3, -0.2, 0.1]), t=0.0
        )
        traj = ns.integrate(flat, state0, 10.0)
        s = traj.sample(7.3)
        assert np.abs(s.y - 7.3 * state0.v).max() < 1e-12
        assert np.abs(s.v - state0.v).max() < 1e-13


class TestDenseOutput:
    def test_continuity_at_nodes(self, ex1_trajectory):
        for i in range(1, len(ex1_trajectory.ts) - 1):
            t = float(ex1_trajectory.ts[i])
            s = ex1_trajectory.sample(t)
            node = ex1_trajectory.states[i]
            assert np.abs(s.y - node.y).max() < 1e-12
            assert np.abs(s.v - node.v).max() < 1e-12

    def test_out_of_range_raises(self, ex1_trajectory):
        with pytest.raises(ValueError):
            ex1_trajectory.sample(21.0)
        with pytest.raises(ValueError):
            ex1_trajectory.sample(-0.5)


class TestToleranceScaling:
    def test_error_tracks_tolerance(self, schw, ex1_curve):
        # global error of the 5(4) pair scales roughly linearly with rel_tol
        errs = []
        for rel in (1e-6, 1e-8, 1e-10):
            opts = ns.SolverOptions(rel_tol=rel, abs_tol=rel * 1e-2)
            state0 = ns.GeodesicState(
                y=ex1_curve.phi(1.3), v=ex1_curve.psi(1.3), t=0.0
            )
            traj = ns.integrate(schw, state0, 20.0, opts)
            s = traj.sample(20.0)
            m, r0 = 1.0, 10.0
            tau_exact = 30.0 - r0 + 2 * m * math.log(28.0 / 8.0)
            errs.append(abs(s.y[0] - tau_exact) + abs(s.y[1] - 30.0))
        assert errs[0] / errs[1] > 5.0
        assert errs[1] / errs[2] > 5.0
        assert errs[2] < 1e-9


class TestConservedAlong:
    def test_example1_drift(self, m1_params, ex1_trajectory):
        rep = ns.conserved_along(m1_params, ex1_trajectory)
        assert rep.initial.E == pytest.approx(1.0, abs=1e-13)
        assert rep.max_rel_drift < 1e-10
        assert np.abs(rep.series[:, 1]).max() == 0.0  # L identically zero
        assert np.abs(rep.series[:, 2]).max() == 0.0  # K identically zero
        assert ex1_trajectory.conserved is not None

    def test_photon_drift(self, m1_params, photon_trajectory):
        rep = ns.conserved_along(m1_params, photon_trajectory)
        assert rep.initial.K == pytest.approx(3.0, rel=1e-12)
        assert rep.max_rel_drift < 1e-9

    def test_flat_line_integrals_constant(self, flat, m1_params, schw):
        # straight line in the schwarzschild-far field: integrals constant
        state0 = ns.GeodesicState(
            y=np.array([0.0, 1000.0, math.pi / 2, 0.0]),
            v=np.array([1.0, 0.5, 0.0, 1e-5]),
            t=0.0,
        )
        traj = ns.integrate(schw, state0, 5.0)
        rep = ns.conserved_along(m1_params, traj)
        assert rep.max_rel_drift < 1e-10


class TestFirstIntegralConsistency:
    def test_rt_squared_matches(self, schw, m1_params):
        oracle = ns.make_oracle(
            2, "auto",
            ns.OracleParams(m=1.0, r0=10.0, f=1.0, alpha0=1.0, sign_alpha=1),
        )
        curve = oracle.initial_curve()
        vth = 0.4
        cs = ns.conserved_from_data(curve, m1_params, vth)
        state0 = ns.GeodesicState(y=curve.phi(vth), v=curve.psi(vth), t=0.0)
        traj = ns.integrate(schw, state0, 15.0)
        for t in np.linspace(0.0, 15.0, 61):
            s = traj.sample(t)
            rt2 = ns.rt_squared(s.y[1], cs, m1_params)
            assert abs(s.v[1] ** 2 - rt2) < 1e-8

    def test_radial_ode_residual(self, schw, m1_params):
        oracle = ns.make_oracle(
            3, "auto",
            ns.OracleParams(m=1.0, r0=10.0, sign_alpha=1,
                            theta_range=(0.5, 3.0), periodic=False),
        )
        curve = oracle.initial_curve()
        vth = 1.2
        cs = ns.conserved_from_data(curve, m1_params, vth)
        state0 = ns.GeodesicState(y=curve.phi(vth), v=curve.psi(vth), t=0.0)
        traj = ns.integrate(schw, state0, 15.0)
        m = 1.0
        for t in np.linspace(0.0, 15.0, 61):
            s = traj.sample(t)
            r, r_t = s.y[1], s.v[1]
            r_tt = schw.acceleration_at(s.y, s.v)[1]
            residual = (
                r_tt
                - m / (r * (r - 2 * m)) * r_t**2
                + m * cs.E**2 / (r * (r - 2 * m))
                - (r - 2 * m) / r**4 * (cs.K + cs.L**2)
            )
            assert abs(residual) < 1e-6


class TestEvents:
    def test_horizon_event(self, schw):
        # plunging boosted data at r0 = 3 terminates at the horizon
        oracle = ns.make_oracle(
            3, "auto",
            ns.OracleParams(m=1.0, r0=3.0, sign_alpha=1,
                            theta_range=(1.0, 2.0), periodic=False),
        )
        curve = oracle.initial_curve()
        state0 = ns.GeodesicState(y=curve.phi(1.5), v=curve.psi(1.5), t=0.0)
        traj = ns.integrate(schw, state0, 30.0)
        kinds = [e.kind for e in traj.events]
        assert kinds == ["horizon"]
        assert traj.terminated_early
        barrier = 2.0 * (1.0 + 1e-8)
        for s in traj.states[:-1]:
            assert s.y[1] > barrier
        assert traj.states[-1].y[1] == pytest.approx(barrier, rel=1e-9)

    def test_axis_event(self, schw):
        # circular boosted characteristic with alpha decreasing through 0
        state0 = ns.GeodesicState(
            y=np.array([0.5, 4.0, 0.05, 0.5]),
            v=np.array([1.0, 0.0, -1.0 / 8.0, 0.0]),
            t=0.0,
        )
        traj = ns.integrate(schw, state0, 5.0)
        assert [e.kind for e in traj.events] == ["axis"]
        assert abs(math.sin(traj.states[-1].y[2])) <= 1e-8 * (1 + 1e-6)

    def test_t_max_event(self, ex1_trajectory):
        assert ex1_trajectory.events[-1].kind == "t_max"
        assert ex1_trajectory.events[-1].t == pytest.approx(20.0)

    def test_initial_state_violating_guard(self, schw):
        state0 = ns.GeodesicState(
            y=np.array([0.0, 2.0 + 1e-10, 1.0, 0.0]), v=np.zeros(4), t=0.0
        )
        with pytest.raises(DomainError):
            ns.integrate(schw, state0, 1.0)


class TestTangentNorm:
    def test_example1_null(self, schw, ex1_trajectory):
        for t in (0.0, 5.0, 17.0):
            assert abs(ns.tangent_norm(schw, ex1_trajectory.sample(t))) < 1e-9

    def test_ex3_circular_timelike(self, schw, ex3_circular_trajectory):
        for t in (0.0, 2.5, 5.0):
            norm = ns.tangent_norm(schw, ex3_circular_trajectory.sample(t))
            assert norm == pytest.approx(-0.25, abs=1e-8)

    def test_flat_radial_null(self, flat):
        state = ns.GeodesicState(
            y=np.zeros(4), v=np.array([1.0, 1.0, 0.0, 0.0]), t=0.0
        )
        assert ns.tangent_norm(flat, state) == 0.0
