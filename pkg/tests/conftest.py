import pytest

import nullsheet as ns


@pytest.fixture(scope="session")
def m1_params():
    return ns.SchwarzschildParams(m=1.0)


@pytest.fixture(scope="session")
def schw(m1_params):
    return ns.schwarzschild(m1_params)


@pytest.fixture(scope="session")
def flat():
    return ns.minkowski()


@pytest.fixture(scope="session")
def ex1_oracle():
    return ns.make_oracle(
        1,
        "auto",
        ns.OracleParams(
            m=1.0,
            r0=10.0,
            r1=1.0,
            tau0=0.0,
            alpha0="pi/2 + 0.3*sin(vartheta)",
            sign=1,
        ),
    )


@pytest.fixture(scope="session")
def photon_oracle():
    return ns.make_oracle(
        2,
        "auto",
        ns.OracleParams(m=1.0, r0=3.0, f=1.0, tau0=0.0, alpha0=1.0, sign_alpha=1),
    )


@pytest.fixture(scope="session")
def ex3_circular_oracle():
    return ns.make_oracle(
        3,
        "auto",
        ns.OracleParams(
            m=1.0, r0=4.0, beta0=0.5, sign_alpha=1,
            theta_range=(0.5, 8.0), periodic=False,
        ),
    )


@pytest.fixture(scope="session")
def ex1_curve(ex1_oracle):
    return ex1_oracle.initial_curve()


@pytest.fixture(scope="session")
def photon_curve(photon_oracle):
    return photon_oracle.initial_curve()


@pytest.fixture(scope="session")
def ex3_circular_curve(ex3_circular_oracle):
    return ex3_circular_oracle.initial_curve()


def integrate_curve(spacetime, curve, vartheta, t_end, **kwargs):
    state0 = ns.GeodesicState(
        y=curve.phi(vartheta), v=curve.psi(vartheta), t=0.0
    )
    opts = ns.SolverOptions(**kwargs) if kwargs else None
    return ns.integrate(spacetime, state0, t_end, opts)


@pytest.fixture(scope="session")
def ex1_trajectory(schw, ex1_curve):
    return integrate_curve(schw, ex1_curve, 1.3, 20.0)


@pytest.fixture(scope="session")
def photon_trajectory(schw, photon_curve):
    return integrate_curve(schw, photon_curve, 2.0, 5.0)


@pytest.fixture(scope="session")
def ex3_circular_trajectory(schw, ex3_circular_curve):
    return integrate_curve(schw, ex3_circular_curve, 1.0, 5.0)
