import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rtbp_duffing.core_model import (DuffingState, ParamSet, PhysicalState, duffing_eps,
                                     duffing_rhs, duffing_to_physical, jacobi_constant,
                                     jacobi_residual, mcgehee_rhs, mcgehee_to_physical,
                                     pq_first_order, physical_to_duffing, physical_to_mcgehee,
                                     rtbp_rhs, solve_U, spq_exact, theta_rate)
from rtbp_duffing.errors import DomainError
from rtbp_duffing.frame import eval_frame


@pytest.mark.parametrize("rho, eps", [(0.2, 0.6), (0.2, 0.0), (-0.7, 0.3), (1.2, 0.3)])
def test_paramset_domain(rho, eps):
    with pytest.raises(DomainError):
        ParamSet(rho, eps)


def test_paramset_helpers():
    p = ParamSet(0.3, 0.4, 0.1)
    assert (p.m1, p.m2) == (pytest.approx(0.7), 0.3)
    assert p.with_theta0(2.0).theta0 == 2.0
    assert p.with_rho(0.1).rho == 0.1 and p.with_rho(0.1).eps == 0.4


def test_state_domains():
    with pytest.raises(DomainError):
        PhysicalState(-1.0, 0.0, 0.0, 1.0)


kepler = st.tuples(st.floats(3.0, 6.0), st.floats(-0.2, 0.2), st.floats(0, 2 * np.pi),
                   st.floats(0.8, 1.2), st.floats(0, 10))


@settings(max_examples=60, deadline=None)
@given(kepler)
def test_physical_duffing_roundtrip(s):
    r, rd, th, fac, t = s
    state = PhysicalState(r, rd, th, fac * r ** -1.5)
    p0 = ParamSet(0.2, 0.3)
    J = jacobi_constant(state, p0, t)
    assume(J < -1.0 / 0.59)
    p = ParamSet(0.2, duffing_eps(state, p0, t))
    back = duffing_to_physical(physical_to_duffing(state, t), p, t)
    np.testing.assert_allclose(back.as_array(), state.as_array(), rtol=1e-10, atol=1e-12)


def test_mcgehee_roundtrip():
    state = PhysicalState(4.0, 0.1, 1.0, 0.12)
    back = mcgehee_to_physical(physical_to_mcgehee(state, 2.5), 2.5)
    np.testing.assert_allclose(back.as_array(), state.as_array(), rtol=1e-14)


def test_mcgehee_rhs_matches_physical():
    # d/dt of the McGehee image equals the McGehee field times dtau/dt
    p = ParamSet(0.2, 0.4)
    state, t, h = PhysicalState(4.0, 0.1, 1.0, 0.12), 0.3, 1e-6
    d = rtbp_rhs(state, p, t)
    ahead = PhysicalState(*(state.as_array() + h * np.array([d.r2, d.r2dot, d.th2, d.th2dot])))
    behind = PhysicalState(*(state.as_array() - h * np.array([d.r2, d.r2dot, d.th2, d.th2dot])))
    m1, m0 = physical_to_mcgehee(ahead, t + h), physical_to_mcgehee(behind, t - h)
    num = (m1.as_array() - m0.as_array()) / (2 * h)
    f = mcgehee_rhs(physical_to_mcgehee(state, t), p)
    # the two fields differ by the scalar time change dtau/dt only
    ratio = num / np.array([f.u, f.v, f.theta, f.w])
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-6)


def test_solve_U_residual_and_size():
    X = np.linspace(0.2, 1.4, 13)
    Y = 0.3 * np.sin(3 * X)
    th = np.linspace(0, 6, 13)
    for eps in (0.1, 0.2, 0.4):
        p = ParamSet(0.3, eps)
        U = solve_U(X, Y, th, p)
        assert np.max(np.abs(jacobi_residual(X, Y, th, U, p))) < 1e-13
        # U - 1 is O(eps^3) with a modest constant
        assert np.max(np.abs(U - 1)) <= 3.0 * eps ** 3


def test_solve_U_rejects_bad_X():
    with pytest.raises(DomainError):
        solve_U(-0.1, 0.0, 0.0, ParamSet(0.2, 0.3))


@pytest.mark.parametrize("eps", [0.1, 0.2, 0.4])
def test_rho_zero_is_unperturbed_duffing(eps):
    p = ParamSet(0.0, eps)
    for X, Y in [(1.2, 0.1), (0.5, -0.3), (np.sqrt(2), 0.0)]:
        d = duffing_rhs(DuffingState(0.7, X, Y), p)
        assert d.X == pytest.approx(Y, abs=1e-15)
        assert d.Y == pytest.approx(X - X ** 3, abs=1e-14)


def test_duffing_rhs_floor():
    with pytest.raises(DomainError):
        duffing_rhs(DuffingState(0.0, 0.0, 0.1), ParamSet(0.2, 0.3))


def test_spq_consistent_with_field():
    p = ParamSet(0.3, 0.35, 0.4)
    tau = np.linspace(-2.5, 2.5, 21)
    fr = eval_frame(tau, p.eps)
    x, y, Th = 0.01 * np.cos(tau), -0.02 * np.sin(2 * tau), 0.05 * tau
    spq = spq_exact(x, y, Th, tau, p, fr)
    for j in range(tau.size):
        X, Y = fr.a[j] + x[j], fr.b[j] + y[j]
        d = duffing_rhs(DuffingState(Th[j] + p.theta0 + fr.psi[j], X, Y), p)
        assert d.X == pytest.approx(fr.b[j] + y[j] + spq.P[j], abs=1e-13)
        lin = (1 - 3 * fr.a[j] ** 2) * x[j]
        assert d.Y - (fr.bprime[j] + lin) == pytest.approx(spq.Q[j], abs=1e-12)
        # theta' = psi' + Theta'
        rate = theta_rate(spq, fr.a, p.eps)[j]
        assert d.theta == pytest.approx(fr.dpsi[j] + rate, rel=1e-12)


def test_spq_vanish_on_orbit_at_rho_zero():
    p = ParamSet(0.0, 0.4, 0.3)
    tau = np.linspace(-4, 4, 17)
    spq = spq_exact(0 * tau, 0 * tau, 0 * tau, tau, p)
    np.testing.assert_allclose(spq.S, 0.0, atol=1e-16)
    np.testing.assert_allclose(spq.P, 0.0, atol=1e-16)
    np.testing.assert_allclose(spq.Q, 0.0, atol=1e-15)


@pytest.mark.parametrize("eps", [0.3, 0.45])
def test_first_order_forcing_is_rho_derivative(eps):
    tau = np.linspace(-3, 3, 25)
    th0 = 0.8
    P1, Q1 = pq_first_order(tau, th0, eps)
    h = 1e-5
    up = spq_exact(0 * tau, 0 * tau, 0 * tau, tau, ParamSet(h, eps, th0))
    dn = spq_exact(0 * tau, 0 * tau, 0 * tau, tau, ParamSet(-h, eps, th0))
    np.testing.assert_allclose((up.P - dn.P) / (2 * h), P1, atol=1e-8)
    np.testing.assert_allclose((up.Q - dn.Q) / (2 * h), Q1, atol=1e-8)
