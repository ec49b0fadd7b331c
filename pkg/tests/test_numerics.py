from math import gamma, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtbp_duffing.core_model import DuffingState, ParamSet, duffing_field
from rtbp_duffing.errors import NoSignChange
from rtbp_duffing.frame import homoclinic_a, homoclinic_b
from rtbp_duffing.numerics import (GaussPanels, OdeSpec, QuadSpec, find_zero, fourier_project,
                                   integrate_ode, periodic_tail, phase_edges, quad_improper,
                                   quad_interval)


def test_exponential_decay():
    tr = integrate_ode(lambda t, y: -y, [1.0], (0.0, 5.0))
    assert tr.y[0, -1] == pytest.approx(np.exp(-5.0), rel=1e-10)
    assert tr(2.5)[0] == pytest.approx(np.exp(-2.5), rel=1e-9)


def test_unperturbed_duffing_follows_orbit():
    tr = integrate_ode(duffing_field(ParamSet(0.0, 0.4)),
                       DuffingState(0.0, np.sqrt(2.0), 0.0).as_array(), (0.0, 6.0))
    t = np.linspace(0, 6, 13)
    y = tr(t)
    np.testing.assert_allclose(y[1], homoclinic_a(t), atol=1e-9)
    np.testing.assert_allclose(y[2], homoclinic_b(t), atol=1e-9)


def test_oscillator_energy():
    tr = integrate_ode(lambda t, y: np.array([y[1], -y[0] ** 3]), [1.0, 0.0], (0, 40),
                       OdeSpec(1e-12, 1e-14))
    E = 0.5 * tr.y[1] ** 2 + 0.25 * tr.y[0] ** 4
    assert np.max(np.abs(E - 0.25)) < 1e-10


def test_stop_event():
    tr = integrate_ode(lambda t, y: -np.ones(1), [1.0], (0.0, 5.0), stop=lambda t, y: y[0] - 0.25)
    assert tr.stopped
    assert tr.t[-1] == pytest.approx(0.75, abs=1e-12)


def test_ode_spec_validation():
    with pytest.raises(ValueError):
        OdeSpec(0.0, 1e-10)


def test_integral_a_cubed():
    val, err = quad_improper(lambda t: homoclinic_a(t) ** 3)
    assert val == pytest.approx(sqrt(2) * pi, rel=1e-12)
    assert err < 1e-10


def test_odd_integrand_vanishes():
    val, _ = quad_improper(lambda t: homoclinic_a(t) ** 3 * homoclinic_b(t))
    assert abs(val) < 1e-14


def test_gaussian():
    assert quad_improper(lambda t: np.exp(-t * t))[0] == pytest.approx(sqrt(pi), rel=1e-13)


@pytest.mark.parametrize("p", range(1, 21))
def test_sech_powers(p):
    # int sech^p = sqrt(pi) Gamma(p/2)/Gamma((p+1)/2)
    exact = sqrt(pi) * gamma(p / 2) / gamma((p + 1) / 2)
    val, err = quad_improper(lambda t: np.cosh(t) ** -p, QuadSpec(abs_tol=1e-14, rel_tol=1e-12))
    assert abs(val - exact) <= max(err, 1e-13 * exact) * 10
    assert abs(val - exact) <= 1e-11 * exact


def test_oscillatory_with_tail():
    # int sech(t) cos(w t) = pi sech(pi w / 2), phase-adapted with tails
    w = 30.0
    val, _ = quad_improper(lambda t: np.cos(w * t) / np.cosh(t), QuadSpec(1e-16, 1e-12),
                           frequency=lambda t: w + 0 * t, envelope=lambda t: 1 / np.cosh(t))
    assert val == pytest.approx(pi / np.cosh(pi * w / 2), abs=1e-15)


def test_quad_interval():
    val, err = quad_interval(np.sin, 0.0, pi)
    assert val == pytest.approx(2.0, rel=1e-14)


def test_fourier_project():
    g = lambda t: 3 * np.sin(t) - 0.5 * np.sin(4 * t) + np.cos(2 * t)
    assert fourier_project(g, 0, "odd") == pytest.approx(3.0, abs=1e-14)
    assert fourier_project(g, 2, "even") == pytest.approx(-0.5, abs=1e-14)
    assert fourier_project(g, 1, "even") == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        fourier_project(g, 0, "even")


def test_find_zero_sin():
    r = find_zero(np.sin, (-1.0, 1.5))
    assert abs(r.root) < 1e-12
    assert r.derivative == pytest.approx(1.0, rel=1e-7)


def test_find_zero_cubic():
    r = find_zero(lambda x: x ** 3 - 8.0, (0.0, 5.0))
    assert r.root == pytest.approx(2.0, abs=1e-12)
    assert r.derivative == pytest.approx(12.0, rel=1e-6)


def test_find_zero_no_sign_change():
    with pytest.raises(NoSignChange):
        find_zero(lambda x: x * x + 1, (-1.0, 1.0))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=10), st.integers(2, 9))
def test_gauss_panels_exact_on_polynomials(coef, npan):
    order = 10
    assert len(coef) <= order
    edges = np.linspace(-1.0, 2.0, npan + 1)
    gp = GaussPanels(edges, order)
    poly = np.polynomial.Polynomial(coef)
    anti = poly.integ()
    f = poly(gp.t)
    np.testing.assert_allclose(gp.cumulative(f), anti(gp.t) - anti(-1.0), atol=1e-11)
    np.testing.assert_allclose(gp.from_end(f), anti(2.0) - anti(gp.t), atol=1e-11)
    assert gp.total(f) == pytest.approx(anti(2.0) - anti(-1.0), abs=1e-11)


def test_gauss_panels_decreasing_edges():
    gp = GaussPanels(np.linspace(0.0, -2.0, 5), 8)
    f = np.exp(gp.t)
    # cumulative is int_0^t, oriented
    np.testing.assert_allclose(gp.cumulative(f), np.exp(gp.t) - 1.0, atol=1e-13)
    np.testing.assert_allclose(gp.from_end(f), np.exp(-2.0) - np.exp(gp.t), atol=1e-13)


def test_phase_edges_bound_phase():
    om = lambda t: 1.0 + 50.0 * t * t
    e = phase_edges(om, 0.0, 3.0, 0.5, 0.2, n_fine=200001)
    assert e[0] == 0.0 and e[-1] == 3.0
    assert np.all(np.diff(e) <= 0.2 + 1e-12)
    # phase advance per panel, exact antiderivative t + 50 t^3 / 3
    ph = e + 50 * e ** 3 / 3
    assert np.max(np.diff(ph)) <= 0.5 * (1 + 1e-3)


def test_periodic_tail():
    # int_T^inf e^{-s} sin(w s) ds with g = e^{-s} sin(phi), phase w s
    w, T = 200.0, 1.0
    exact = np.exp(-T) * (np.sin(w * T) + w * np.cos(w * T)) / (1 + w * w)
    est = periodic_tail(lambda s, ph: np.exp(-s) * np.sin(ph), T, w * T, w)
    assert est == pytest.approx(exact, abs=np.exp(-T) / w ** 2 * 1.01)
    left = periodic_tail(lambda s, ph: np.exp(s) * np.sin(ph), -T, -w * T, w)
    assert left == pytest.approx(-exact, abs=np.exp(-T) / w ** 2 * 1.01)
