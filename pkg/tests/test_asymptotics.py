from fractions import Fraction
from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtbp_duffing.asymptotics import (CLOSED_FORM_LEADING_CONSTANT, ZIntegralSpec,
                                      assembled_leading_constant, elementary_asymptotic,
                                      leading_scale, leading_splitting, cubic_phase_asymptotic,
                                      cubic_phase_integral, script_I, script_I_asymptotic,
                                      tau_to_z_value, y_complex, y_of_z)
from rtbp_duffing.errors import DomainError
from rtbp_duffing.melnikov import ElementaryIntegral, elementary_integral, homoclinic_integral


@pytest.mark.parametrize("y", [0.0, 1.0, 2.0, -3.0, 10.0])
def test_y_of_z_examples(y):
    z = (y ** 3 + 12 * y) / 2
    assert y_of_z(z) == pytest.approx(y, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e6, 1e6))
def test_y_of_z_inverse(z):
    y = y_of_z(z)
    assert abs(y ** 3 + 12 * y - 2 * z) <= 1e-13 * max(1.0, abs(2 * z))


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(-7.9, 7.9))
def test_y_complex_solves_cubic(x, s):
    z = complex(x, s)
    y = y_complex(z)
    assert abs(y ** 3 + 12 * y - 2 * z) <= 1e-12 * max(1.0, abs(z))


def test_y_complex_continues_real_branch():
    x = np.linspace(-30, 30, 61)
    np.testing.assert_allclose(y_complex(x + 0j).real, y_of_z(x), atol=1e-13)
    np.testing.assert_allclose(y_complex(x + 0j).imag, 0.0, atol=1e-13)


def test_script_I_approaches_watson_term():
    ks = [3.0, 6.0, 12.0, 24.0, 48.0]
    rel = [abs(script_I(7, 5, 0, k) / script_I_asymptotic(7, 5, 0, k) - 1) for k in ks]
    assert all(b < a for a, b in zip(rel, rel[1:]))
    # next term is O(k^-1/2): the scaled error settles
    scaled = [r * sqrt(k) for r, k in zip(rel, ks)]
    assert max(scaled[-3:]) / min(scaled[-3:]) < 1.2


def test_shifted_and_direct_paths_agree():
    # the real-axis route is slow when m + n is small (algebraic tails); keep it short
    for m, n, r in [(6, 2, 1), (7, 3, 0)]:
        s = script_I(m, n, r, 1.5, "shifted")
        d = script_I(m, n, r, 1.5, "direct")
        assert abs(s - d) <= 1e-9 * abs(d)


@pytest.mark.parametrize("pqr", [(3, 1, 0), (5, 2, 0), (7, 1, 1), (9, 3, 1)])
def test_z_representation_matches_tau(pqr):
    p, q, r = pqr
    z = tau_to_z_value(ZIntegralSpec(p, q, r, 0.45))
    tv = homoclinic_integral(p, q, r, 0.45)
    assert (z.real if r % 2 == 0 else z.imag) == pytest.approx(tv, rel=1e-9)


def test_watson_constants_of_dominant_integrals():
    eps = 0.3
    base = sqrt(pi / 2) * np.exp(-1 / (3 * eps ** 3))
    assert elementary_asymptotic("I2_odd", 1, 0, eps) == pytest.approx(
        2 * sqrt(2) / 15 * base * eps ** -3.5, rel=1e-13)
    assert elementary_asymptotic("J_odd", 1, 0, eps) == pytest.approx(
        2 / 15 * base * eps ** -1.5, rel=1e-13)


@pytest.mark.parametrize("kind", ["I2_odd", "J_odd"])
def test_elementary_integrals_approach_watson(kind):
    rel = []
    for eps in (0.3, 0.2, 0.15):
        v = elementary_integral(ElementaryIntegral(kind, 1, 0), eps, "z").value
        rel.append(v / elementary_asymptotic(kind, 1, 0, eps) - 1)
    assert abs(rel[0]) > abs(rel[1]) > abs(rel[2])


def test_assembled_constants():
    assert assembled_leading_constant("closed_form", "closed_form") == CLOSED_FORM_LEADING_CONSTANT
    assert CLOSED_FORM_LEADING_CONSTANT == Fraction(-37, 20)
    assert assembled_leading_constant("corrected", "closed_form") == Fraction(1, 40)
    assert assembled_leading_constant("corrected", "exact") == Fraction(-1, 8)


def test_leading_splitting():
    assert leading_splitting(0.0, 0.4) == 0.0
    assert leading_splitting(np.pi / 2, 0.4) == pytest.approx(-37 / 20 * leading_scale(0.4))
    with pytest.raises(DomainError):
        leading_splitting(1.0, 0.0)


def test_asymptotic_domain_errors():
    with pytest.raises(DomainError):
        script_I_asymptotic(0, 1, 0, 5.0)
    with pytest.raises(DomainError):
        script_I(5, 1, 0, -1.0)


@pytest.mark.parametrize("which", [1, 2])
def test_cubic_phase_routes_agree(which):
    assert cubic_phase_integral(which, 0.45, "tau") == pytest.approx(cubic_phase_integral(which, 0.45, "z"),
                                                               rel=1e-9)


def test_cubic_phase_leading_values():
    eps = 0.3
    assert cubic_phase_asymptotic(1, eps) == pytest.approx(
        4 * sqrt(pi) / 3 * eps ** -4.5 * np.exp(-2 / (3 * eps ** 3)))
    assert cubic_phase_asymptotic(2, eps) == pytest.approx(
        -sqrt(2 * pi) / 12 * eps ** -4.5 * np.exp(-1 / (3 * eps ** 3)))


@pytest.mark.parametrize("which", [1, 2])
def test_cubic_phase_relative_error_shrinks(which):
    rel = [abs(cubic_phase_integral(which, e) / cubic_phase_asymptotic(which, e) - 1) for e in (0.4, 0.3, 0.2)]
    assert rel[0] > rel[1] > rel[2]


def test_one_power_of_eps_per_unit_n():
    # I2_{2,0}/I2_{1,0} ~ eps/7; in the window eps >= 0.35 the local slope is
    # still ~2.5, so the claim is checked toward small eps
    for eps in (0.3, 0.2):
        A = elementary_asymptotic("I2_odd", 2, 0, eps) / elementary_asymptotic("I2_odd", 1, 0, eps)
        assert A / eps == pytest.approx(1 / 7, rel=1e-12)
    ratios = []
    for eps in (0.3, 0.2, 0.1):
        a = elementary_integral(ElementaryIntegral("I2_odd", 2, 0), eps, "z").value
        b = elementary_integral(ElementaryIntegral("I2_odd", 1, 0), eps, "z").value
        ratios.append(a / b / eps)
    assert ratios[0] > ratios[1] > ratios[2] > 1 / 7
    assert ratios[2] == pytest.approx(1 / 7, rel=0.1)
