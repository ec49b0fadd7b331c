import numpy as np
import pytest

from rtbp_duffing.core_model import ParamSet
from rtbp_duffing.errors import DomainEscape, MaxIterExceeded, NoSignChange
from rtbp_duffing.frame import homoclinic_a
from rtbp_duffing.manifold import (ScaledTrajectory, build_grid, find_homoclinic, matching_X0,
                                   picard_step, seed, solve_stable, solve_unstable,
                                   splitting_distance, splitting_distance_first_order,
                                   weighted_distance, zero_state)
from rtbp_duffing.melnikov import D0_direct


@pytest.fixture(scope="module")
def stable_035():
    p = ParamSet(0.2, 0.35, 0.7)
    return p, solve_stable(p)


def test_rho_zero_fixed_point():
    p = ParamSet(0.0, 0.35, 0.7)
    z = zero_state(p)
    n = picard_step(z)
    assert weighted_distance(n, z) == 0.0
    assert n.mM0 == 0.0


def test_grid_orientation():
    p = ParamSet(0.2, 0.4, 0.7)
    gs, gu = build_grid(p, 1), build_grid(p, -1)
    assert np.all(gs.tau > 0) and np.all(gu.tau < 0)
    np.testing.assert_allclose(gu.tau, -gs.tau)
    assert gs.T == gu.T


def test_seed_against_trapezoid():
    # mM_0(0) = c sqrt(eps)/a0^2 int_0^T a^4 (b' - b^2/a) sin 2(theta0 + psi)
    p = ParamSet(0.2, 0.4, 0.7)
    s = seed(p)
    t = np.linspace(0.0, s.T, 2_000_001)
    a = homoclinic_a(t)
    th = np.tanh(t)
    psi = 2 * np.arctan(np.sinh(t)) - (np.sinh(t) ** 3 + 3 * np.sinh(t)) / (6 * p.eps ** 3)
    # b' - b^2/a = a - a^3 - a tanh^2
    f = a ** 4 * (a - a ** 3 - a * th * th) * np.sin(2 * (p.theta0 + psi))
    c = 1.5 * np.sqrt(2) * p.rho * (1 - p.rho)
    ref = c * np.sqrt(p.eps) / 2.0 * np.trapezoid(f, t)
    assert s.mM0 == pytest.approx(ref, rel=1e-6, abs=1e-12)


def test_stable_convergence(stable_035):
    p, (traj, rep) = stable_035
    assert rep.converged
    assert rep.residuals[-1] < 1e-12
    assert rep.max_ratio(1e-9) < 1
    assert np.max(np.abs(traj.mM)) < 1 and np.max(np.abs(traj.mW)) < 1


def test_fixed_point_property(stable_035):
    p, (traj, _) = stable_035
    assert weighted_distance(picard_step(traj), traj) < 1e-11


def test_unique_from_both_starts(stable_035):
    p, (traj, _) = stable_035
    other, _ = solve_stable(p, start="zero")
    assert weighted_distance(other, traj) < 1e-11


def test_matching_value(stable_035):
    p, (traj, _) = stable_035
    X0 = matching_X0(traj)
    assert abs(X0 - np.sqrt(2)) <= p.eps ** 3.5 * np.sqrt(2)
    assert X0 == pytest.approx(np.sqrt(2) * (1 - p.eps ** 3.5 * traj.mM0), rel=1e-15)


def test_symmetry_at_theta0_zero():
    p = ParamSet(0.2, 0.35, 0.0)
    s, _ = solve_stable(p)
    u, _ = solve_unstable(p)
    assert abs(s.mM0 - u.mM0) < 1e-14
    np.testing.assert_allclose(u.mM, s.mM, atol=1e-13)


def test_splitting_odd_in_theta0():
    d1 = splitting_distance(ParamSet(0.1, 0.4, 0.6))
    d2 = splitting_distance(ParamSet(0.1, 0.4, -0.6))
    assert d2 == pytest.approx(-d1, rel=1e-9)


def test_first_order_route_matches_melnikov():
    d, err = splitting_distance_first_order(0.7, 0.4, return_error=True)
    ref = D0_direct(0.7, 0.4)
    assert abs(d - ref) <= max(err, 1e-9 * abs(ref))
    assert splitting_distance(ParamSet(0.0, 0.4, 0.7)) == d


def test_max_iter():
    with pytest.raises(MaxIterExceeded):
        solve_stable(ParamSet(0.2, 0.35, 0.7), max_iter=2)


def test_domain_escape():
    p = ParamSet(0.5, 0.55, 0.7)
    z = zero_state(p)
    big = ScaledTrajectory(z.grid, z.mM + 5.0, z.mW + 5.0, z.Theta, 5.0, p, _grid=z._grid)
    with pytest.raises(DomainEscape):
        picard_step(big)
    assert np.max(np.abs(picard_step(big, check_domain=False).mW)) > 1


def test_find_homoclinic_at_rho_zero():
    r = find_homoclinic(ParamSet(0.0, 0.4), (-0.3, 0.5))
    assert abs(r.root) < 1e-9
    # the leading harmonic of D0 has a negative coefficient at eps = 0.4
    assert r.derivative < 0


def test_find_homoclinic_no_sign_change():
    with pytest.raises(NoSignChange):
        find_homoclinic(ParamSet(0.0, 0.4), (0.2, 0.6))
