"""Equations of motion of the restricted circular planar three-body problem.

Three coordinate systems are provided:

* physical polar coordinates ``(r2, r2dot, th2, th2dot)`` of the massless
  body in the inertial frame, primaries of mass ``1 - rho`` and ``rho`` on
  unit circular orbits;
* McGehee variables ``u = 1/r2``, ``v = sqrt(r2) r2dot``, ``theta = th2 - t``,
  ``w = r2**1.5 th2dot`` with the time ``dtau = u**1.5 dt / sqrt2``;
* Duffing variables ``X = w``, ``Y = -v w / sqrt2`` in which the problem is a
  perturbed Duffing oscillator.  ``u`` is eliminated through the Jacobi
  constant ``J = -1/eps``: ``u = eps^2 U^2 X^2`` with ``U`` the root of an
  implicit equation close to 1.

The masses always add up to one.
"""

from __future__ import annotations

from dataclasses import dataclass, astuple

import numpy as np

from .errors import CollisionError, DomainError, NoConvergence
from .frame import eval_frame

SQRT2 = np.sqrt(2.0)
COLLISION_FLOOR = 1e-12
X_FLOOR = 1e-6
U_TOL = 1e-14
U_MAX_ITER = 100
U_NEWTON_AFTER = 20


@dataclass(frozen=True)
class ParamSet:
    """Mass ratio ``rho``, perturbation ``eps = 1/|J|`` and section phase ``theta0``.

    ``(rho, eps)`` must lie in ``(-eps0, 1/2 + eps0) x (0, eps0)``.
    """

    rho: float
    eps: float
    theta0: float = 0.0
    eps0: float = 0.6

    def __post_init__(self):
        if not 0 < self.eps0 <= 0.6:
            raise DomainError("eps0 must lie in (0, 0.6]")
        if not 0 < self.eps < self.eps0:
            raise DomainError(f"eps={self.eps} outside (0, {self.eps0})")
        if not -self.eps0 < self.rho < 0.5 + self.eps0:
            raise DomainError(f"rho={self.rho} outside (-{self.eps0}, {0.5 + self.eps0})")

    @property
    def m1(self):
        return 1.0 - self.rho

    @property
    def m2(self):
        return self.rho

    def with_theta0(self, theta0):
        return ParamSet(self.rho, self.eps, theta0, self.eps0)

    def with_rho(self, rho):
        return ParamSet(rho, self.eps, self.theta0, self.eps0)


@dataclass
class PhysicalState:
    r2: float
    r2dot: float
    th2: float
    th2dot: float

    def __post_init__(self):
        if np.any(np.asarray(self.r2) <= 0):
            raise DomainError("r2 must be positive")

    def as_array(self):
        return np.array(astuple(self), dtype=float)


@dataclass
class McGeheeState:
    u: float
    v: float
    theta: float
    w: float

    def __post_init__(self):
        if np.any(np.asarray(self.u) <= 0):
            raise DomainError("u must be positive")

    def as_array(self):
        return np.array(astuple(self), dtype=float)


@dataclass
class DuffingState:
    theta: float
    X: float
    Y: float

    def as_array(self):
        return np.array(astuple(self), dtype=float)


# --------------------------------------------------------------------------
# physical coordinates

def _distances(r2, phase, rho):
    m1, m2 = 1.0 - rho, rho
    c = np.cos(phase)
    r13 = np.sqrt(r2 * r2 + m2 * m2 + 2.0 * m2 * r2 * c)
    r23 = np.sqrt(r2 * r2 + m1 * m1 - 2.0 * m1 * r2 * c)
    if np.any(r13 < COLLISION_FLOOR) or np.any(r23 < COLLISION_FLOOR):
        raise CollisionError("body collides with a primary")
    return r13, r23


def rtbp_forces(r2, phase, rho):
    """Radial and angular force terms ``(f, g)`` at angle ``phase = th2 - t``."""
    m1, m2 = 1.0 - rho, rho
    r13, r23 = _distances(r2, phase, rho)
    c, s = np.cos(phase), np.sin(phase)
    f = -m1 * (r2 + m2 * c) / r13 ** 3 - m2 * (r2 - m1 * c) / r23 ** 3
    g = m1 * m2 * s / r2 * (r13 ** -3 - r23 ** -3)
    return f, g


def rtbp_rhs(state: PhysicalState, p: ParamSet, t: float) -> PhysicalState:
    """Time derivative ``(r2dot, r2ddot, th2dot, th2ddot)``.

    Raises
    ------
    CollisionError
        If the body is within the collision floor of a primary.
    """
    r2, r2dot, th2, th2dot = state.r2, state.r2dot, state.th2, state.th2dot
    f, g = rtbp_forces(r2, th2 - t, p.rho)
    return _phys(r2dot, r2 * th2dot ** 2 + f, th2dot, -2.0 * r2dot * th2dot / r2 + g)


def _phys(a, b, c, d):
    # derivative vectors are not states, so skip the r2 > 0 check
    obj = object.__new__(PhysicalState)
    obj.r2, obj.r2dot, obj.th2, obj.th2dot = a, b, c, d
    return obj


def rtbp_field(p: ParamSet):
    """Return ``f(t, y)`` for :func:`numerics.integrate_ode` on ``y = (r2, r2dot, th2, th2dot)``."""
    def field(t, y):
        r2, r2dot, th2, th2dot = y
        f, g = rtbp_forces(r2, th2 - t, p.rho)
        return np.array([r2dot, r2 * th2dot ** 2 + f, th2dot,
                         -2.0 * r2dot * th2dot / r2 + g])
    return field


def jacobi_constant(state: PhysicalState, p: ParamSet, t: float) -> float:
    """Jacobi constant ``J = (r2dot^2 + r2^2 (th2dot - 1)^2)/2 - r2^2/2 - m1/r13 - m2/r23``."""
    r2, r2dot, th2, th2dot = state.r2, state.r2dot, state.th2, state.th2dot
    r13, r23 = _distances(r2, th2 - t, p.rho)
    return (0.5 * (r2dot ** 2 + r2 ** 2 * (th2dot - 1.0) ** 2) - 0.5 * r2 ** 2
            - p.m1 / r13 - p.m2 / r23)


# --------------------------------------------------------------------------
# coordinate changes

def physical_to_mcgehee(state: PhysicalState, t: float) -> McGeheeState:
    r2 = state.r2
    return McGeheeState(1.0 / r2, np.sqrt(r2) * state.r2dot, state.th2 - t,
                        r2 ** 1.5 * state.th2dot)


def mcgehee_to_physical(m: McGeheeState, t: float) -> PhysicalState:
    r2 = 1.0 / m.u
    return PhysicalState(r2, m.v * np.sqrt(m.u), m.theta + t, m.w * m.u ** 1.5)


def mcgehee_to_duffing(m: McGeheeState) -> DuffingState:
    return DuffingState(m.theta, m.w, -m.v * m.w / SQRT2)


def duffing_to_mcgehee(s: DuffingState, u: float) -> McGeheeState:
    if np.any(np.asarray(s.X) == 0):
        raise DomainError("X = 0 has no McGehee preimage")
    return McGeheeState(u, -SQRT2 * s.Y / s.X, s.theta, s.X)


def physical_to_duffing(state: PhysicalState, t: float) -> DuffingState:
    """Map a physical state to Duffing variables; see :func:`duffing_eps` for eps."""
    return mcgehee_to_duffing(physical_to_mcgehee(state, t))


def duffing_eps(state: PhysicalState, p: ParamSet, t: float) -> float:
    """``eps = 1/|J|`` of a physical state (requires ``J < 0``)."""
    J = jacobi_constant(state, p, t)
    if J >= 0:
        raise DomainError("Jacobi constant must be negative")
    return -1.0 / J


def duffing_to_physical(s: DuffingState, p: ParamSet, t: float) -> PhysicalState:
    """Recover the physical state, solving for ``U`` at the parameters ``p``."""
    U = solve_U(s.X, s.Y, s.theta, p)
    u = (p.eps * U * s.X) ** 2
    return mcgehee_to_physical(duffing_to_mcgehee(s, u), t)


def mcgehee_rhs(m: McGeheeState, p: ParamSet) -> McGeheeState:
    """Derivative of the McGehee variables with respect to ``tau``."""
    u, v, theta, w = m.u, m.v, m.theta, m.w
    F, G = _forces_u(u, theta, p.rho)[:2]
    du = -SQRT2 * v * u
    dtheta = SQRT2 * (w - u ** -1.5)
    dw = -v * w / SQRT2 + SQRT2 * u * G
    dv = v * v / SQRT2 + SQRT2 * w * w - SQRT2 + SQRT2 * F
    obj = object.__new__(McGeheeState)
    obj.u, obj.v, obj.theta, obj.w = du, dv, dtheta, dw
    return obj


# --------------------------------------------------------------------------
# perturbation forces

def _inv_pow_minus_one(t, power):
    """``(1 + t)**(-power/2) - 1`` without cancellation for small ``t``."""
    return np.expm1(-0.5 * power * np.log1p(t))


def _forces_u(u, theta, rho):
    m1, m2 = 1.0 - rho, rho
    c = np.cos(theta)
    t13 = m2 * m2 * u * u + 2.0 * m2 * u * c
    t23 = m1 * m1 * u * u - 2.0 * m1 * u * c
    if np.any(1.0 + t13 <= COLLISION_FLOOR ** 2) or np.any(1.0 + t23 <= COLLISION_FLOOR ** 2):
        raise CollisionError("R13 or R23 below the collision floor")
    e13 = _inv_pow_minus_one(t13, 3)
    e23 = _inv_pow_minus_one(t23, 3)
    # F = 1 - m1 (1 + m2 u c) R13^-3 - m2 (1 - m1 u c) R23^-3 rewritten with m1 + m2 = 1
    F = -m1 * (1.0 + m2 * u * c) * e13 - m2 * (1.0 - m1 * u * c) * e23
    G = m1 * m2 * np.sin(theta) * (e13 - e23)
    return F, G, np.sqrt(1.0 + t13), np.sqrt(1.0 + t23)


def forces_FG(X, Y, theta, U, p: ParamSet):
    """Perturbation forces in Duffing variables.

    Parameters
    ----------
    X, Y, theta, U : float or ndarray
        ``Y`` does not enter the forces; it is accepted for a uniform
        signature.
    p : ParamSet

    Returns
    -------
    F, G, R13, R23
    """
    u = (p.eps * U * X) ** 2
    return _forces_u(u, theta, p.rho)


def jacobi_energy(X, Y):
    """``X^2 - Y^2 - X^4/2``, which vanishes on the homoclinic orbit."""
    return X * X - Y * Y - 0.5 * X ** 4


def _solve_delta(X, energy, theta, rho, eps):
    """Solve ``d = eps^3 (1+d)^3 K(d)`` for ``d = U - 1``.

    ``K = energy + X^2 ((1-rho)(1/R13 - 1) + rho (1/R23 - 1))`` where the
    ``R`` depend on ``U`` through ``u = eps^2 U^2 X^2``.
    """
    X = np.asarray(X, dtype=float)
    energy = np.asarray(energy, dtype=float)
    theta = np.asarray(theta, dtype=float)
    m1, m2 = 1.0 - rho, rho
    c = np.cos(theta)
    e3 = eps ** 3
    X2 = X * X

    def residual(d):
        u = (eps * (1.0 + d)) ** 2 * X2
        t13 = m2 * m2 * u * u + 2.0 * m2 * u * c
        t23 = m1 * m1 * u * u - 2.0 * m1 * u * c
        if np.any(1.0 + t13 <= COLLISION_FLOOR ** 2) or np.any(1.0 + t23 <= COLLISION_FLOOR ** 2):
            raise CollisionError("R13 or R23 below the collision floor")
        K = energy + X2 * (m1 * _inv_pow_minus_one(t13, 1) + m2 * _inv_pow_minus_one(t23, 1))
        return d - e3 * (1.0 + d) ** 3 * K

    d = np.zeros(np.broadcast(X, energy, theta).shape)
    for it in range(U_MAX_ITER):
        r = residual(d)
        if not np.all(np.isfinite(r)):
            raise NoConvergence("U iteration produced non-finite values")
        if np.all(np.abs(r) <= U_TOL * (1.0 + np.abs(d))):
            return d
        if it < U_NEWTON_AFTER:
            d = d - r
        else:
            hstep = 1e-7 * (1.0 + np.abs(d))
            slope = (residual(d + hstep) - residual(d - hstep)) / (2 * hstep)
            d = d - r / slope
    raise NoConvergence(f"U not converged after {U_MAX_ITER} iterations")


def solve_U(X, Y, theta, p: ParamSet):
    """Root ``U`` of the Jacobi relation in Duffing variables.

    ``U = 1 - eps^3 U^3 Y^2 - eps^3 U^3 X^4/2 + (1-rho) eps^3 U^3 X^2/R13
    + rho eps^3 U^3 X^2/R23`` with ``R13, R23`` evaluated at
    ``u = eps^2 U^2 X^2``.

    Raises
    ------
    NoConvergence
        If the iteration fails (the point is far from the perturbative
        regime).
    """
    if np.any(np.asarray(X) <= 0):
        raise DomainError("X must be positive")
    d = _solve_delta(X, jacobi_energy(X, Y), theta, p.rho, p.eps)
    return 1.0 + d


def jacobi_residual(X, Y, theta, U, p: ParamSet):
    """Residual of the Jacobi relation at a given ``U`` (direct evaluation)."""
    e3U3 = p.eps ** 3 * U ** 3
    F, G, R13, R23 = forces_FG(X, Y, theta, U, p)
    return (U - 1.0 + e3U3 * Y * Y + 0.5 * e3U3 * X ** 4
            - p.m1 * e3U3 * X * X / R13 - p.m2 * e3U3 * X * X / R23)


def duffing_rhs(s: DuffingState, p: ParamSet) -> DuffingState:
    """Derivatives ``(theta', X', Y')`` of the perturbed Duffing system.

    Raises
    ------
    DomainError
        If ``X <= X_FLOOR``.
    """
    theta, X, Y = s.theta, s.X, s.Y
    if np.any(np.asarray(X) <= X_FLOOR):
        raise DomainError(f"X below floor {X_FLOOR}")
    U = solve_U(X, Y, theta, p)
    F, G = forces_FG(X, Y, theta, U, p)[:2]
    e2U2 = (p.eps * U) ** 2
    dtheta = SQRT2 * (X - 1.0 / (p.eps ** 3 * U ** 3 * X ** 3))
    dX = Y + SQRT2 * e2U2 * X * X * G
    dY = X - X ** 3 - X * F + SQRT2 * e2U2 * X * Y * G
    return DuffingState(dtheta, dX, dY)


def duffing_field(p: ParamSet):
    """``f(tau, (theta, X, Y))`` for :func:`numerics.integrate_ode`."""
    def field(tau, y):
        d = duffing_rhs(DuffingState(*y), p)
        return np.array([d.theta, d.X, d.Y])
    return field


# --------------------------------------------------------------------------
# variables around the homoclinic orbit

@dataclass
class SPQ:
    """Perturbation terms around the homoclinic orbit plus the solved ``U``."""

    S: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    U: np.ndarray
    X: np.ndarray

    def __iter__(self):
        return iter((self.S, self.P, self.Q))


def spq_exact(x, y, Theta, tau, p: ParamSet, frame=None) -> SPQ:
    """Exact ``S, P, Q`` of the system for ``(x, y, Theta)`` around the orbit.

    ``X = a + x``, ``Y = b + y`` and ``theta = Theta + theta0 + psi``.

    Returns
    -------
    SPQ
        Unpacks as ``S, P, Q``; ``U`` and ``X`` are attached for callers
        that need the Theta rate.
    """
    fr = frame if frame is not None else eval_frame(tau, p.eps)
    a, b, bp = fr.a, fr.b, fr.bprime
    X = a + x
    Y = b + y
    if np.any(X <= 0):
        raise DomainError("x + a(tau) must be positive")
    theta = Theta + p.theta0 + fr.psi
    # X^2 - Y^2 - X^4/2 expanded around the orbit, where a^2 - b^2 - a^4/2 = 0
    energy = (2.0 * (bp * x - b * y) + (1.0 - 3.0 * a * a) * x * x - y * y
              - 2.0 * a * x ** 3 - 0.5 * x ** 4)
    d = _solve_delta(X, energy, theta, p.rho, p.eps)
    U = 1.0 + d
    F, G = forces_FG(X, Y, theta, U, p)[:2]
    e2U2 = (p.eps * U) ** 2
    U3m1 = d * (3.0 + 3.0 * d + d * d)
    S = (x ** 3 + 3.0 * a * x * x + 3.0 * a * a * x + U3m1 * X ** 3
         + p.eps ** 3 * U ** 3 * x * X ** 3 * a ** 3)
    P = SQRT2 * e2U2 * X * X * G
    Q = -x ** 3 - 3.0 * a * x * x - X * F + SQRT2 * e2U2 * X * Y * G
    return SPQ(S, P, Q, U, X)


def theta_rate(spq: SPQ, a, eps):
    """``Theta' = sqrt2 S / (eps^3 U^3 X^3 a^3)``."""
    return SQRT2 * spq.S / (eps ** 3 * spq.U ** 3 * spq.X ** 3 * a ** 3)


def pq_first_order(tau, theta0, eps, frame=None):
    """``d/drho`` of ``(P, Q)`` at ``rho = 0`` on the unperturbed orbit.

    These are the forcing terms of the first-order (Melnikov) problem:
    ``P1 = sqrt2 eps^2 a^2 sin(phi) (1 - R1^-3)`` and
    ``Q1 = -a ((1 - R1^-3) + eps^2 a^2 cos(phi) (2 + R1^-3)) + sqrt2 eps^2 a b sin(phi) (1 - R1^-3)``
    with ``phi = theta0 + psi``.
    """
    fr = frame if frame is not None else eval_frame(tau, eps)
    a, b = fr.a, fr.b
    phi = theta0 + fr.psi
    q = (eps * a) ** 2
    c = np.cos(phi)
    one_minus = -_inv_pow_minus_one(q * q - 2.0 * q * c, 3)
    G1 = np.sin(phi) * one_minus
    F1 = one_minus + q * c * (3.0 - one_minus)
    P1 = SQRT2 * q * G1
    Q1 = -a * F1 + SQRT2 * eps ** 2 * a * b * G1
    return P1, Q1
