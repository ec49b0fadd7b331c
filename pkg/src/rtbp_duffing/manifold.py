"""Primary stable and unstable solutions by Picard iteration.

Around the homoclinic orbit write ``X = a + x``, ``Y = b + y``,
``theta = theta0 + psi + Theta`` and use the frame coordinates

    M = (b' x - b y)/a,   W = Htilde x - H y,
    mM = M/(eps^3.5 a),   mW = W/(eps^3.5 a).

The primary stable solution with ``Y(0) = 0``, ``Theta(0) = 0`` solves

    Theta(t) = int_0^t sqrt2 S/(eps^3 U^3 X^3 a^3),
    M(t)     = -(1/a) int_t^inf (b' P - b Q),
    W(t)     = a int_0^t (Htilde P - H Q)/a,

and the unstable one the same with ``M(t) = (1/a) int_-inf^t (b' P - b Q)``.
The map is iterated on composite Gauss-Legendre nodes whose panels follow
the phase ``psi``; integrals between nodes are spectral within a panel.
Beyond ``|t| = T`` the forcing is split into its phase average, integrated
directly, and a zero-mean oscillatory part, integrated by parts once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_model import ParamSet, pq_first_order, spq_exact, theta_rate
from .errors import DomainEscape, MaxIterExceeded
from .frame import SQRT2, eval_frame, homoclinic_a, homoclinic_psi, psi_prime
from .numerics import (TAIL_GROWTH, GaussPanels, QuadSpec, find_zero, periodic_tail,
                       phase_edges, quad_improper)

__all__ = [
    "SolverSpec",
    "ScaledTrajectory",
    "IterationReport",
    "build_grid",
    "seed",
    "picard_step",
    "weighted_distance",
    "solve_stable",
    "solve_unstable",
    "splitting_distance",
    "splitting_distance_first_order",
    "find_homoclinic",
]

DOMAIN_BOUND = 1.0
_TAIL_SAMPLES = 32


@dataclass(frozen=True)
class SolverSpec:
    """Discretisation and stopping parameters.

    Attributes
    ----------
    tol : float
        Stop when the weighted-norm change of one step drops below this.
    max_iter : int
    order : int
        Gauss nodes per panel.
    max_phase : float
        Largest increment of ``psi`` across one panel.
    h_max : float
        Largest panel width in ``tau``.
    tail_tol : float
        Budget for the neglected second-order tail in units of ``mM(0)``.
    t_min, t_max : float
        Range searched for the cut ``T``.
    """

    tol: float = 1e-12
    max_iter: int = 60
    order: int = 16
    max_phase: float = 1.0
    h_max: float = 0.1
    tail_tol: float = 1e-13
    t_min: float = 1.0
    t_max: float = 12.0


@dataclass
class _Grid:
    panels: GaussPanels
    tau: np.ndarray
    frame: object
    T: float
    side: int


@dataclass
class ScaledTrajectory:
    """Samples of ``(mM, mW, Theta)`` on the Gauss nodes of one half line.

    Attributes
    ----------
    grid : ndarray
        Monotone nodes in ``(0, T)`` (stable) or ``(-T, 0)`` (unstable),
        ordered away from ``tau = 0``.
    mM, mW, Theta : ndarray
    mM0 : float
        ``mM(0)``; ``mW(0) = Theta(0) = 0`` by construction.
    params : ParamSet
    tail : float
        Contribution of ``|tau| > T`` to ``int (b' P - b Q)``.
    tail_error : float
        Bound on the neglected part of that contribution.
    """

    grid: np.ndarray
    mM: np.ndarray
    mW: np.ndarray
    Theta: np.ndarray
    mM0: float
    params: ParamSet
    tail: float = 0.0
    tail_error: float = 0.0
    _grid: _Grid | None = field(default=None, repr=False)

    @property
    def side(self):
        return self._grid.side

    @property
    def T(self):
        return self._grid.T

    def xy(self):
        """Displacements ``(x, y)`` from the homoclinic orbit at the nodes."""
        return _xy(self.mM, self.mW, self._grid.frame, self.params.eps)


@dataclass
class IterationReport:
    """Per-iteration changes in the weighted norm and their quotients."""

    residuals: list = field(default_factory=list)
    contraction_ratios: list = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.residuals)

    def max_ratio(self, floor: float = 0.0):
        """Largest quotient among steps whose previous change exceeds ``floor``.

        Quotients computed once the changes reach the rounding level are
        noise; ``floor`` excludes them.
        """
        r = [q for q, prev in zip(self.contraction_ratios, self.residuals[:-1]) if prev > floor]
        return max(r) if r else float("nan")


# --------------------------------------------------------------------------
# forcing

def _xy(mM, mW, fr, eps):
    s = eps ** 3.5
    return s * (fr.b * mW - fr.a * fr.H * mM), s * (fr.bprime * mW - fr.a * fr.Htilde * mM)


def _forcing(mM, mW, Theta, fr, p: ParamSet):
    """``(b'P - bQ, (Htilde P - H Q)/a, Theta')`` for the given state."""
    x, y = _xy(mM, mW, fr, p.eps)
    spq = spq_exact(x, y, Theta, fr.tau, p, fr)
    g = fr.bprime * spq.P - fr.b * spq.Q
    h = (fr.Htilde * spq.P - fr.H * spq.Q) / fr.a
    return g, h, theta_rate(spq, fr.a, p.eps)


def _tail_forcing(t, phi, mW, p: ParamSet):
    """``b'P - bQ`` at time ``t`` and angle ``phi`` with ``mM = 0`` and ``mW`` frozen."""
    t = np.asarray(t, dtype=float)
    fr = eval_frame(t, p.eps)
    Theta = phi - p.theta0 - fr.psi
    g = _forcing(0.0, mW, Theta, fr, p)[0]
    return g


def _tail_bound(t, mW, p: ParamSet):
    phi = 2.0 * np.pi * np.arange(_TAIL_SAMPLES) / _TAIL_SAMPLES
    amp = np.max(np.abs(_tail_forcing(t, phi, mW, p)))
    return TAIL_GROWTH * amp / psi_prime(t, p.eps) ** 2 / (p.eps ** 3.5 * homoclinic_a(0.0) ** 2)


def _choose_cut(p: ParamSet, spec: SolverSpec):
    """Smallest ``T`` at which the once-integrated tail is below ``tail_tol``.

    The frozen ``mW`` is unknown before solving; its size is bounded by the
    domain (``|mW| <= 1``), so the bound is taken at ``mW = 1``.
    """
    for t in np.arange(spec.t_min, spec.t_max, 0.05):
        if _tail_bound(t, DOMAIN_BOUND, p) < spec.tail_tol:
            return float(t)
    return float(spec.t_max)


def _tail(side, T, mW_T, Theta_T, dTheta_T, p: ParamSet):
    """``int`` of ``b'P - bQ`` over ``tau > T`` (side +1) or ``tau < -T`` (side -1)."""
    t_cut = side * T
    phi = 2.0 * np.pi * np.arange(_TAIL_SAMPLES) / _TAIL_SAMPLES

    def mean(t):
        t = np.asarray(t, dtype=float)
        return np.mean(_tail_forcing(t[..., None], phi, mW_T, p), axis=-1)

    interval = (t_cut, None) if side > 0 else (None, t_cut)
    avg, avg_err = quad_improper(mean, QuadSpec(abs_tol=1e-20, rel_tol=1e-12), interval=interval)

    def g(t, ph):
        return _tail_forcing(t, ph, mW_T, p)

    phase = p.theta0 + homoclinic_psi(t_cut, p.eps) + Theta_T
    dphase = psi_prime(t_cut, p.eps) + dTheta_T
    osc = periodic_tail(g, t_cut, phase, dphase, _TAIL_SAMPLES)
    bound = _tail_bound(t_cut, mW_T, p) * p.eps ** 3.5 * homoclinic_a(0.0) ** 2
    return avg + osc, avg_err + bound


# --------------------------------------------------------------------------
# grid and seed

def build_grid(p: ParamSet, side: int = 1, spec: SolverSpec | None = None) -> _Grid:
    """Phase-adapted Gauss panels on ``[0, T]`` (``side=1``) or ``[-T, 0]``."""
    spec = spec or SolverSpec()
    T = _choose_cut(p, spec)
    edges = phase_edges(lambda t: np.abs(psi_prime(t, p.eps)), 0.0, T, spec.max_phase, spec.h_max,
                        n_fine=200001)
    edges = side * np.asarray(edges)
    panels = GaussPanels(edges, spec.order)
    return _Grid(panels, panels.t, eval_frame(panels.t, p.eps), T, side)


def _assemble(grid: _Grid, p: ParamSet, g, h, rate, tail):
    fr, panels = grid.frame, grid.panels
    a0 = homoclinic_a(0.0)
    e35 = p.eps ** 3.5
    if grid.side > 0:
        M = -(panels.from_end(g) + tail) / fr.a
        M0 = -(panels.total(g) + tail) / a0
    else:
        # edges run from 0 down to -T, so from_end is int_t^{-T} = -int_{-T}^t
        M = (tail - panels.from_end(g)) / fr.a
        M0 = (tail - panels.total(g)) / a0
    W = fr.a * panels.cumulative(h)
    Theta = panels.cumulative(rate)
    return M / (e35 * fr.a), W / (e35 * fr.a), Theta, M0 / (e35 * a0)


def seed(p: ParamSet, side: int = 1, spec: SolverSpec | None = None,
         grid: _Grid | None = None) -> ScaledTrajectory:
    """Starting point ``Theta = 0`` with the leading-order ``(mM, mW)``.

    With ``c = (3 sqrt2/2) rho (1 - rho)`` and ``f = sin 2(theta0 + psi)``,

        mM_0 = c sqrt(eps)/a^2 int_t^inf a^4 (b' - b^2/a) f,
        mW_0 = -c sqrt(eps) int_0^t a^3 (Htilde - (b/a) H) f,

    the integral equations with only the leading ``sin 2 theta`` forcing
    kept (the unstable seed integrates from ``-inf`` with the opposite sign).
    """
    grid = grid or build_grid(p, side, spec)
    fr, panels = grid.frame, grid.panels
    c = 1.5 * SQRT2 * p.rho * (1.0 - p.rho)
    f = np.sin(2.0 * (p.theta0 + fr.psi))
    gm = fr.a ** 4 * (fr.bprime - fr.b * fr.b / fr.a) * f
    gw = fr.a ** 3 * (fr.Htilde - fr.b / fr.a * fr.H) * f
    se = np.sqrt(p.eps)
    a0 = homoclinic_a(0.0)
    # panels run away from 0, so from_end is int_t^T on the stable side and
    # -int_{-T}^t on the unstable side: the sign flip comes for free
    mM = c * se / fr.a ** 2 * panels.from_end(gm)
    mM0 = c * se / a0 ** 2 * panels.total(gm)
    mW = -c * se * panels.cumulative(gw)
    return ScaledTrajectory(grid.tau, mM, mW, np.zeros_like(grid.tau), float(mM0), p, _grid=grid)


def zero_state(p: ParamSet, side: int = 1, spec: SolverSpec | None = None,
               grid: _Grid | None = None) -> ScaledTrajectory:
    """The state ``mM = mW = Theta = 0``, the exact solution at ``rho = 0``."""
    grid = grid or build_grid(p, side, spec)
    z = np.zeros_like(grid.tau)
    return ScaledTrajectory(grid.tau, z, z.copy(), z.copy(), 0.0, p, _grid=grid)


# --------------------------------------------------------------------------
# iteration

def picard_step(current: ScaledTrajectory, p: ParamSet | None = None,
                check_domain: bool = True) -> ScaledTrajectory:
    """Apply the integral operator once.

    Raises
    ------
    DomainEscape
        If the output leaves ``|mM|, |mW| <= 1``.
    """
    p = p or current.params
    grid = current._grid
    g, h, rate = _forcing(current.mM, current.mW, current.Theta, grid.frame, p)
    # tail: freeze mW and Theta at the outermost node, mM ~ a^3 is dropped there
    tail, tail_err = _tail(grid.side, grid.T, current.mW[-1], current.Theta[-1], rate[-1], p)
    mM, mW, Theta, mM0 = _assemble(grid, p, g, h, rate, tail)
    if check_domain and (np.max(np.abs(mM)) > DOMAIN_BOUND or np.max(np.abs(mW)) > DOMAIN_BOUND):
        raise DomainEscape("iterate left |mM|, |mW| <= 1; eps too large for the contraction regime")
    return ScaledTrajectory(grid.tau, mM, mW, Theta, float(mM0), p, float(tail), float(tail_err), grid)


def weighted_distance(u: ScaledTrajectory, v: ScaledTrajectory) -> float:
    """``sup|dmM| + sup|dmW| + sup a^3 |dTheta|`` over the nodes and ``tau = 0``."""
    a3 = u._grid.frame.a ** 3
    dM = max(float(np.max(np.abs(u.mM - v.mM))), abs(u.mM0 - v.mM0))
    return dM + float(np.max(np.abs(u.mW - v.mW))) + float(np.max(a3 * np.abs(u.Theta - v.Theta)))


def _solve(p: ParamSet, side: int, tol, max_iter, spec: SolverSpec | None, start):
    spec = spec or SolverSpec()
    tol = spec.tol if tol is None else tol
    max_iter = spec.max_iter if max_iter is None else max_iter
    grid = build_grid(p, side, spec)
    if start == "seed":
        cur = seed(p, side, grid=grid)
    elif start == "zero":
        cur = zero_state(p, side, grid=grid)
    else:
        raise ValueError("start must be 'seed' or 'zero'")
    report = IterationReport()
    for _ in range(max_iter):
        nxt = picard_step(cur, p)
        d = weighted_distance(nxt, cur)
        if report.residuals:
            prev = report.residuals[-1]
            report.contraction_ratios.append(d / prev if prev > 0 else 0.0)
        report.residuals.append(d)
        cur = nxt
        if d < tol:
            report.converged = True
            return cur, report
    raise MaxIterExceeded(f"no convergence to {tol} in {max_iter} steps (last change {report.residuals[-1]:.3e})")


def solve_stable(p: ParamSet, tol=None, max_iter=None, spec: SolverSpec | None = None,
                 start: str = "seed"):
    """Primary stable solution on ``tau >= 0``.

    Returns
    -------
    ScaledTrajectory, IterationReport

    Raises
    ------
    MaxIterExceeded, DomainEscape
    """
    return _solve(p, 1, tol, max_iter, spec, start)


def solve_unstable(p: ParamSet, tol=None, max_iter=None, spec: SolverSpec | None = None,
                   start: str = "seed"):
    """Primary unstable solution on ``tau <= 0``; see :func:`solve_stable`."""
    return _solve(p, -1, tol, max_iter, spec, start)


def matching_X0(traj: ScaledTrajectory) -> float:
    """``X(0)`` recovered from the solution: ``X0 = a(0) + x(0)``.

    At ``tau = 0`` one has ``b = 0``, ``b' = a - a^3`` and ``H = 1``, so
    ``x(0) = -M(0) = -eps^3.5 a(0) mM(0)``, which is the matching condition
    ``X0 - a(0) = (1/a(0)) int_0^inf (b'P - bQ)``.
    """
    a0 = homoclinic_a(0.0)
    return float(a0 - traj.params.eps ** 3.5 * a0 * traj.mM0)


# --------------------------------------------------------------------------
# splitting distance

def splitting_distance_first_order(theta0, eps, spec: QuadSpec | None = None,
                                   return_error: bool = False):
    """``lim_{rho -> 0} D`` from the forcing ``d(P, Q)/drho`` on the orbit.

    ``D_0 = -(1/(eps^3.5 a(0)^2)) int_R (b' P1 - b Q1) dtau``, the first-order
    term of the rescaled equations, so no ``0/0`` limit is taken.
    """
    a0sq = homoclinic_a(0.0) ** 2
    pref = -1.0 / (eps ** 3.5 * a0sq)

    def g_phi(t, phi):
        fr = eval_frame(t, eps)
        P1, Q1 = pq_first_order(t, phi - homoclinic_psi(t, eps), eps, fr)
        return fr.bprime * P1 - fr.b * Q1

    def f(t):
        return g_phi(t, theta0 + homoclinic_psi(t, eps))

    def envelope(t):
        # |b'P1 - bQ1| <= 2.5 a q^2/(1-q)^4, q = (eps a)^2 (measured max ~2.2)
        a = homoclinic_a(t)
        q = (eps * a) ** 2
        return 2.5 * a * q * q / (1.0 - q) ** 4

    def endpoint(lo, hi):
        out = 0.0
        for t in (lo, hi):
            if t is not None:
                out += periodic_tail(g_phi, t, theta0 + homoclinic_psi(t, eps), psi_prime(t, eps))
        return out

    spec = spec or QuadSpec(abs_tol=1e-14, rel_tol=1e-10)
    val, err = quad_improper(f, spec, frequency=lambda t: np.abs(psi_prime(t, eps)),
                             envelope=envelope, endpoint=endpoint)
    return (pref * val, abs(pref) * err) if return_error else pref * val


def splitting_distance(p: ParamSet, tol=None, spec: SolverSpec | None = None,
                       return_parts: bool = False):
    """``D(theta0, rho, eps) = (mM_s(0) - mM_u(0))/rho``.

    At ``rho = 0`` the first-order limit is returned.
    """
    if p.rho == 0:
        return splitting_distance_first_order(p.theta0, p.eps)
    s, rs = solve_stable(p, tol, spec=spec)
    u, ru = solve_unstable(p, tol, spec=spec)
    d = (s.mM0 - u.mM0) / p.rho
    if return_parts:
        return d, (s, rs), (u, ru)
    return d


def find_homoclinic(p: ParamSet, bracket=(-0.5, 0.5), tol=None, spec: SolverSpec | None = None,
                    xtol: float = 1e-12, h: float = 1e-4):
    """Zero of ``theta0 -> D(theta0, rho, eps)`` inside ``bracket``.

    Returns
    -------
    ZeroResult
        ``root`` and the central-difference ``derivative`` there.

    Raises
    ------
    NoSignChange
    """
    return find_zero(lambda th: splitting_distance(p.with_theta0(th), tol, spec),
                     bracket, tol=xtol, h=h)
