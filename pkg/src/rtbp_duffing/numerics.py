"""Shared numerical engines.

Adaptive ODE integration, improper quadrature with phase-aware panels,
spectral panel integration for Nystrom-type Picard iterations, Fourier
projection on the circle and bracketed root finding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre as _leg
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import NoSignChange, PanelBudgetExceeded, StepSizeUnderflow

__all__ = [
    "OdeSpec",
    "QuadSpec",
    "DenseTrajectory",
    "ZeroResult",
    "GaussPanels",
    "integrate_ode",
    "quad_improper",
    "quad_interval",
    "gauss_kronrod",
    "phase_edges",
    "periodic_tail",
    "fourier_project",
    "fourier_sine_table",
    "find_zero",
]


# 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208977207051,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full symmetric node/weight vectors on [-1, 1]
GK_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_G_IDX = np.array([1, 3, 5, 7, 9, 11, 13, 15, 17, 19])
G_WEIGHTS = np.concatenate([_WG, _WG[::-1]])


# |K - G| below this multiple of int|f| is rounding noise
ROUNDING_FLOOR = 200.0 * np.finfo(float).eps

# decay rate allowance for the second integration-by-parts remainder
TAIL_GROWTH = 40.0


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and limits for :func:`quad_improper`.

    Attributes
    ----------
    abs_tol, rel_tol : float
        Error targets; the global target is ``max(abs_tol, rel_tol*|I|)``.
    tail_cut : float
        Symmetric truncation of the real line for non-oscillatory integrands.
    max_panels : int
        Cap on the number of panels, including the initial partition.
    max_phase : float
        Largest phase advance (radians) allowed on one initial panel when a
        local frequency is supplied.
    h_max : float
        Largest width of an initial panel.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    tail_cut: float = 45.0
    max_panels: int = 4_000_000
    max_phase: float = 2.0
    h_max: float = 0.25


@dataclass(frozen=True)
class OdeSpec:
    """Tolerances for :func:`integrate_ode`."""

    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_step: float = np.inf
    dense_output: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("ODE tolerances must be positive")


@dataclass
class DenseTrajectory:
    """Output of :func:`integrate_ode`.

    ``t`` and ``y`` hold the accepted steps (``y`` has shape (n_state, n_t));
    calling the object evaluates the dense interpolant.
    """

    t: np.ndarray
    y: np.ndarray
    sol: Callable | None
    nfev: int
    stopped: bool = False

    def __call__(self, t):
        if self.sol is None:
            raise ValueError("trajectory was integrated without dense output")
        return self.sol(t)


@dataclass
class ZeroResult:
    root: float
    derivative: float
    iterations: int


# --------------------------------------------------------------------------
# ODEs

def integrate_ode(field, initial_state, t_span, spec: OdeSpec | None = None, stop=None):
    """Integrate ``dy/dt = field(t, y)`` with an adaptive embedded pair.

    Uses the 8(5,3) Dormand-Prince pair with its dense interpolant.

    Parameters
    ----------
    field : callable
        ``field(t, y) -> dy/dt`` on 1-d arrays.
    initial_state : array_like
    t_span : (float, float)
    spec : OdeSpec, optional
    stop : callable, optional
        ``stop(t, y)``; integration ends where it changes sign and
        ``stopped`` is set on the result.

    Returns
    -------
    DenseTrajectory

    Raises
    ------
    StepSizeUnderflow
        If the step size collapses (typically at a singularity).
    """
    spec = spec or OdeSpec()
    events = None
    if stop is not None:
        def events(t, y):
            return stop(t, y)
        events.terminal = True
    res = solve_ivp(field, t_span, np.asarray(initial_state, dtype=float),
                    method="DOP853", rtol=spec.rel_tol, atol=spec.abs_tol,
                    max_step=spec.max_step, dense_output=spec.dense_output, events=events)
    if res.status == -1:
        raise StepSizeUnderflow(res.message)
    return DenseTrajectory(res.t, res.y, res.sol, res.nfev, res.status == 1)


# --------------------------------------------------------------------------
# panel quadrature

def gauss_kronrod(f, lo, hi, with_abs: bool = False):
    """Apply the G10/K21 pair on each panel ``[lo[i], hi[i]]``.

    ``f`` must accept a 1-d array and may return real or complex values.

    Returns
    -------
    value, error : ndarray
        Kronrod estimate per panel and ``|K - G|`` per panel.
    abs_value : ndarray
        Kronrod estimate of ``int |f|`` per panel, only if ``with_abs``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[:, None] + half[:, None] * GK_NODES[None, :]
    fv = np.asarray(f(t.ravel())).reshape(t.shape)
    k = half * (fv @ GK_WEIGHTS)
    g = half * (fv[:, _G_IDX] @ G_WEIGHTS)
    if with_abs:
        return k, np.abs(k - g), half * (np.abs(fv) @ GK_WEIGHTS)
    return k, np.abs(k - g)


def phase_edges(frequency, lo, hi, max_phase, h_max, n_fine=20001):
    """Panel edges on ``[lo, hi]`` with bounded phase advance per panel.

    ``frequency(t)`` is a positive local angular rate.  The cumulative phase
    is tabulated on a fine uniform grid (the rate is assumed to vary on a
    scale much longer than the grid spacing) and edges are placed at every
    ``max_phase`` radians, merged with a uniform grid of spacing ``h_max``.
    """
    t = np.linspace(lo, hi, n_fine)
    om = np.abs(frequency(t))
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (om[1:] + om[:-1]) * np.diff(t))])
    n_cuts = int(phase[-1] // max_phase)
    cuts = np.interp(max_phase * np.arange(1, n_cuts + 1), phase, t)
    uniform = np.linspace(lo, hi, int(np.ceil((hi - lo) / h_max)) + 1)
    edges = np.union1d(uniform, cuts)
    # drop slivers created by the merge
    keep = np.concatenate([[True], np.diff(edges) > 1e-9 * max(1.0, hi - lo)])
    edges = edges[keep]
    edges[-1] = hi
    return edges


def _adaptive(f, edges, tol_abs, rel_tol, max_panels):
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    total_width = edges[-1] - edges[0]
    value = 0.0
    error = 0.0
    estimate = None
    n_panels = lo.size
    while lo.size:
        if n_panels > max_panels:
            raise PanelBudgetExceeded(f"more than {max_panels} panels needed")
        k, e, kabs = gauss_kronrod(f, lo, hi, with_abs=True)
        if estimate is None:
            estimate = abs(np.sum(k))
        target = max(tol_abs, rel_tol * estimate)
        local = target * (hi - lo) / total_width
        # a panel whose K-G gap is at the rounding floor cannot improve, nor
        # can one already at the width floor; its gap stays in the estimate
        ok = ((e <= local) | (e <= ROUNDING_FLOOR * kabs)
              | (hi - lo < 1e-13 * max(1.0, total_width)))
        value = value + np.sum(k[ok])
        error += float(np.sum(e[ok]))
        lo, hi = lo[~ok], hi[~ok]
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        n_panels += lo.size // 2
    return value, error


def quad_interval(f, lo, hi, spec: QuadSpec | None = None, frequency=None):
    """Adaptive G10/K21 quadrature of ``f`` over the finite interval ``[lo, hi]``.

    If ``frequency`` is given the initial partition is phase adapted.
    Returns ``(value, error_estimate)``.
    """
    spec = spec or QuadSpec()
    if frequency is None:
        n = max(1, int(np.ceil((hi - lo) / spec.h_max)))
        edges = np.linspace(lo, hi, n + 1)
    else:
        edges = phase_edges(frequency, lo, hi, spec.max_phase, spec.h_max)
    return _adaptive(f, edges, spec.abs_tol, spec.rel_tol, spec.max_panels)


def quad_improper(f, spec: QuadSpec | None = None, *, frequency=None,
                  envelope=None, interval=None, endpoint=None):
    """Integrate ``f`` over the real line (or a half line).

    Without ``frequency`` the line is truncated to ``[-tail_cut, tail_cut]``
    and refined adaptively with symmetric initial panels.

    For integrands of the form ``A(t) G(phi(t))`` with fast phase ``phi`` and
    zero phase-mean, pass ``frequency(t) = |phi'(t)|`` and an amplitude bound
    ``envelope(t) >= |A(t)| sup|G|``; both must be even in ``t``.  The range
    is then cut where the integration-by-parts tail bound
    ``2*envelope/frequency`` drops below ``abs_tol/10`` and that bound is
    added to the error estimate.

    Parameters
    ----------
    f : callable
        Vectorised integrand, real or complex valued.
    spec : QuadSpec, optional
    frequency, envelope : callable, optional
    interval : (float or None, float or None), optional
        Integration limits; ``None`` stands for the corresponding infinity.
    endpoint : callable, optional
        ``endpoint(lo, hi)`` returns the first integration-by-parts estimate
        of the integral outside ``[lo, hi]`` (see :func:`periodic_tail`).
        With it the cut only needs ``TAIL_GROWTH*envelope/frequency**2``
        to be small, which moves the cut much closer to the origin.

    Returns
    -------
    value, error_estimate

    Raises
    ------
    PanelBudgetExceeded
    """
    spec = spec or QuadSpec()
    lo, hi = interval if interval is not None else (None, None)
    tail_bound = 0.0
    if frequency is None:
        cut = spec.tail_cut
    else:
        if envelope is None:
            raise ValueError("an envelope is required with a frequency hint")
        t = np.linspace(0.0, spec.tail_cut, 4501)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            bound = 2.0 * np.abs(envelope(t)) / np.abs(frequency(t))
            if endpoint is not None:
                bound = TAIL_GROWTH * bound / np.abs(frequency(t))
        # cut after the last sample where the bound is still too large
        large = np.nonzero(~(bound < 0.1 * spec.abs_tol))[0]
        idx = min(large[-1] + 1 if large.size else 1, t.size - 1)
        cut = t[idx]
        tail_bound = 2.0 * float(bound[idx])
    lo = -cut if lo is None else max(lo, -cut)
    hi = cut if hi is None else min(hi, cut)
    if hi <= lo:
        return 0.0, tail_bound

    def half_edges(a, b):
        # edges on [a, b] with 0 <= a < b, built on |t|
        if frequency is None:
            n = max(1, int(np.ceil((b - a) / spec.h_max)))
            return np.linspace(a, b, n + 1)
        return phase_edges(frequency, a, b, spec.max_phase, spec.h_max)

    if lo >= 0:
        edges = half_edges(lo, hi)
    elif hi <= 0:
        edges = -half_edges(-hi, -lo)[::-1]
    else:
        right = half_edges(0.0, hi)
        left = -half_edges(0.0, -lo)[::-1]
        edges = np.concatenate([left[:-1], right])
    value, error = _adaptive(f, edges, spec.abs_tol, spec.rel_tol, spec.max_panels)
    if endpoint is not None and frequency is not None:
        value = value + endpoint(None if interval is not None and interval[0] is not None else lo,
                                 None if interval is not None and interval[1] is not None else hi)
    return value, error + tail_bound


def periodic_tail(g, t, phase, dphase, n: int = 32):
    """Integration-by-parts estimate of ``int_t^{+-inf} g(s, phase(s)) ds``.

    ``g(s, phi)`` is 2*pi periodic in ``phi`` with zero mean and the phase
    is monotone beyond ``t``.  With ``Q`` the zero-mean antiderivative of
    ``g`` in ``phi``, the tail is ``-Q/phase'`` at ``t`` for the right tail
    (``+Q/phase'`` for the left tail, pass ``t < 0``), up to a remainder
    of order ``|g| |d log g| / phase'^2``.

    Parameters
    ----------
    g : callable
        ``g(t, phi)`` with ``phi`` a 1-d array of samples.
    t : float
        Cut point; the tail is taken away from the origin.
    phase, dphase : float
        ``phase(t)`` and ``phase'(t)``.
    n : int
        Samples of one period used for the antiderivative.
    """
    phi = 2.0 * np.pi * np.arange(n) / n
    c = np.fft.rfft(np.asarray(g(t, phi), dtype=float)) / n
    q = np.arange(c.size)
    # Q(phase) = sum_{q>0} 2 Re(c_q e^{i q phase} / (i q))
    anti = 2.0 * np.real(c[1:] * np.exp(1j * q[1:] * phase) / (1j * q[1:]))
    if n % 2 == 0:
        anti[-1] *= 0.5
    Q = float(np.sum(anti))
    return -Q / dphase if t > 0 else Q / dphase


class GaussPanels:
    """Composite Gauss-Legendre nodes with spectral cumulative integration.

    Parameters
    ----------
    edges : array_like
        Strictly monotone panel edges (increasing or decreasing).
    order : int
        Nodes per panel.

    Notes
    -----
    ``cumulative(f)`` returns ``int_{edges[0]}^{t_j} f`` at every node and
    ``from_end(f)`` returns ``int_{t_j}^{edges[-1]} f``, both exact for
    piecewise polynomials of degree < ``order``.  For decreasing edges the
    integrals are oriented, e.g. ``cumulative`` is ``int_{edges[0]}^{t_j}``.
    """

    def __init__(self, edges, order: int = 16):
        edges = np.asarray(edges, dtype=float)
        x, w = _leg.leggauss(order)
        # S[j, k] = int_{-1}^{x_j} l_k(s) ds for the Lagrange basis l_k
        vander = _leg.legvander(x, order - 1)
        integ = np.empty((order, order))
        for k in range(order):
            c = np.zeros(order)
            c[k] = 1.0
            integ[:, k] = _leg.legval(x, _leg.legint(c, lbnd=-1.0))
        self.S = integ @ np.linalg.inv(vander)
        self.order = order
        self.edges = edges
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        self.half = half
        self.t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        self.w = (half[:, None] * w[None, :]).ravel()
        self.n_panels = half.size

    def _panel(self, f):
        return np.asarray(f).reshape(self.n_panels, self.order)

    def total(self, f):
        return np.sum(self.w * np.asarray(f))

    def cumulative(self, f):
        fp = self._panel(f)
        partial = self.half[:, None] * (fp @ self.S.T)
        panel_tot = (self.w.reshape(self.n_panels, self.order) * fp).sum(axis=1)
        before = np.concatenate([[0.0], np.cumsum(panel_tot)[:-1]])
        return (before[:, None] + partial).ravel()

    def from_end(self, f):
        fp = self._panel(f)
        partial = self.half[:, None] * (fp @ self.S.T)
        panel_tot = (self.w.reshape(self.n_panels, self.order) * fp).sum(axis=1)
        after = np.concatenate([np.cumsum(panel_tot[::-1])[::-1][1:], [0.0]])
        return (after[:, None] + (panel_tot[:, None] - partial)).ravel()


# --------------------------------------------------------------------------
# Fourier projection

def fourier_sine_table(g, kmax: int, n: int = 512):
    """Sine and cosine coefficients of a 2*pi periodic function.

    Trapezoid rule on ``n`` equispaced samples, i.e. an FFT.

    Returns
    -------
    sin_coef, cos_coef : ndarray of length ``kmax + 1``
        ``g ~ cos_coef[0] + sum_k cos_coef[k] cos(k t) + sin_coef[k] sin(k t)``.
    """
    theta = 2.0 * np.pi * np.arange(n) / n
    vals = np.asarray(g(theta), dtype=float)
    c = np.fft.rfft(vals) / n
    sin_coef = np.zeros(kmax + 1)
    cos_coef = np.zeros(kmax + 1)
    top = min(kmax, c.size - 1)
    sin_coef[1:top + 1] = -2.0 * c[1:top + 1].imag
    cos_coef[1:top + 1] = 2.0 * c[1:top + 1].real
    cos_coef[0] = c[0].real
    return sin_coef, cos_coef


def fourier_project(g, m: int, parity: str, n: int = 512) -> float:
    """Return ``(1/pi) int_0^{2 pi} g(t) sin(k t) dt`` with ``k = 2m+1`` or ``2m``.

    ``parity`` is ``"odd"`` (k = 2m+1) or ``"even"`` (k = 2m, m >= 1).
    """
    if parity == "odd":
        k = 2 * m + 1
    elif parity == "even":
        if m < 1:
            raise ValueError("even harmonics start at m = 1")
        k = 2 * m
    else:
        raise ValueError("parity must be 'odd' or 'even'")
    sin_coef, _ = fourier_sine_table(g, k, n)
    return float(sin_coef[k])


# --------------------------------------------------------------------------
# roots

def find_zero(f, bracket, tol: float = 1e-12, h: float | None = None) -> ZeroResult:
    """Bracketed root of a scalar function and the derivative there.

    Brent's method (bisection safeguarded secant and inverse quadratic
    steps) followed by a central difference with step ``h``.

    Raises
    ------
    NoSignChange
        If ``f`` has the same sign at both ends of the bracket.
    """
    lo, hi = map(float, bracket)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        root, it = lo, 0
    elif f_hi == 0.0:
        root, it = hi, 0
    else:
        if np.sign(f_lo) == np.sign(f_hi):
            raise NoSignChange(f"f({lo})={f_lo:g} and f({hi})={f_hi:g} have the same sign")
        root, info = brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                            full_output=True)
        it = info.iterations
    if h is None:
        h = 1e-4 * max(1.0, abs(root))
    deriv = (f(root + h) - f(root - h)) / (2 * h)
    return ZeroResult(float(root), float(deriv), int(it))
