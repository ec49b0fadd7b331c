"""First-order splitting function ``D0(theta0)`` and its sine series.

Two independent routes are provided:

* :func:`D0_direct` integrates the Melnikov integrand over the whole line.
* :func:`fourier_series_D0` assembles the sine coefficients from exact
  rational coefficients (:func:`series_coefficients`) and elementary
  homoclinic integrals (:func:`elementary_integral`).

Two conventions are supported for the Melnikov integrand.

``"exact"``
    The first-order solution of the variational problem,
    ``(a M)' = b' P - b Q``.  This is what the manifold solver converges to
    as ``rho -> 0``; the ``I`` weight reduces to ``-a^5/2`` and ``J`` enters
    with a minus sign.
``"closed_form"``
    The weight ``2 a^3 - 3 a^5/2`` (equal to ``b' a^2 + a b^2``) with ``J``
    entering with a plus sign, i.e. the variant obtained from
    ``(a M)' = b' P + b Q``.

Independently, the rational coefficients come in a ``"closed_form"`` form that
reproduces the closed-form values (``C2_{0,1,0} = 99/16``,
``calC_{0,1,0} = -123/8``) and a ``"corrected"`` form that is the true
Fourier-Taylor expansion of ``R1^-3``.  Only the corrected form sums to
:func:`D0_direct`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, PanelBudgetExceeded
from .frame import SQRT2, homoclinic_a, homoclinic_b, homoclinic_psi, psi_prime
from .numerics import QuadSpec, periodic_tail, quad_improper

__all__ = [
    "CONVENTIONS",
    "ElementaryIntegral",
    "FourierTable",
    "SeriesCoefficients",
    "R1",
    "D0_direct",
    "D0_integrand",
    "binom",
    "elementary_integral",
    "fourier_series_D0",
    "homoclinic_integral",
    "melnikov_weight",
    "r1_inv_cubed_series",
    "series_coefficients",
    "shell_order",
]

CONVENTIONS = ("exact", "closed_form")
EPS_MAX = 0.5

# sign of the J term and the (d1, d2) weights of a^3, a^5 in the I term
_J_SIGN = {"exact": -1, "closed_form": 1}
_D_WEIGHTS = {"exact": (Fraction(0), Fraction(1, 2)),
              "closed_form": (Fraction(2), Fraction(3, 2))}


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")


def _check_eps(eps):
    if not 0 < eps <= EPS_MAX:
        raise DomainError(f"eps must lie in (0, {EPS_MAX}]")


# --------------------------------------------------------------------------
# integrand

def R1(tau, theta0, eps):
    """``R1 = sqrt(1 - 2 eps^2 a^2 cos(psi + theta0) + eps^4 a^4)``.

    Raises
    ------
    DomainError
        If the radicand is not positive.
    """
    a = homoclinic_a(tau)
    w = (eps * a) ** 2
    if eps == 0:
        return np.ones_like(np.asarray(a, dtype=float))
    rad = 1.0 - 2.0 * w * np.cos(homoclinic_psi(tau, eps) + theta0) + w * w
    if np.any(rad <= 0):
        raise DomainError("R1 radicand is not positive")
    return np.sqrt(rad)


def _one_minus_r_inv3(w, c):
    # 1 - (1 + w^2 - 2 w c)^(-3/2) without cancellation for small w
    t = w * w - 2.0 * w * c
    return -np.expm1(-1.5 * np.log1p(t))


def melnikov_weight(a, convention: str = "exact"):
    """Weight of ``sin(phi)(1 - R1^-3)`` in the ``I`` integral."""
    _check_convention(convention)
    d1, d2 = _D_WEIGHTS[convention]
    return float(d1) * a ** 3 - float(d2) * a ** 5


def D0_integrand(tau, theta0, eps, convention: str = "exact"):
    """Integrand of ``D0 = -(sqrt2/(2 eps^1.5)) I + s_J/(2 eps^3.5) J``."""
    return _d0_at_phase(tau, theta0 + homoclinic_psi(tau, eps), eps, convention)


def _d0_at_phase(tau, phi, eps, convention):
    a = homoclinic_a(tau)
    b = homoclinic_b(tau)
    w = (eps * a) ** 2
    c = np.cos(phi)
    om = _one_minus_r_inv3(w, c)
    i_part = melnikov_weight(a, convention) * np.sin(phi) * om
    j_part = a * b * (w * c * (3.0 - om) + om)
    return (-SQRT2 / (2.0 * eps ** 1.5) * i_part
            + _J_SIGN[convention] / (2.0 * eps ** 3.5) * j_part)


def _phase_endpoint(g, theta0, eps, q=1):
    # integration-by-parts tails of g(t, q (theta0 + psi)) beyond the cuts
    def endpoint(lo, hi):
        out = 0.0
        for t in (lo, hi):
            if t is not None and t != 0:
                out += periodic_tail(g, t, q * (theta0 + homoclinic_psi(t, eps)),
                                     q * psi_prime(t, eps))
        return out
    return endpoint


def _d0_envelope(eps, convention):
    d1, d2 = (float(d) for d in _D_WEIGHTS[convention])

    def envelope(tau):
        a = homoclinic_a(tau)
        w = (eps * a) ** 2
        m1 = (1.0 - w) ** -3 - 1.0
        amp_i = SQRT2 / (2.0 * eps ** 1.5) * (d1 * a ** 3 + d2 * a ** 5) * m1
        amp_j = 1.0 / (2.0 * eps ** 3.5) * a * np.abs(homoclinic_b(tau)) * (w * (3.0 + m1) + m1)
        return amp_i + amp_j
    return envelope


def D0_direct(theta0, eps, convention: str = "exact", spec: QuadSpec | None = None,
              return_error: bool = False):
    """First-order splitting function by quadrature of its integrand.

    Parameters
    ----------
    theta0 : float
    eps : float
        Supported window ``[0.3, 0.5]``; smaller values lose all digits to
        cancellation in double precision.
    convention : {"exact", "closed_form"}
    spec : QuadSpec, optional
    return_error : bool
        Also return the quadrature error estimate.

    Raises
    ------
    PanelBudgetExceeded
    """
    _check_convention(convention)
    _check_eps(eps)
    spec = spec or QuadSpec(abs_tol=1e-13, rel_tol=1e-10)
    value, err = quad_improper(
        lambda t: D0_integrand(t, theta0, eps, convention), spec,
        frequency=lambda t: psi_prime(t, eps), envelope=_d0_envelope(eps, convention),
        endpoint=_phase_endpoint(lambda t, phi: _d0_at_phase(t, phi, eps, convention),
                                 theta0, eps))
    return (float(value), float(err)) if return_error else float(value)


# --------------------------------------------------------------------------
# exact coefficients

def binom(alpha, n: int) -> Fraction:
    """Generalized binomial coefficient in exact arithmetic; zero for ``n < 0``."""
    if n < 0:
        return Fraction(0)
    alpha = Fraction(alpha)
    out = Fraction(1)
    for i in range(n):
        out = out * (alpha - i) / (i + 1)
    return out


_H = Fraction(1, 2)


def _beta(n):
    return binom(Fraction(-3, 2), n)


@lru_cache(maxsize=None)
def _c_base(m, k, l, formula):
    if formula == "closed_form" and m == 0:
        shape = 2 * binom(2 * k, k) - binom(2 * k, k - 1)
    else:
        shape = binom(2 * k, k - m) - binom(2 * k, k - m - 1)
    val = _beta(2 * k) * shape * binom(-2 * k - Fraction(3, 2), l)
    if m == 0 and l == 0:
        val += _beta(k)
    return val


@lru_cache(maxsize=None)
def _e_base(m, k, l):
    return (_beta(2 * k - 1) * (binom(2 * k - 1, k - m) - binom(2 * k - 1, k - m - 1))
            * binom(-2 * k - _H, l))


@lru_cache(maxsize=None)
def _calc_base(m, k, l, formula):
    if formula == "closed_form":
        val = -(_H * _beta(2 * k) * binom(-2 * k - Fraction(3, 2), l)
                - _beta(2 * k + 1) * binom(-2 * k - Fraction(5, 2), l)) * binom(2 * k + 1, k - m)
    else:
        val = -2 * (_H * _beta(2 * k) * binom(-2 * k - Fraction(3, 2), l)
                    + _beta(2 * k + 1) * binom(-2 * k - Fraction(5, 2), l)) * binom(2 * k + 1, k - m)
    if m == 0 and l == 0:
        val += -(-3 * binom(Fraction(-5, 2), k) + _beta(k))
    return val


@lru_cache(maxsize=None)
def _cale_base(m, k, l, formula):
    if formula == "closed_form":
        sign = -1
        scale = 1
    else:
        sign = 1
        scale = 2
    return scale * (_H * _beta(2 * k - 1) * binom(-2 * k - _H, l)
                    + sign * _beta(2 * k) * binom(-2 * k - Fraction(3, 2), l)) * binom(2 * k, k - m)


@dataclass(frozen=True)
class SeriesCoefficients:
    """Exact coefficients attached to one index triple ``(m, k, l)``.

    ``E1, E2, calE`` are ``None`` for ``m = 0`` (no even harmonic).
    """

    m: int
    k: int
    l: int
    C1: Fraction
    C2: Fraction
    calC: Fraction
    E1: Fraction | None = None
    E2: Fraction | None = None
    calE: Fraction | None = None


def series_coefficients(m: int, k: int, l: int, formula: str = "closed_form",
                        convention: str = "closed_form") -> SeriesCoefficients:
    """Rational coefficients of the sine series of ``I`` and ``J``.

    Parameters
    ----------
    m, k, l : int
        Harmonic index, binomial order and ``(1 + eps^4 a^4)`` expansion order.
        Requires ``m >= 0``, ``k >= max(m, 1)``, ``l >= 0``.
    formula : {"closed_form", "corrected"}
        ``"closed_form"`` reproduces the closed-form values literally.
        ``"corrected"`` is the true expansion: the constant harmonic of
        ``(2 cos)^{2k}`` is ``binom(2k, k)``, not twice that, and the ``J``
        bracket is ``-2 [beta_{2k}/2 + beta_{2k+1}]``.
    convention : {"closed_form", "exact"}
        Selects ``(d1, d2)``: ``(2, 3/2)`` or ``(0, 1/2)``.

    Raises
    ------
    IndexError
        Outside the admissible index set.
    """
    if formula not in ("closed_form", "corrected"):
        raise ValueError("formula must be 'closed_form' or 'corrected'")
    _check_convention(convention)
    if m < 0 or l < 0 or k < max(m, 1):
        raise IndexError(f"(m, k, l) = ({m}, {k}, {l}) outside the index set")
    d1, d2 = _D_WEIGHTS[convention]
    c = _c_base(m, k, l, formula)
    calc = _calc_base(m, k, l, formula)
    if m == 0:
        return SeriesCoefficients(m, k, l, d1 * c, d2 * c, calc)
    e = _e_base(m, k, l)
    return SeriesCoefficients(m, k, l, d1 * c, d2 * c, calc, d1 * e, d2 * e,
                              _cale_base(m, k, l, formula))


def r1_inv_cubed_series(tau, theta0, eps, trunc: int = 20, formula: str = "corrected"):
    """Partial sum of the harmonic expansion of ``R1^-3``.

    With ``w = eps^2 a^2`` and ``phi = theta0 + psi``::

        R1^-3 = (1+w^2)^-3/2 + sum_k 2 beta_{2k} w^{2k} (1+w^2)^{-2k-3/2} [binom(2k,k)/2 + sum_m binom(2k,k-m) cos 2m phi]
                - sum_k 2 beta_{2k+1} w^{2k+1} (1+w^2)^{-2k-5/2} sum_m binom(2k+1,k-m) cos (2m+1) phi

    ``trunc`` caps ``k``.  ``formula="closed_form"`` drops the 1/2 on the
    constant harmonic, reproducing the closed-form statement; it does not
    converge to ``R1^-3``.
    """
    a = homoclinic_a(np.asarray(tau, dtype=float))
    w = (eps * a) ** 2
    if np.any(2 * w / (1 + w * w) >= 1):
        raise DomainError("expansion requires 2 w / (1 + w^2) < 1")
    phi = theta0 + homoclinic_psi(tau, eps) if eps > 0 else theta0 + 0 * a
    s = 1.0 + w * w
    total = s ** -1.5
    half = 1.0 if formula == "closed_form" else 0.5
    for k in range(1, trunc + 1):
        even = 2.0 * float(_beta(2 * k)) * w ** (2 * k) * s ** (-2 * k - 1.5)
        harm = half * float(binom(2 * k, k))
        for m in range(1, k + 1):
            harm = harm + float(binom(2 * k, k - m)) * np.cos(2 * m * phi)
        total = total + even * harm
    for k in range(0, trunc + 1):
        odd = 2.0 * float(_beta(2 * k + 1)) * w ** (2 * k + 1) * s ** (-2 * k - 2.5)
        harm = 0.0
        for m in range(0, k + 1):
            harm = harm + float(binom(2 * k + 1, k - m)) * np.cos((2 * m + 1) * phi)
        total = total - odd * harm
    return total


# --------------------------------------------------------------------------
# elementary homoclinic integrals

KINDS = ("I1_odd", "I2_odd", "I1_even", "I2_even", "J_odd", "J_even")


@dataclass
class ElementaryIntegral:
    """One weighted homoclinic integral, e.g. ``I2_odd`` with ``(n, m)``.

    ``value`` is filled in by :func:`elementary_integral`.
    """

    kind: str
    n: int
    m: int
    value: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind.endswith("odd"):
            ok = (self.m == 0 and self.n >= 1) or (self.m >= 1 and self.n >= self.m)
        else:
            ok = self.m >= 1 and self.n >= self.m
        if not ok:
            raise IndexError(f"(n, m) = ({self.n}, {self.m}) outside the index set of {self.kind}")

    def exponents(self):
        """``(p, q, r, w)``: ``eps^w * int a^p b^r e^{i q psi}`` (Re or Im part)."""
        n, m = self.n, self.m
        table = {
            "I1_odd": (4 * n + 3, 2 * m + 1, 0, 4 * n),
            "I2_odd": (4 * n + 5, 2 * m + 1, 0, 4 * n),
            "I1_even": (4 * n + 1, 2 * m, 0, 4 * n - 2),
            "I2_even": (4 * n + 3, 2 * m, 0, 4 * n - 2),
            "J_odd": (4 * n + 3, 2 * m + 1, 1, 4 * n + 2),
            "J_even": (4 * n + 1, 2 * m, 1, 4 * n),
        }
        return table[self.kind]


def homoclinic_integral(p: int, q: int, r: int, eps, spec: QuadSpec | None = None,
                        return_error: bool = False):
    """Surviving part of ``int a^p b^r e^{i q psi} dtau`` by tau quadrature.

    By parity only the real part survives for even ``r`` and only the
    imaginary part for odd ``r``; that part is returned as a float.
    """
    if p < 1 or q < 0 or r < 0:
        raise ValueError("need p >= 1, q >= 0, r >= 0")
    if eps <= 0:
        raise DomainError("eps must be positive")
    trig = np.cos if r % 2 == 0 else np.sin

    def f(t):
        a = homoclinic_a(t)
        return 2.0 * a ** p * homoclinic_b(t) ** r * trig(q * homoclinic_psi(t, eps))

    if spec is None:
        # tolerance relative to the L1 norm; the value itself may be far
        # below the rounding floor of the oscillatory sum
        l1 = quad_improper(lambda t: np.abs(f(t) if q == 0 else
                                            2.0 * homoclinic_a(t) ** p * homoclinic_b(t) ** r),
                           QuadSpec(abs_tol=1e-300, rel_tol=1e-8), interval=(0.0, None))[0]
        spec = QuadSpec(abs_tol=2e-15 * l1, rel_tol=1e-12)
    if q == 0:
        val, err = quad_improper(f, spec, interval=(0.0, None))
    else:
        def g(t, phi):
            return 2.0 * homoclinic_a(t) ** p * homoclinic_b(t) ** r * trig(phi)

        try:
            val, err = quad_improper(
                f, spec, interval=(0.0, None),
                frequency=lambda t: q * psi_prime(t, eps),
                envelope=lambda t: 2.0 * homoclinic_a(t) ** p * np.abs(homoclinic_b(t)) ** r,
                endpoint=_phase_endpoint(g, 0.0, eps, q))
        except PanelBudgetExceeded as exc:
            # the phase reaches ~eps^-3 e^{3 tau}; its rounding error swamps
            # exponentially small values once eps drops below ~0.4
            raise PanelBudgetExceeded(
                f"tau quadrature ill-conditioned at eps={eps}; use the z route ({exc})") from exc
    return (float(val), float(err)) if return_error else float(val)


TAU_ROUTE_MIN_EPS = 0.4


def elementary_integral(request: ElementaryIntegral, eps, method: str = "auto",
                        spec: QuadSpec | None = None) -> ElementaryIntegral:
    """Evaluate an :class:`ElementaryIntegral` and return it with ``value`` set.

    ``method="tau"`` integrates along the homoclinic time; ``method="z"``
    uses the shifted z-contour representation from the asymptotics module,
    which keeps full relative accuracy for small ``eps``; ``"auto"`` picks
    tau for ``eps >= TAU_ROUTE_MIN_EPS`` and z below.
    """
    p, q, r, wpow = request.exponents()
    if method == "auto":
        method = "tau" if eps >= TAU_ROUTE_MIN_EPS else "z"
    if method == "tau":
        raw = homoclinic_integral(p, q, r, eps, spec)
    elif method == "z":
        from .asymptotics import ZIntegralSpec, tau_to_z_value
        z = tau_to_z_value(ZIntegralSpec(p, q, r, eps, "shifted"))
        raw = z.real if r % 2 == 0 else z.imag
    else:
        raise ValueError("method must be 'tau', 'z' or 'auto'")
    return ElementaryIntegral(request.kind, request.n, request.m, eps ** wpow * raw)


# --------------------------------------------------------------------------
# series assembly

@dataclass
class FourierTable:
    """Truncated sine series ``D0 = sum odd[m] sin(2m+1)t + sum even[m] sin 2m t``.

    Attributes
    ----------
    odd : ndarray, shape (M+1,)
        Coefficients of ``sin((2m+1) theta0)``, ``m = 0..M``.
    even : ndarray, shape (M+1,)
        Coefficients of ``sin(2m theta0)``; ``even[0]`` is always zero.
    odd_tail, even_tail : ndarray
        Per-harmonic truncation estimates of the ``(k, l)`` sums.
    truncation : (M, K, L)
    eps : float
    convention, formula : str
    """

    odd: np.ndarray
    even: np.ndarray
    odd_tail: np.ndarray
    even_tail: np.ndarray
    truncation: tuple
    eps: float
    convention: str = "exact"
    formula: str = "corrected"
    integrals: dict = field(default_factory=dict, repr=False)

    def __call__(self, theta0):
        theta0 = np.asarray(theta0, dtype=float)
        out = np.zeros_like(theta0)
        for m, c in enumerate(self.odd):
            out = out + c * np.sin((2 * m + 1) * theta0)
        for m, c in enumerate(self.even):
            if m:
                out = out + c * np.sin(2 * m * theta0)
        return out

    def tail_estimate(self, theta0=None):
        """Bound on the truncation error, uniform in ``theta0`` if not given."""
        if theta0 is None:
            return float(np.sum(self.odd_tail) + np.sum(self.even_tail))
        theta0 = np.asarray(theta0, dtype=float)
        out = np.zeros_like(theta0)
        for m, c in enumerate(self.odd_tail):
            out = out + c * np.abs(np.sin((2 * m + 1) * theta0))
        for m, c in enumerate(self.even_tail):
            if m:
                out = out + c * np.abs(np.sin(2 * m * theta0))
        return out


def _shell_tail(shells):
    """Geometric tail estimate from the last two complete shells.

    A non-contracting ratio returns the last shell times the number of
    shells, a deliberately pessimistic answer.
    """
    shells = np.abs(np.asarray(shells, dtype=float))
    if shells.size < 2:
        return float(shells[-1]) if shells.size else 0.0
    last, prev = shells[-1], shells[-2]
    if prev > 0 and last < prev:
        r = last / prev
        return float(last * r / (1.0 - r))
    return float(last * shells.size)


def shell_order(m: int, K: int, L: int) -> int:
    """Largest total order ``n = k + l`` whose shell is complete under the caps.

    Shell ``n`` of harmonic ``m`` holds the pairs ``(k, n - k)`` with
    ``max(m, 1) <= k <= n``.  Truncating a shell part way breaks the strong
    cancellation between its members, so only complete shells are kept.
    """
    return min(K, L + max(m, 1))


def fourier_series_D0(eps, truncation=(3, 6, 6), convention: str = "exact",
                      formula: str = "corrected", method: str = "auto",
                      spec: QuadSpec | None = None) -> FourierTable:
    """Sine coefficients of ``D0`` assembled from the exact series.

    Parameters
    ----------
    eps : float
    truncation : (M, K, L)
        Caps on the harmonic index ``m``, the order ``k`` and the order
        ``l``.  Within the caps only complete shells ``k + l = n`` are
        summed (see :func:`shell_order`).
    convention : {"exact", "closed_form"}
    formula : {"corrected", "closed_form"}
        Only ``"corrected"`` reproduces :func:`D0_direct`.
    method : {"auto", "tau", "z"}
        Route for the elementary integrals.
    spec : QuadSpec, optional
        Passed to the tau route.

    Returns
    -------
    FourierTable
        The per-harmonic tails extrapolate the last two shells geometrically;
        harmonics beyond ``M`` are extrapolated from the last two odd ones.
    """
    _check_convention(convention)
    _check_eps(eps)
    M, K, L = truncation
    if K < 1 or L < 0 or M < 0 or K < M:
        raise ValueError("truncation needs K >= max(M, 1), L >= 0")
    cache = {}

    def ev(kind, n, m):
        key = (kind, n, m)
        if key not in cache:
            cache[key] = elementary_integral(ElementaryIntegral(kind, n, m), eps, method, spec).value
        return cache[key]

    pref_i = -SQRT2 / (2.0 * eps ** 1.5)
    pref_j = _J_SIGN[convention] / (2.0 * eps ** 3.5)
    odd = np.zeros(M + 1)
    even = np.zeros(M + 1)
    odd_tail = np.zeros(M + 1)
    even_tail = np.zeros(M + 1)
    for m in range(M + 1):
        k0 = max(m, 1)
        N = shell_order(m, K, L)
        sh_odd = np.zeros(N - k0 + 1)
        sh_even = np.zeros(N - k0 + 1)
        for n in range(k0, N + 1):
            for k in range(k0, n + 1):
                c = series_coefficients(m, k, n - k, formula, convention)
                t = pref_i * float(c.C2) * ev("I2_odd", n, m)
                if c.C1:
                    t -= pref_i * float(c.C1) * ev("I1_odd", n, m)
                t += pref_j * float(c.calC) * ev("J_odd", n, m)
                sh_odd[n - k0] += t
                if m >= 1:
                    t = -pref_i * float(c.E2) * ev("I2_even", n, m)
                    if c.E1:
                        t += pref_i * float(c.E1) * ev("I1_even", n, m)
                    t += pref_j * float(c.calE) * ev("J_even", n, m)
                    sh_even[n - k0] += t
        odd[m] = sh_odd.sum()
        odd_tail[m] = _shell_tail(sh_odd)
        if m >= 1:
            even[m] = sh_even.sum()
            even_tail[m] = _shell_tail(sh_even)
    if M >= 1 and abs(odd[M - 1]) > 0:
        r = abs(odd[M] / odd[M - 1])
        if r < 1:
            odd_tail[M] += (abs(odd[M]) + abs(even[M])) * r / (1 - r)
    return FourierTable(odd, even, odd_tail, even_tail, (M, K, L), float(eps),
                        convention, formula, cache)
