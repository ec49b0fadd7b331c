"""z-domain representation of homoclinic integrals and their leading terms.

With ``s = sinh(tau)`` and ``2 z = y^3 + 12 y``, ``y = 2 s``, the phase
``psi`` becomes linear in ``z``, so for odd ``p``

    int a^p b^r e^{i q psi} dtau
        = (2/3) (2 sqrt2)^{p+r} (-1)^{r+q} I_{1+q+c, 1-q+c, r}(q/(24 eps^3)),
    c = (p + 2 r + 1)/2,

where ``I_{m,n,r}(k) = int e^{-i k z} y^r (y+2i)^-m (y-2i)^-n dz``.  The map
``z -> y`` has branch points at ``z = +-8i`` (``y = +-2i``) with cuts along
the imaginary axis away from the origin, so the contour can be pushed down
to ``Im z = -(8 - delta)`` where ``e^{-ikz}`` supplies the exponential
factor ``e^{-k(8-delta)}`` explicitly.  Watson's lemma at ``z = -8i`` gives
the leading term of ``I_{m,n,r}(k)`` as ``k -> inf``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gamma, pi, sqrt

import numpy as np

from .errors import DomainError
from .frame import SQRT2
from .numerics import QuadSpec, periodic_tail, quad_improper, quad_interval

__all__ = [
    "ZIntegralSpec",
    "y_of_z",
    "y_complex",
    "script_I",
    "script_I_asymptotic",
    "tau_to_z_value",
    "elementary_asymptotic",
    "leading_splitting",
    "leading_scale",
    "assembled_leading_constant",
    "CLOSED_FORM_LEADING_CONSTANT",
    "cubic_phase_integral",
    "cubic_phase_asymptotic",
]

BRANCH = 8.0
CLOSED_FORM_LEADING_CONSTANT = Fraction(-37, 20)


def y_of_z(z):
    """Real inverse of ``2 z = y^3 + 12 y``.

    Uses ``A = cbrt(sqrt(z^2+64) + |z|)`` and ``y = sign(z) (A - 4/A)``,
    which is the closed form written without cancellation.
    """
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    A = np.cbrt(np.sqrt(az * az + 64.0) + az)
    return np.sign(z) * (A - 4.0 / A)


def y_complex(z):
    """Continuation of :func:`y_of_z` to the plane cut along ``|Im z| >= 8``, ``Re z = 0``.

    Principal branches of ``sqrt(z^2+64)`` and of the cube root are
    continuous there; one Newton step on the cubic polishes the result.
    """
    z = np.asarray(z, dtype=complex)
    S = np.sqrt(z * z + 64.0)
    plus = z + S
    minus = S - z
    # pick the larger of z+S and 64/(S-z) (equal in exact arithmetic)
    cube = np.where(np.abs(plus) >= np.abs(minus), plus, 64.0 / minus)
    A = cube ** (1.0 / 3.0)
    y = A - 4.0 / A
    y = y - (y ** 3 + 12.0 * y - 2.0 * z) / (3.0 * y * y + 12.0)
    return y


def _log_up(w):
    # log with the cut along the negative imaginary axis: arg in (-pi/2, 3pi/2)
    return np.log(-1j * w) + 0.5j * pi


def _log_down(w):
    # log with the cut along the positive imaginary axis: arg in (-3pi/2, pi/2)
    return np.log(1j * w) - 0.5j * pi


def _kernel(y, m, n, r, w=None):
    """``y^r (y+2i)^-m (y-2i)^-n`` continued from the real axis.

    ``w = y + 2i`` may be passed separately when it is known to better
    relative accuracy than ``y`` (near the branch point ``y = -2i``).
    """
    if w is None:
        w = y + 2j
    out = np.exp(-m * _log_up(w) - n * _log_down(w - 4j))
    return out * (w - 2j) ** r if r else out


def _w_lower(zeta, w):
    """Polish ``w = y + 2i`` from ``2 (z + 8i) = w^2 (w - 6i)``, ``zeta = z + 8i``.

    Near ``z = -8i`` the root ``y`` is double, so ``y + 2i`` formed from
    ``y`` loses half its digits; this form has no cancellation.
    """
    for _ in range(3):
        w = w - (w * w * (w - 6j) - 2.0 * zeta) / (w * (3.0 * w - 12j))
    return w


@dataclass(frozen=True)
class ZIntegralSpec:
    """Request for ``int a^p b^r e^{i q psi} dtau`` through the z-domain.

    Attributes
    ----------
    p, q, r : int
        ``p, q >= 1`` and ``r >= 0``.
    eps : float
    path : {"shifted", "direct"}
        ``"shifted"`` integrates along ``Im z ~ -(8 - delta)``;
        ``"direct"`` along the real axis.
    """

    p: int
    q: int
    r: int
    eps: float
    path: str = "shifted"

    def __post_init__(self):
        if self.p < 1 or self.q < 1 or self.r < 0:
            raise ValueError("need p, q >= 1 and r >= 0")
        if self.eps <= 0:
            raise DomainError("eps must be positive")
        if self.path not in ("shifted", "direct"):
            raise ValueError("path must be 'shifted' or 'direct'")


def _shifted(k, m, n, r, delta, spec):
    # z = x - i (c + alpha (sqrt(x^2+1) - 1)), x = delta sinh(u)
    c = BRANCH - delta
    alpha = 1.0

    def f(u):
        x = delta * np.sinh(u)
        root = np.sqrt(x * x + 1.0)
        # x^2/(root+1) is root-1 without cancellation
        lift = alpha * x * x / (root + 1.0)
        z = x - 1j * (c + lift)
        zeta = x + 1j * (delta - lift)
        w = _w_lower(zeta, y_complex(z) + 2j)
        dz = (1.0 - 1j * alpha * x / root) * delta * np.cosh(u)
        # e^{-ikz} with the constant factor e^{-kc} pulled out
        return np.exp(-1j * k * x - k * lift) * _kernel(None, m, n, r, w) * dz

    # e^{-k alpha |x|} below 1e-17 relative, or algebraic decay if k is tiny
    x_max = 40.0 / (k * alpha) + 200.0
    u_max = float(np.arcsinh(x_max / delta))
    val, err = quad_interval(f, -u_max, u_max, spec,
                             frequency=lambda u: k * delta * np.cosh(u) + 1.0)
    scale = np.exp(-k * c)
    return complex(val) * scale, float(err) * scale


def _direct(k, m, n, r, spec):
    # real axis, z = 8 sinh(u); tails by integration by parts
    parts = []
    for take in (np.real, np.imag):
        def g(u, phi, take=take):
            z = BRANCH * np.sinh(u)
            amp = _kernel(y_complex(z), m, n, r) * BRANCH * np.cosh(u)
            return take(amp * np.exp(-1j * phi))

        def f(u, g=g):
            return g(u, k * BRANCH * np.sinh(u))

        def endpoint(lo, hi, g=g):
            out = 0.0
            for t in (lo, hi):
                if t is not None and t != 0:
                    out += periodic_tail(g, t, k * BRANCH * np.sinh(t), k * BRANCH * np.cosh(t))
            return out

        def envelope(u):
            z = BRANCH * np.sinh(u)
            return np.abs(_kernel(y_complex(z), m, n, r)) * BRANCH * np.cosh(u)

        val, err = quad_improper(f, spec, frequency=lambda u: k * BRANCH * np.cosh(u),
                                 envelope=envelope, endpoint=endpoint)
        parts.append((val, err))
    return complex(parts[0][0], parts[1][0]), parts[0][1] + parts[1][1]


def script_I(m, n, r, k, path: str = "shifted", delta: float | None = None,
             spec: QuadSpec | None = None, return_error: bool = False):
    """``I_{m,n,r}(k) = int e^{-ikz} y^r (y+2i)^-m (y-2i)^-n dz`` by quadrature.

    Parameters
    ----------
    m, n : real
        Exponents; half integers are allowed (the kernel is continued with
        logarithms whose cuts avoid the contour).
    r : int
    k : float
        Positive frequency.
    path : {"shifted", "direct"}
        ``"direct"`` runs along the real axis as an independent check; the
        integrand decays only like ``|z|^{-(m+n)/3}`` there, so it is slow
        for small ``m + n`` (tens of seconds at ``m + n = 6``).
    delta : float, optional
        Distance of the shifted contour from the branch point; default
        ``min(0.5, 2/k)`` so that the cancellation factor ``e^{k delta}``
        stays below ``e^2``.
    """
    if k <= 0:
        raise DomainError("k must be positive")
    if path == "shifted":
        if delta is None:
            delta = min(0.5, 2.0 / k)
        spec = spec or QuadSpec(abs_tol=1e-300, rel_tol=1e-12, h_max=0.1)
        val, err = _shifted(k, m, n, r, delta, spec)
    elif path == "direct":
        spec = spec or QuadSpec(abs_tol=1e-15, rel_tol=1e-12)
        val, err = _direct(k, m, n, r, spec)
    else:
        raise ValueError("path must be 'shifted' or 'direct'")
    return (val, err) if return_error else val


def tau_to_z_value(spec: ZIntegralSpec, quad: QuadSpec | None = None) -> complex:
    """``int a^p b^r e^{i q psi} dtau`` evaluated through the z-integral."""
    c = Fraction(spec.p + 2 * spec.r + 1, 2)
    m = float(1 + spec.q + c)
    n = float(1 - spec.q + c)
    k = spec.q / (24.0 * spec.eps ** 3)
    pref = (2.0 / 3.0) * (2.0 * SQRT2) ** (spec.p + spec.r) * (-1.0) ** (spec.r + spec.q)
    return pref * script_I(m, n, spec.r, k, spec.path, spec=quad)


def script_I_asymptotic(m: int, n: int, r: int, k) -> complex:
    """Watson leading term ``i^{3(r-n)-m} 2^{r-2n+1} 3^{m/2} pi/Gamma(m/2) e^{-8k} k^{(m-2)/2}``.

    Raises
    ------
    DomainError
        For ``m <= 0`` where ``1/Gamma(m/2)`` has no branch-point content.
    """
    if m <= 0:
        raise DomainError("m must be positive")
    if k <= 0:
        raise DomainError("k must be positive")
    phase = 1j ** ((3 * (r - n) - m) % 4)
    return (phase * 2.0 ** (r - 2 * n + 1) * 3.0 ** (m / 2.0) * pi / gamma(m / 2.0)
            * np.exp(-8.0 * k) * k ** ((m - 2) / 2.0))


def _elementary_exponents(kind, n, m):
    # (p, q, r, eps power, Re/Im) as in the elementary integral definitions
    table = {
        "I1_odd": (4 * n + 3, 2 * m + 1, 0, 4 * n),
        "I2_odd": (4 * n + 5, 2 * m + 1, 0, 4 * n),
        "I1_even": (4 * n + 1, 2 * m, 0, 4 * n - 2),
        "I2_even": (4 * n + 3, 2 * m, 0, 4 * n - 2),
        "J_odd": (4 * n + 3, 2 * m + 1, 1, 4 * n + 2),
        "J_even": (4 * n + 1, 2 * m, 1, 4 * n),
    }
    if kind not in table:
        raise ValueError(f"unknown kind {kind!r}")
    return table[kind]


def elementary_asymptotic(kind: str, n: int, m: int, eps) -> float:
    """Leading term of an elementary integral from the Watson formula.

    ``kind`` is one of ``I1_odd, I2_odd, I1_even, I2_even, J_odd, J_even``;
    the result is the surviving real (``I``) or imaginary (``J``) part
    including the ``eps`` weight.
    """
    p, q, r, wpow = _elementary_exponents(kind, n, m)
    if q < 1:
        raise DomainError("harmonic must be positive")
    c = (p + 2 * r + 1) // 2
    mm, nn = 1 + q + c, 1 - q + c
    k = q / (24.0 * eps ** 3)
    pref = (2.0 / 3.0) * (2.0 * SQRT2) ** (p + r) * (-1.0) ** (r + q)
    val = pref * script_I_asymptotic(mm, nn, r, k) * eps ** wpow
    return float(val.real if r % 2 == 0 else val.imag)


def leading_scale(eps):
    """``sqrt(pi/2) eps^-5 e^{-1/(3 eps^3)}``, the natural unit of ``D0``."""
    return sqrt(pi / 2.0) * eps ** -5 * np.exp(-1.0 / (3.0 * eps ** 3))


def leading_splitting(theta0, eps):
    """Closed-form leading term ``-(37/20) sqrt(pi/2) eps^-5 e^{-1/(3 eps^3)} sin(theta0)``."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    return float(CLOSED_FORM_LEADING_CONSTANT) * leading_scale(eps) * np.sin(theta0)


def assembled_leading_constant(formula: str = "closed_form", convention: str = "closed_form") -> Fraction:
    """Leading constant of ``D0`` in units of :func:`leading_scale`.

    Combines ``C2_{0,1,0}`` and ``calC_{0,1,0}`` with the Watson constants
    of the two dominant elementary integrals,
    ``I2_{1,0,odd} ~ (2 sqrt2/15) sqrt(pi/2) eps^-7/2 e^{...}`` and
    ``J_{1,0,odd} ~ (2/15) sqrt(pi/2) eps^-3/2 e^{...}``.  The radicals
    cancel (``sqrt2 * 2 sqrt2 = 4``) so the result is rational.

    ``("closed_form", "closed_form")`` gives -37/20; the corrected coefficients give
    1/40 with the closed-form sign convention and -1/8 with the exact one.
    """
    from .melnikov import _J_SIGN, series_coefficients
    c = series_coefficients(0, 1, 0, formula, convention)
    i_part = -Fraction(1, 2) * c.C2 * Fraction(4, 15)
    j_part = _J_SIGN[convention] * Fraction(1, 2) * c.calC * Fraction(2, 15)
    return i_part + j_part


# --------------------------------------------------------------------------
# the two polynomial-phase integrals used as Watson checks

_CUBIC_PHASE = {
    # which: (phase divisor, pole orders (z+i), (z-i), prefactor, (m, n), k-scale)
    1: (1.0, 4, 0, Fraction(16, 3), (5, 1), 12.0),
    2: (2.0, 4, 2, Fraction(64, 3), (5, 3), 24.0),
}


def cubic_phase_asymptotic(which: int, eps) -> float:
    """Stated leading values of the two polynomial-phase integrals.

    ``which=1``: ``(4 sqrt(pi)/3) eps^-9/2 e^{-2/(3 eps^3)}``;
    ``which=2``: ``-(sqrt(2 pi)/12) eps^-9/2 e^{-1/(3 eps^3)}``.
    """
    if which == 1:
        return 4.0 * sqrt(pi) / 3.0 * eps ** -4.5 * np.exp(-2.0 / (3.0 * eps ** 3))
    if which == 2:
        return -sqrt(2.0 * pi) / 12.0 * eps ** -4.5 * np.exp(-1.0 / (3.0 * eps ** 3))
    raise ValueError("which must be 1 or 2")


def cubic_phase_integral(which: int, eps, route: str = "z"):
    """The polynomial-phase integrals ``int e^{-i(z^3/3+z)/(d eps^3)} (z+i)^-4 (z-i)^-j dz``.

    ``which=1`` has ``d = 1, j = 0``; ``which=2`` has ``d = 2, j = 2``.

    ``route="z"`` uses the prefactor times ``I_{m,n,0}(k)`` on the shifted
    contour.  ``route="tau"`` substitutes ``z = sinh(tau)``, under which
    ``(z+i)^-4 = e^{4i atan z} (a^2/2)^2`` and the integrals become
    ``(sqrt2/4) int a^3 e^{2 i psi}`` and ``-(sqrt2/8) int a^5 e^{i psi}``,
    evaluated by tau quadrature.  Both return the real part; the imaginary
    part vanishes by symmetry.
    """
    _, _, _, pref, (m, n), kscale = _CUBIC_PHASE[which]
    if route == "z":
        k = 1.0 / (kscale * eps ** 3)
        return float(pref) * script_I(m, n, 0, k).real
    if route != "tau":
        raise ValueError("route must be 'z' or 'tau'")
    from .melnikov import homoclinic_integral
    if which == 1:
        return SQRT2 / 4.0 * homoclinic_integral(3, 2, 0, eps)
    return -SQRT2 / 8.0 * homoclinic_integral(5, 1, 0, eps)
