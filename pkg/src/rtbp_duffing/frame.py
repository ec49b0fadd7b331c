"""Unperturbed homoclinic orbit and the canonical frame built on it.

The orbit of ``X' = Y, Y' = X - X^3`` through ``(sqrt2, 0)`` is

    a(t) = sqrt2 sech t,   b(t) = a'(t) = -sqrt2 tanh t sech t,

and the angle advances by ``psi(t) = 2 atan(sinh t) - (sinh^3 t + 3 sinh t)/(6 eps^3)``.
The pair of functions ``H, Htilde`` built from ``h`` turns the variational
equations into a diagonal system for the coordinates ``(M, W)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SQRT2 = np.sqrt(2.0)
A_FLOOR = 1e-300


@dataclass
class FrameSample:
    """Frame functions sampled at ``tau`` (arrays broadcast with ``tau``).

    Attributes
    ----------
    tau, a, b, bprime, psi, h, H, Htilde : ndarray
    eps : float
    """

    tau: np.ndarray
    a: np.ndarray
    b: np.ndarray
    bprime: np.ndarray
    psi: np.ndarray
    h: np.ndarray
    H: np.ndarray
    Htilde: np.ndarray
    eps: float

    @property
    def b_over_a(self):
        return -np.tanh(self.tau)

    @property
    def dpsi(self):
        return psi_prime(self.tau, self.eps)


def homoclinic_a(tau):
    with np.errstate(over="ignore"):
        return SQRT2 / np.cosh(tau)


def homoclinic_b(tau):
    return -SQRT2 * np.tanh(tau) / np.cosh(tau)


def homoclinic_psi(tau, eps):
    """Phase of the unperturbed angle along the homoclinic orbit."""
    s = np.sinh(tau)
    return 2.0 * np.arctan(s) - (s ** 3 + 3.0 * s) / (6.0 * eps ** 3)


def psi_prime(tau, eps):
    a = homoclinic_a(tau)
    return SQRT2 * (a - 1.0 / (eps ** 3 * a ** 3))


def frame_h(tau):
    """``h = 3 (e^{2t} - e^{-2t} + 4t) / (2 (e^t + e^{-t})^2)``, overflow free."""
    with np.errstate(over="ignore"):
        sech = 1.0 / np.cosh(tau)
    return 1.5 * (np.tanh(tau) + tau * sech * sech)


def eval_frame(tau, eps: float) -> FrameSample:
    """Evaluate the homoclinic frame at ``tau``.

    Parameters
    ----------
    tau : float or ndarray
    eps : float
        Perturbation parameter; must be positive since ``psi`` carries
        ``eps**-3``.

    Returns
    -------
    FrameSample
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    tau = np.asarray(tau, dtype=float)
    a = homoclinic_a(tau)
    th = np.tanh(tau)
    b = -th * a
    bprime = a - a ** 3
    h = frame_h(tau)
    # H = (b h + a)/a and Htilde = (b' h + 2 b)/a with b/a = -tanh, b'/a = 1 - a^2
    H = 1.0 - th * h
    Htilde = (1.0 - a * a) * h - 2.0 * th
    return FrameSample(tau, a, b, bprime, homoclinic_psi(tau, eps), h, H, Htilde, eps)


def _check_a(frame: FrameSample):
    if np.any(np.abs(frame.a) < A_FLOOR):
        raise DomainError("a(tau) underflows; frame map is singular")


def mw_from_xy(x, y, frame: FrameSample):
    """``M = (b' x - b y)/a`` and ``W = Htilde x - H y``."""
    _check_a(frame)
    M = (frame.bprime * x - frame.b * y) / frame.a
    W = frame.Htilde * x - frame.H * y
    return M, W


def xy_from_mw(M, W, frame: FrameSample):
    """Inverse of :func:`mw_from_xy`: ``x = (b W - a H M)/a``, ``y = (b' W - a Htilde M)/a``."""
    _check_a(frame)
    x = (frame.b * W) / frame.a - frame.H * M
    y = (frame.bprime * W) / frame.a - frame.Htilde * M
    return x, y


def scale_mw(M, W, frame: FrameSample, eps: float):
    """Rescale ``(M, W)`` by ``eps^3 sqrt(eps) a``."""
    _check_a(frame)
    s = eps ** 3.5 * frame.a
    return M / s, W / s


def unscale_mw(mM, mW, frame: FrameSample, eps: float):
    """Inverse of :func:`scale_mw`."""
    s = eps ** 3.5 * frame.a
    return mM * s, mW * s
