"""Restricted three-body problem as a perturbed Duffing oscillator.

Modules
-------
core_model
    Equations of motion, coordinate changes and the implicit Jacobi root.
frame
    Homoclinic orbit of the unperturbed oscillator and its canonical frame.
numerics
    ODE integration, oscillatory quadrature, Fourier projection, roots.
manifold
    Picard iteration for the primary stable/unstable solutions.
melnikov
    First-order splitting function, direct and by exact series.
asymptotics
    z-domain integrals and Watson-lemma leading terms.
verify
    Verification suites used by the CLI and the acceptance tests.
cli
    Batch command line front end.
"""

from .core_model import ParamSet
from .errors import RtbpError

__version__ = "0.1.0"

__all__ = ["ParamSet", "RtbpError", "__version__"]
