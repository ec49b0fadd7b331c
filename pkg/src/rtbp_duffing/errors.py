"""Exception types raised by the numerical routines."""


class RtbpError(Exception):
    """Base class for all errors raised by this package."""


class CollisionError(RtbpError):
    """A primary-to-body distance fell below the collision floor."""


class NoConvergence(RtbpError):
    """An inner iterative solve did not reach its tolerance."""


class DomainError(RtbpError):
    """An argument lies outside the domain where a formula is valid."""


class StepSizeUnderflow(RtbpError):
    """The adaptive integrator could not take an acceptable step."""


class PanelBudgetExceeded(RtbpError):
    """Adaptive quadrature ran out of panels before meeting its tolerance."""


class NoSignChange(RtbpError):
    """A root bracket does not contain a sign change."""


class DomainEscape(RtbpError):
    """A Picard iterate left the box [-1, 1]^2 for the scaled variables."""


class MaxIterExceeded(RtbpError):
    """An outer iteration hit its iteration cap before converging."""
