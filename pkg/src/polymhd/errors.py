"""Exception types shared across the toolkit."""


class PolymhdError(Exception):
    """Base class for all toolkit errors."""


class StepLimitExceeded(PolymhdError):
    """Adaptive integrator ran out of steps before reaching the end point."""


class NonFiniteRhs(PolymhdError):
    """Right-hand side returned NaN/Inf (usually a coefficient singularity)."""


class NoConvergence(PolymhdError):
    """Newton iteration failed to reach the requested tolerance.

    Carries the best iterate and diagnostics so callers can report or retry.
    """

    def __init__(self, message, best=None, residual_norm=None, iterations=None):
        super().__init__(message)
        self.best = best
        self.residual_norm = residual_norm
        self.iterations = iterations


class SingularJacobian(PolymhdError):
    """Finite-difference Jacobian was numerically singular."""


class ToleranceNotMet(PolymhdError):
    """Adaptive quadrature could not meet the requested tolerance."""


class ZeroOnContour(PolymhdError):
    """Winding-number contour passes too close to a zero of the function."""


class NonPositiveTemperature(PolymhdError):
    """Rheological coefficients requested at Z <= 0."""


class ClosureNoConvergence(NoConvergence):
    """The 2x2 algebraic stress closure did not converge."""


class ClosureBranchLoss(PolymhdError):
    """Closure root drifted off the physical branch that vanishes with a12."""


class ShootingNoConvergence(NoConvergence):
    """Base-state shooting Newton did not converge."""


class NegativeTemperature(PolymhdError):
    """Temperature profile left the admissible Z > 0 range during a solve."""


class ContinuousSpectrumPoint(PolymhdError):
    """lambda is at/near a singularity of the algebraic stress elimination."""


class StiffnessOverflow(PolymhdError):
    """Linear-solution basis overflowed despite QR renormalization."""


class UncertifiedRoots(PolymhdError):
    """Winding total over the search region disagrees with the root count."""

    def __init__(self, message, winding_total=None, found=None):
        super().__init__(message)
        self.winding_total = winding_total
        self.found = found


class DegenerateProfile(PolymhdError):
    """Z * alpha_2 <= 0 somewhere, so the characteristic rates degenerate."""


class PairingAmbiguous(PolymhdError):
    """Two numerical eigenvalues are nearest to the same asymptotic seed."""
