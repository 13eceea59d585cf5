"""Exception hierarchy."""

from __future__ import annotations


class ThermomechError(Exception):
    """Base class for all library errors."""


class DimensionError(ThermomechError, ValueError):
    pass


class DomainError(ThermomechError, ValueError):
    """A point lies outside the domain of a state equation or potential."""


class ConstraintRankError(ThermomechError):
    """Constraint Jacobian is rank deficient at the queried point."""


class InconsistentJetError(ThermomechError):
    """A jet's Euler-Lagrange residual is not a constraint force."""

    def __init__(self, message: str, fit_residual: float):
        super().__init__(message)
        self.fit_residual = fit_residual


class ResonanceError(ThermomechError, ValueError):
    pass


class TurningPointError(ThermomechError, ValueError):
    pass


class IntegrationError(ThermomechError):
    pass


class GuardViolation(IntegrationError):
    def __init__(self, guard: str, t: float, state):
        super().__init__(f"guard {guard!r} violated at t={t:.17g}, "
                         f"state={[float(v) for v in state]}")
        self.guard = guard
        self.t = t
        self.state = state


class StepLimitExceeded(IntegrationError):
    pass
