"""Exception types shared across the toolkit."""

from __future__ import annotations


class IfedError(Exception):
    """Base class for all toolkit errors."""


class MeshQualityError(IfedError):
    """Degenerate or inverted element detected in the reference configuration."""


class UnsupportedConfigurationError(IfedError):
    """Requested quadrature order or option combination is not available."""


class RefinementCapError(IfedError):
    """Adaptive quadrature exceeded its point-count cap on some element."""


class InvertedElementError(IfedError):
    """det F <= 0 at a quadrature point of the named element."""

    def __init__(self, element_id: int, det: float):
        self.element_id = element_id
        self.det = det
        super().__init__(f"element {element_id} inverted (det F = {det:.3e})")


class OutOfDomainError(IfedError):
    """A coupling point's kernel support crosses the usable grid region."""

    def __init__(self, point, message: str = ""):
        self.point = tuple(float(c) for c in point)
        super().__init__(
            message or f"interaction point {self.point} too close to the domain boundary"
        )


class SolverError(IfedError):
    """Iterative solver failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None, iterations: int | None = None):
        self.residual = residual
        self.iterations = iterations
        detail = message
        if residual is not None:
            detail += f" (residual {residual:.3e}"
            if iterations is not None:
                detail += f" after {iterations} iterations"
            detail += ")"
        super().__init__(detail)


class BlowUpError(IfedError):
    """NaN/Inf detected in the state during time stepping."""

    def __init__(self, step: int, what: str):
        self.step = step
        super().__init__(f"non-finite values in {what} at step {step}")
