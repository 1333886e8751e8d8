"""
Error Types

Every failure the workbench can raise derives from WorkbenchError.
Verification suites never raise for a failed property; they return a
VerificationReport with witnesses instead.
"""
from typing import Any, Optional


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class NotInvertible(WorkbenchError, ArithmeticError):
    """Raised when inverting a non-unit of a ring."""


class RingMismatch(WorkbenchError, TypeError):
    """Raised when operands live in different rings."""


class ArityMismatch(WorkbenchError, ValueError):
    """Raised when a point or map has the wrong number of components."""


class SizeLimit(WorkbenchError):
    """Raised when a symbolic result exceeds the configured monomial cap."""


class DomainError(WorkbenchError, ValueError):
    """Raised when an evaluation point leaves the declared domain."""


class NonFinite(WorkbenchError, ArithmeticError):
    """Raised when an evaluator returns NaN or infinity."""


class NoConvergence(WorkbenchError):
    """
    Raised when an iterative or extrapolating procedure fails to converge.

    Args:
        message: Human readable description
        level: Differentiation order or refinement level that failed
        estimate: Last value or estimate reached, when one exists
    """

    def __init__(self, message: str, level: Optional[int] = None,
                 estimate: Optional[Any] = None):
        super().__init__(message)
        self.level = level
        self.estimate = estimate


class NotDifferentiable(WorkbenchError):
    """Raised when one-sided difference quotients do not approach each other."""

    def __init__(self, message: str, gap: Optional[float] = None):
        super().__init__(message)
        self.gap = gap


class PartitionMismatch(WorkbenchError, ValueError):
    """Raised when a tagged partition does not span the curve's interval."""


class OrderUnsupported(WorkbenchError, ValueError):
    """Raised for derivative orders beyond the supported stencils."""


class LipschitzViolated(WorkbenchError):
    """Raised when a sampled Lipschitz bound exceeds the contraction constant."""


class SingularCoefficient(WorkbenchError):
    """Raised when the coefficient of an implicit ODE vanishes."""


class ResidualTooLarge(WorkbenchError):
    """Raised when an a posteriori residual check fails."""


class DegenerateConfig(WorkbenchError, ValueError):
    """Raised when a demonstration is configured so that it proves nothing."""


class DegreeCapExceeded(WorkbenchError):
    """Raised when a finite field has too few nonzero nodes for interpolation."""


class ExprSyntaxError(WorkbenchError, ValueError):
    """
    Raised by the expression parser.

    Args:
        message: Description of the problem
        position: 1-based character position where parsing failed
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownFunction(WorkbenchError, ValueError):
    """Raised when an expression calls a function the parser does not know."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown function '{name}' at position {position}")
        self.name = name
        self.position = position


class UsageError(WorkbenchError, ValueError):
    """Raised for invalid command-line usage."""
