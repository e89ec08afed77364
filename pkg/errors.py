"""
Exception hierarchy for the Lagrangian product toolkit.

Every error derives from ToolkitError, itself a ValueError, so callers can
catch the whole family with ``except ValueError``.
"""

from typing import Optional


class ToolkitError(ValueError):
    """Base class for all toolkit errors."""


class ContractViolationError(ToolkitError):
    """Operands violate a structural contract (e.g. dimension mismatch)."""


class DegenerateInputError(ToolkitError):
    """Input too close to zero for the requested operation."""


class SingularEvaluationError(ToolkitError):
    """A jet primitive was evaluated outside its domain."""

    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: {message}")
        self.operation = operation


class OutOfDomainError(ToolkitError):
    """Parameter point outside a chart's domain or a profile's interval."""


class RankDeficiencyError(ToolkitError):
    """Coordinate tangents are (numerically) linearly dependent."""


class NotLagrangianError(ToolkitError):
    """A chart fails the horizontal / C-totally-real precondition."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class ParameterError(ToolkitError):
    """Construction parameters violate their constraints."""


class InadmissibleProfileError(ToolkitError):
    """Profile functions cannot produce the requested curve."""


class NullCaseError(InadmissibleProfileError):
    """Profile has u = 0; the null-warp construction must be used."""


class WrongCaseError(InadmissibleProfileError):
    """Profile's sign of u does not match the requested case."""


class ExcludedLocusError(ToolkitError):
    """Evaluation at a point where lambda1 = 2 lambda2."""


class ConstructionError(ToolkitError):
    """Factors and curve cannot be assembled into a product chart."""


class PreconditionError(ToolkitError):
    """A theorem precondition failed; carries the measured quantity."""

    def __init__(self, message: str, measured: Optional[float] = None):
        super().__init__(message)
        self.measured = measured


class InvalidPsi3Error(ToolkitError):
    """Flat factor of the null-warp construction is not Lagrangian."""


class EvaluationError(ToolkitError):
    """Numerical evaluation hit a vanishing denominator."""


class ExprSyntaxError(ToolkitError):
    """Expression text does not parse; carries the byte offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    """Expression references a name that is neither t, pi nor a function."""


class ConfigError(ToolkitError):
    """Run configuration is malformed or violates a constraint."""
