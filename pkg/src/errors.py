"""
Exception hierarchy for the analysis pipeline and its mapping onto CLI exit codes.
"""

from typing import Optional

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INCONSISTENT = 2
EXIT_NONCONVERGENCE = 3


class PhaseError(Exception):
    """Base class for every error raised by the package."""

    exit_code = EXIT_INPUT


class PhaseInputError(PhaseError, ValueError):
    """The phase or a parameter violates a precondition of an operation."""


class PolynomialSyntaxError(PhaseInputError):
    """
    Raised by the polynomial parser.

    Attributes:
        position (int): zero-based character offset of the offending token.
    """

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class DomainError(PhaseError, ValueError):
    """An evaluator was called where it is undefined (e.g. on a coordinate hyperplane)."""


class GeometryError(PhaseError):
    """Invalid Newton-polyhedron input, such as an empty support."""


class FitError(PhaseError):
    """A power-law or decay fit cannot be computed from the given points."""

    exit_code = EXIT_NONCONVERGENCE


class SamplingError(PhaseError):
    """Too many sample points fell outside the evaluator's domain."""

    exit_code = EXIT_NONCONVERGENCE


class ConvergenceError(PhaseError):
    """Quadrature left too many ladder samples unconverged."""

    exit_code = EXIT_NONCONVERGENCE


class ReportIOError(PhaseError, OSError):
    """Writing a report failed; the message names the path."""
