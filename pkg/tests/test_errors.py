import pytest

from src.errors import (
    EXIT_INPUT,
    EXIT_NONCONVERGENCE,
    ConvergenceError,
    DomainError,
    FitError,
    GeometryError,
    PhaseError,
    PhaseInputError,
    PolynomialSyntaxError,
    ReportIOError,
    SamplingError,
)
from src.polynomial import parse_polynomial


class TestErrorHierarchy:
    """Test cases for the exception classes and their exit codes."""

    @pytest.mark.parametrize(
        "error, code",
        [
            (PhaseInputError, EXIT_INPUT),
            (PolynomialSyntaxError, EXIT_INPUT),
            (DomainError, EXIT_INPUT),
            (GeometryError, EXIT_INPUT),
            (ReportIOError, EXIT_INPUT),
            (FitError, EXIT_NONCONVERGENCE),
            (SamplingError, EXIT_NONCONVERGENCE),
            (ConvergenceError, EXIT_NONCONVERGENCE),
        ],
    )
    def test_exit_codes(self, error, code):
        """Test the exit code carried by each error."""
        assert issubclass(error, PhaseError)
        assert error("message").exit_code == code

    def test_builtin_bases(self):
        """Test that input errors are ValueErrors and report errors are OSErrors."""
        assert issubclass(PhaseInputError, ValueError)
        assert issubclass(DomainError, ValueError)
        assert issubclass(ReportIOError, OSError)

    def test_syntax_position(self):
        """Test that the parser reports the offending offset."""
        with pytest.raises(PolynomialSyntaxError) as info:
            parse_polynomial("x1 + $")

        assert info.value.position == 5
        assert "position 5" in str(info.value)

    def test_syntax_without_position(self):
        """Test the message when no offset is known."""
        error = PolynomialSyntaxError("empty input")

        assert error.position is None
        assert str(error) == "empty input"
