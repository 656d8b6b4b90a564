import numpy as np
import pytest

from src.errors import PhaseInputError
from src.newton import build_newton, compact_faces, face_polynomial
from src.nondegeneracy import FaceGradient, check_nondegenerate
from src.polynomial import Polynomial, parse_polynomial
from tests.fixtures.sample_data import NONDEGENERATE_BATTERY


class TestFaceGradient:
    """Test cases for the scale-normalised face gradient."""

    def test_ratio_of_sum_of_squares(self):
        """Test |grad| / sum of term magnitudes for x1^2 + x2^2 at (1, 1)."""
        evaluator = FaceGradient(parse_polynomial("x1^2 + x2^2"))

        ratio = evaluator.ratio(np.array([[1.0, 1.0]]))

        assert ratio[0] == pytest.approx(np.sqrt(8.0) / 4.0)

    def test_ratio_vanishes_on_zero_set(self):
        """Test that (x1 - x2)^2 has zero gradient on the diagonal."""
        evaluator = FaceGradient(parse_polynomial("(x1 - x2)^2"))

        assert evaluator.norm(np.array([[0.7, 0.7]]))[0] == pytest.approx(0.0)


class TestCheckNondegenerate:
    """Test cases for the nondegeneracy search."""

    @pytest.mark.parametrize("text", NONDEGENERATE_BATTERY)
    def test_nondegenerate_battery(self, text):
        """Test phases whose face gradients never vanish off the axes."""
        report = check_nondegenerate(parse_polynomial(text), resolution=128)

        assert report.verdict == "nondegenerate"
        assert report.witness is None
        assert len(report.faces) == len(compact_faces(build_newton(parse_polynomial(text))))

    def test_monomial_is_nondegenerate(self):
        """Test x1^2 x2^2, whose only compact face is the vertex."""
        report = check_nondegenerate(parse_polynomial("x1^2*x2^2"), resolution=128)

        assert report.verdict == "nondegenerate"

    def test_square_of_difference_is_degenerate(self):
        """Test (x1 - x2)^2 and its witness on the diagonal."""
        f = parse_polynomial("(x1 - x2)^2")

        report = check_nondegenerate(f, resolution=128)

        assert report.verdict == "degenerate"
        witness = report.witness
        assert witness is not None
        assert abs(witness[0]) == pytest.approx(abs(witness[1]), abs=1e-6)
        assert min(abs(v) for v in witness) > 1e-6
        degenerate_faces = [record for record in report.faces if record.degenerate]
        assert degenerate_faces[0].face.dim == 1
        edge = face_polynomial(f, degenerate_faces[0].face)
        assert FaceGradient(edge).norm(np.array([witness]))[0] < 1e-6

    def test_report_serialises(self):
        """Test the JSON layout of the report."""
        data = check_nondegenerate(parse_polynomial("x1^2 + x2^2"), resolution=64).to_dict()

        assert data["verdict"] == "nondegenerate"
        assert data["resolution"] == 64
        assert {"face", "min_ratio", "min_point", "gradient_norm", "witness"} <= set(data["faces"][0])

    def test_one_dimensional(self):
        """Test a one-variable phase, whose shell is {-1, 1}."""
        assert check_nondegenerate(parse_polynomial("x1^3"), resolution=64).verdict == "nondegenerate"

    def test_zero_phase(self):
        """Test that the zero polynomial is rejected."""
        with pytest.raises(PhaseInputError):
            check_nondegenerate(Polynomial.zero(2))
