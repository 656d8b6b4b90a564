import json
from fractions import Fraction

import numpy as np
import pytest

from src.errors import DomainError, PhaseInputError, PolynomialSyntaxError
from src.polynomial import (
    Polynomial,
    evaluate,
    evaluate_grid,
    evaluate_many,
    flow_ratio,
    flow_ratio_many,
    format_polynomial,
    gradient,
    load_phase,
    parse_polynomial,
    partial_derivative,
    polynomial_from_json,
    polynomial_to_json,
    weighted_derivatives,
    weighted_euler,
    weighted_scale,
)


class TestPolynomial:
    """Test cases for the Polynomial value type."""

    def test_zero_coefficients_dropped(self):
        """Test that zero coefficients never survive construction."""
        f = Polynomial(2, {(2, 0): 1, (0, 2): 0})

        assert f.terms == {(2, 0): Fraction(1)}

    def test_exponent_length_checked(self):
        """Test that exponent vectors must match the dimension."""
        with pytest.raises(PhaseInputError):
            Polynomial(2, {(1, 2, 3): 1})

    def test_negative_exponent_rejected(self):
        """Test that phase polynomials carry nonnegative exponents only."""
        with pytest.raises(PhaseInputError):
            Polynomial(2, {(-1, 2): 1})

    def test_arithmetic(self):
        """Test exact addition, subtraction and multiplication."""
        x1 = Polynomial.variable(1, 2)
        x2 = Polynomial.variable(2, 2)

        square = (x1 - x2) ** 2

        assert square.terms == {(2, 0): 1, (1, 1): -2, (0, 2): 1}
        assert (square - square).is_zero()
        assert (x1 + 1).terms == {(1, 0): 1, (0, 0): 1}

    def test_dimension_mismatch(self):
        """Test that mixing dimensions is rejected."""
        with pytest.raises(PhaseInputError):
            Polynomial.variable(1, 2) + Polynomial.variable(1, 3)

    def test_substitute(self):
        """Test fixing one variable to a rational value."""
        f = parse_polynomial("x1^2*x2 + x2^3")

        restricted = f.substitute(1, 1)

        assert restricted.dimension == 1
        assert restricted.terms == {(1,): 1, (3,): 1}


class TestParsePolynomial:
    """Test cases for the polynomial text grammar."""

    def test_sum_of_squares(self):
        """Test the simplest two-variable phase."""
        f = parse_polynomial("x1^2 + x2^2")

        assert f.dimension == 2
        assert f.terms == {(2, 0): 1, (0, 2): 1}

    def test_rational_coefficients(self):
        """Test integer and p/q coefficients."""
        f = parse_polynomial("3*x1^4*x2 - 1/2*x2^3")

        assert f.terms == {(4, 1): 3, (0, 3): Fraction(-1, 2)}

    def test_like_terms_merged(self):
        """Test that the expansion of (x1 - x2)^2 is combined canonically."""
        f = parse_polynomial("x1^2 - 2*x1*x2 + x2^2")

        assert f.terms == {(2, 0): 1, (1, 1): -2, (0, 2): 1}
        assert parse_polynomial("x1^2 + x2 - x2").terms == {(2, 0): 1}

    def test_aliases(self):
        """Test that x, y, z map to x1, x2, x3."""
        assert parse_polynomial("x^2 + y*z") == parse_polynomial("x1^2 + x2*x3")

    def test_dimension_hint(self):
        """Test that the hint can raise the dimension."""
        assert parse_polynomial("x1^2", dimension_hint=3).dimension == 3
        assert parse_polynomial("x3", dimension_hint=1).dimension == 3

    def test_whitespace_insignificant(self):
        """Test that spacing does not change the result."""
        assert parse_polynomial("x1 ^ 2+x2^2") == parse_polynomial("x1^2 + x2^2")

    @pytest.mark.parametrize("text", ["y2^2", "x1^2 + z5", "a*x1", "X1"])
    def test_unknown_variable_names(self, text):
        """Test that only x1, x2, ... and the bare aliases are variables."""
        with pytest.raises(PolynomialSyntaxError, match="unknown variable"):
            parse_polynomial(text)

    def test_syntax_error_has_position(self):
        """Test that a syntax error reports the offending offset."""
        with pytest.raises(PolynomialSyntaxError) as excinfo:
            parse_polynomial("x1^2 + + ")

        assert excinfo.value.position is not None

    @pytest.mark.parametrize("text", ["x1^-2", "x1^1/2", "x0^2", "x1 + 1/0", "x1 + 0.5", "x1 $ x2"])
    def test_invalid_inputs(self, text):
        """Test negative or fractional exponents, x0, zero denominators and stray characters."""
        with pytest.raises(PolynomialSyntaxError):
            parse_polynomial(text)

    def test_round_trip(self):
        """Test that printing and re-parsing gives the same polynomial."""
        for text in ["x1^2 + x2^2", "3*x1^4*x2 - 1/2*x2^3", "-x1*x2 + 7", "x1^2*x2^2*x3"]:
            f = parse_polynomial(text)
            assert parse_polynomial(format_polynomial(f), f.dimension) == f

    def test_format_zero(self):
        """Test that the zero polynomial prints as 0."""
        assert format_polynomial(Polynomial.zero(2)) == "0"


class TestPhaseJson:
    """Test cases for the JSON polynomial form and load_phase."""

    def test_json_form(self):
        """Test reading the {"n", "terms"} JSON form."""
        f = polynomial_from_json({"n": 2, "terms": [{"coeff": "-1/2", "alpha": [0, 3]}]})

        assert f.terms == {(0, 3): Fraction(-1, 2)}
        assert polynomial_to_json(f) == {"n": 2, "terms": [{"coeff": "-1/2", "alpha": [0, 3]}]}

    def test_malformed_json(self):
        """Test that missing keys raise PhaseInputError."""
        with pytest.raises(PhaseInputError):
            polynomial_from_json({"terms": []})

    def test_load_phase_text_and_inline_json(self):
        """Test that load_phase accepts text and inline JSON."""
        inline = json.dumps({"n": 2, "terms": [{"coeff": "1", "alpha": [2, 0]}]})

        assert load_phase("x1^2 + x2^2") == parse_polynomial("x1^2 + x2^2")
        assert load_phase(inline).terms == {(2, 0): 1}

    def test_load_phase_from_file(self, temp_phase_file):
        """Test the @file syntax."""
        f = load_phase(f"@{temp_phase_file}")

        assert f == parse_polynomial("x1^2 + x2^4")

    def test_load_phase_missing_file(self):
        """Test that an unreadable @file raises PhaseInputError."""
        with pytest.raises(PhaseInputError):
            load_phase("@/nonexistent/phase.json")


class TestEvaluate:
    """Test cases for floating-point evaluation."""

    def test_evaluate(self):
        """Test the hand-computed values."""
        assert evaluate(parse_polynomial("x1^2 + x2^2"), [1, 2]) == 5.0
        assert evaluate(Polynomial.zero(3), [0.3, 0.1, 2.0]) == 0.0
        assert evaluate(parse_polynomial("x1^2*x2^2"), [0.5, 0.5]) == pytest.approx(1 / 16)

    def test_dimension_mismatch(self):
        """Test that a point of the wrong length is rejected."""
        with pytest.raises(PhaseInputError):
            evaluate(parse_polynomial("x1^2 + x2^2"), [1.0])

    def test_vectorised_agrees(self):
        """Test that evaluate_many and evaluate_grid agree with evaluate."""
        f = parse_polynomial("3*x1^4*x2 - 1/2*x2^3 + x1*x2")
        points = np.random.default_rng(0).uniform(-1, 1, size=(50, 2))

        many = evaluate_many(f, points)
        for point, value in zip(points, many):
            assert value == pytest.approx(evaluate(f, point), rel=1e-12, abs=1e-15)

        axes = [np.linspace(-1, 1, 5), np.linspace(-0.5, 0.5, 3)]
        grid = evaluate_grid(f, axes)
        assert grid.shape == (5, 3)
        assert grid[4, 2] == pytest.approx(evaluate(f, [1.0, 0.5]))

    def test_deterministic(self):
        """Test bit-identical results for identical inputs."""
        f = parse_polynomial("x1^7 - 1/3*x1^3*x2 + 5*x2^5")
        x = [0.123456789, -0.987654321]

        assert evaluate(f, x) == evaluate(f, x)


class TestDerivatives:
    """Test cases for exact differentiation."""

    def test_partial_derivative(self):
        """Test the calculus examples."""
        assert partial_derivative(parse_polynomial("x1^2 + x2^2"), 1) == parse_polynomial("2*x1", 2)
        assert partial_derivative(parse_polynomial("x1^2*x2^2"), 2) == parse_polynomial("2*x1^2*x2")
        assert partial_derivative(parse_polynomial("x2^3"), 1).is_zero()

    def test_index_out_of_range(self):
        """Test that variable indices are 1-based and bounded."""
        with pytest.raises(PhaseInputError):
            partial_derivative(parse_polynomial("x1^2 + x2^2"), 3)
        with pytest.raises(PhaseInputError):
            partial_derivative(parse_polynomial("x1^2 + x2^2"), 0)

    def test_linearity(self):
        """Test that differentiation is linear as an exact identity."""
        f = parse_polynomial("x1^3*x2 - x2^2")
        g = parse_polynomial("1/2*x1^2 + x1*x2^4")

        for i in (1, 2):
            assert partial_derivative(f + g, i) == partial_derivative(f, i) + partial_derivative(g, i)

    def test_weighted_derivatives(self):
        """Test that x_i df/dx_i agrees with x_i times the gradient."""
        f = parse_polynomial("x1^3*x2 - x2^2 + 4*x1")

        for i, (w, g) in enumerate(zip(weighted_derivatives(f), gradient(f)), start=1):
            assert w == Polynomial.variable(i, 2) * g

    def test_weighted_euler(self):
        """Test sum k_i x_i df/dx_i for quasi-homogeneous weights."""
        f = parse_polynomial("x1^2*x2")

        assert weighted_euler(f, [Fraction(1, 4), Fraction(1, 2)]) == f


class TestFlowRatio:
    """Test cases for the weighted gradient-flow ratio."""

    def test_values(self):
        """Test the hand-computed ratios."""
        assert flow_ratio(parse_polynomial("x1^2 + x2^2"), [1, 1]) == pytest.approx(4.0)
        assert flow_ratio(parse_polynomial("x1^2*x2^2"), [0.5, 0.5]) == pytest.approx(1.0)

    def test_axis_is_domain_error(self):
        """Test that the ratio is undefined on coordinate hyperplanes."""
        with pytest.raises(DomainError):
            flow_ratio(parse_polynomial("x1^2 + x2^2"), [0.0, 0.5])

    def test_lower_bound_on_unit_box(self):
        """Test r >= 4 for x1^2 + x2^2 on dense samples of the unit box."""
        f = parse_polynomial("x1^2 + x2^2")
        points = np.random.default_rng(1).uniform(-1, 1, size=(20000, 2))

        assert np.min(flow_ratio_many(f, points)) >= 4.0 - 1e-9

    def test_identity_with_numerator(self):
        """Test r(x) * prod|x_i| = sum |x_i df/dx_i| at random points."""
        f = parse_polynomial("x1^3 - 3*x1*x2^2 + x2^4")
        points = np.random.default_rng(2).uniform(-1, 1, size=(200, 2))

        ratio = flow_ratio_many(f, points)
        numerator = sum(np.abs(evaluate_many(w, points)) for w in weighted_derivatives(f))
        assert np.allclose(ratio * np.prod(np.abs(points), axis=1), numerator, rtol=1e-12, atol=0)

    def test_vectorised_marks_axis_nan(self):
        """Test that flow_ratio_many returns NaN on the axes."""
        ratio = flow_ratio_many(parse_polynomial("x1^2 + x2^2"), np.array([[0.0, 1.0], [1.0, 1.0]]))

        assert np.isnan(ratio[0])
        assert ratio[1] == pytest.approx(4.0)


class TestWeightedScale:
    """Test cases for the quasi-homogeneous scaling identity."""

    def test_homogeneous(self):
        """Test equal pairs for x1^2 + x2^2 with weights (1/2, 1/2)."""
        lhs, rhs = weighted_scale(parse_polynomial("x1^2 + x2^2"), [Fraction(1, 2)] * 2, 4, [1, 1])

        assert lhs == pytest.approx(8.0)
        assert rhs == pytest.approx(8.0)

    def test_mixed_weights(self):
        """Test x1^2 x2 with weights (1/4, 1/2)."""
        lhs, rhs = weighted_scale(parse_polynomial("x1^2*x2"), [Fraction(1, 4), Fraction(1, 2)], 16, [1, 1])

        assert lhs == pytest.approx(16.0)
        assert rhs == pytest.approx(16.0)

    def test_witness_of_wrong_weights(self):
        """Test unequal pairs for x1^2 + x2^3 under (1/2, 1/2)."""
        lhs, rhs = weighted_scale(parse_polynomial("x1^2 + x2^3"), [Fraction(1, 2)] * 2, 4, [0, 1])

        assert lhs == pytest.approx(8.0)
        assert rhs == pytest.approx(4.0)

    def test_nonpositive_t(self):
        """Test that t must be positive."""
        with pytest.raises(PhaseInputError):
            weighted_scale(parse_polynomial("x1^2"), [Fraction(1, 2)], 0, [1])
