"""
Exact multivariate polynomials with rational coefficients.

A polynomial is a map from exponent vectors to nonzero `Fraction` coefficients.
Evaluation converts each coefficient to float and sums the terms in sorted
exponent order, so identical inputs always give bit-identical results.
"""

import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import DomainError, PhaseInputError, PolynomialSyntaxError

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]
Rational = Union[int, Fraction]

ALIASES = {"x": 1, "y": 2, "z": 3}


@dataclass(frozen=True)
class Polynomial:
    """
    Polynomial in x1..xn with exact rational coefficients.

    The constructor normalises its input: coefficients become `Fraction`,
    zero coefficients are dropped and every exponent vector is checked to have
    length `dimension` with nonnegative entries.
    """

    dimension: int
    terms: Dict[Exponent, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise PhaseInputError(f"polynomial dimension must be >= 1, got {self.dimension}")
        normalised: Dict[Exponent, Fraction] = {}
        for alpha, coeff in self.terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.dimension:
                raise PhaseInputError(
                    f"exponent {alpha} does not match dimension {self.dimension}"
                )
            if any(a < 0 for a in alpha):
                raise PhaseInputError(f"negative exponent in {alpha}")
            coeff = Fraction(coeff)
            if coeff != 0:
                normalised[alpha] = normalised.get(alpha, Fraction(0)) + coeff
                if normalised[alpha] == 0:
                    del normalised[alpha]
        object.__setattr__(self, "terms", normalised)

    def __hash__(self):
        return hash((self.dimension, tuple(self.sorted_terms())))

    # construction helpers

    @classmethod
    def zero(cls, dimension: int) -> "Polynomial":
        return cls(dimension, {})

    @classmethod
    def constant(cls, value: Rational, dimension: int) -> "Polynomial":
        return cls(dimension, {(0,) * dimension: Fraction(value)})

    @classmethod
    def variable(cls, index: int, dimension: int) -> "Polynomial":
        """x_index as a polynomial; index is 1-based."""
        if not 1 <= index <= dimension:
            raise PhaseInputError(f"variable index {index} out of range 1..{dimension}")
        alpha = [0] * dimension
        alpha[index - 1] = 1
        return cls(dimension, {tuple(alpha): Fraction(1)})

    # inspection

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self) -> List[Tuple[Exponent, Fraction]]:
        return sorted(self.terms.items())

    def support(self) -> List[Exponent]:
        return sorted(self.terms)

    def degree(self) -> int:
        return max((sum(alpha) for alpha in self.terms), default=0)

    def max_exponents(self) -> Tuple[int, ...]:
        if not self.terms:
            return (0,) * self.dimension
        return tuple(max(alpha[i] for alpha in self.terms) for i in range(self.dimension))

    # arithmetic

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dimension != self.dimension:
                raise PhaseInputError(
                    f"dimension mismatch: {self.dimension} vs {other.dimension}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other, self.dimension)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for alpha, coeff in other.terms.items():
            terms[alpha] = terms.get(alpha, Fraction(0)) + coeff
        return Polynomial(self.dimension, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dimension, {alpha: -c for alpha, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Exponent, Fraction] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, Fraction(0)) + ca * cb
        return Polynomial(self.dimension, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise PhaseInputError("polynomial powers must be nonnegative integers")
        result = Polynomial.constant(1, self.dimension)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def with_dimension(self, dimension: int) -> "Polynomial":
        """Embed into a higher dimension by padding exponents with zeros."""
        if dimension < self.dimension:
            raise PhaseInputError("cannot embed into a smaller dimension")
        pad = (0,) * (dimension - self.dimension)
        return Polynomial(dimension, {alpha + pad: c for alpha, c in self.terms.items()})

    def substitute(self, index: int, value: Rational) -> "Polynomial":
        """
        Fix x_index = value and drop that variable. Returns a polynomial in n-1
        variables (a 1-variable constant when n == 1).
        """
        if not 1 <= index <= self.dimension:
            raise PhaseInputError(f"variable index {index} out of range 1..{self.dimension}")
        value = Fraction(value)
        target = max(self.dimension - 1, 1)
        terms: Dict[Exponent, Fraction] = {}
        for alpha, coeff in self.terms.items():
            rest = alpha[: index - 1] + alpha[index:]
            if not rest:
                rest = (0,)
            terms[rest] = terms.get(rest, Fraction(0)) + coeff * value ** alpha[index - 1]
        return Polynomial(target, terms)

    def __str__(self):
        return format_polynomial(self)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?)|(?P<var>[a-zA-Z]\d*)|(?P<op>[-+*/^()])|(?P<bad>\S))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            break
        kind = match.lastgroup
        value = match.group(kind)
        start = match.start(kind)
        if kind == "bad":
            raise PolynomialSyntaxError(f"unexpected character {value!r}", start)
        if kind == "number" and "." in value:
            raise PolynomialSyntaxError(
                f"decimal coefficient {value!r} is not supported, write it as p/q", start
            )
        tokens.append((kind, value, start))
        position = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _variable_index(token: str, position: int) -> int:
    if token in ALIASES:
        return ALIASES[token]
    if not re.fullmatch(r"x\d+", token):
        raise PolynomialSyntaxError(f"unknown variable {token!r}, expected x1, x2, ... or x, y, z", position)
    index = int(token[1:])
    if index == 0:
        raise PolynomialSyntaxError("variable index 0 is not allowed, variables start at x1", position)
    return index


class _Parser:
    def __init__(self, text: str, dimension: int):
        self.tokens = _tokenize(text)
        self.index = 0
        self.dimension = dimension

    @property
    def current(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect_op(self, op: str):
        kind, value, position = self.current
        if kind != "op" or value != op:
            raise PolynomialSyntaxError(f"expected {op!r}, found {value or 'end of input'!r}", position)
        self.advance()

    def parse(self) -> Polynomial:
        result = self.expression()
        kind, value, position = self.current
        if kind != "end":
            raise PolynomialSyntaxError(f"unexpected token {value!r}", position)
        return result

    def expression(self) -> Polynomial:
        sign = 1
        kind, value, _ = self.current
        if kind == "op" and value in "+-":
            sign = -1 if value == "-" else 1
            self.advance()
        result = self.term() * sign
        while True:
            kind, value, _ = self.current
            if kind == "op" and value in "+-":
                self.advance()
                term = self.term()
                result = result + term if value == "+" else result - term
            else:
                return result

    def term(self) -> Polynomial:
        result = self.factor()
        while self.current[0] == "op" and self.current[1] == "*":
            self.advance()
            result = result * self.factor()
        return result

    def exponent(self) -> int:
        if not (self.current[0] == "op" and self.current[1] == "^"):
            return 1
        self.advance()
        kind, value, position = self.current
        if kind == "op" and value == "-":
            raise PolynomialSyntaxError("negative exponents are not allowed", position)
        if kind != "number":
            raise PolynomialSyntaxError("expected a nonnegative integer exponent", position)
        self.advance()
        if self.current[0] == "op" and self.current[1] == "/":
            raise PolynomialSyntaxError("fractional exponents are not allowed", self.current[2])
        return int(value)

    def factor(self) -> Polynomial:
        kind, value, position = self.current
        if kind == "number":
            self.advance()
            numerator = int(value)
            if self.current[0] == "op" and self.current[1] == "/":
                self.advance()
                kind, denominator, den_position = self.current
                if kind != "number":
                    raise PolynomialSyntaxError("expected an integer denominator", den_position)
                self.advance()
                if int(denominator) == 0:
                    raise PolynomialSyntaxError("zero denominator", den_position)
                return Polynomial.constant(Fraction(numerator, int(denominator)), self.dimension)
            if self.current[0] == "op" and self.current[1] == "^":
                raise PolynomialSyntaxError("powers of numbers are not supported", self.current[2])
            return Polynomial.constant(numerator, self.dimension)
        if kind == "var":
            self.advance()
            base = Polynomial.variable(_variable_index(value, position), self.dimension)
            return base ** self.exponent()
        if kind == "op" and value == "(":
            self.advance()
            inner = self.expression()
            self.expect_op(")")
            return inner ** self.exponent()
        raise PolynomialSyntaxError(
            f"expected a number, variable or '(' but found {value or 'end of input'!r}", position
        )


def parse_polynomial(text: str, dimension_hint: Optional[int] = None) -> Polynomial:
    """
    Parse polynomial text such as "3*x1^4*x2 - 1/2*x2^3".

    Args:
        text (str): expression in x1..xn (aliases x, y, z for x1, x2, x3).
        dimension_hint (int): minimal dimension of the result.
    Returns:
        Polynomial: like terms merged, zero coefficients dropped; the dimension
        is the larger of the highest variable index and the hint.
    Raises:
        PolynomialSyntaxError: with the offending position.
    """
    tokens = _tokenize(text)
    highest = 1
    for kind, value, position in tokens:
        if kind == "var":
            highest = max(highest, _variable_index(value, position))
    dimension = max(highest, dimension_hint or 1)
    return _Parser(text, dimension).parse()


def _format_monomial(alpha: Exponent) -> str:
    factors = []
    for i, a in enumerate(alpha, start=1):
        if a == 1:
            factors.append(f"x{i}")
        elif a > 1:
            factors.append(f"x{i}^{a}")
    return "*".join(factors)


def format_polynomial(f: Polynomial) -> str:
    """Canonical text form, readable back by `parse_polynomial`."""
    if f.is_zero():
        return "0"
    parts = []
    for alpha, coeff in sorted(f.terms.items(), reverse=True):
        monomial = _format_monomial(alpha)
        magnitude = abs(coeff)
        if not monomial:
            body = str(magnitude)
        elif magnitude == 1:
            body = monomial
        else:
            body = f"{magnitude}*{monomial}"
        if not parts:
            parts.append(f"-{body}" if coeff < 0 else body)
        else:
            parts.append(f"- {body}" if coeff < 0 else f"+ {body}")
    return " ".join(parts)


def polynomial_to_json(f: Polynomial) -> dict:
    return {
        "n": f.dimension,
        "terms": [{"coeff": str(c), "alpha": list(alpha)} for alpha, c in f.sorted_terms()],
    }


def polynomial_from_json(data: Union[str, Mapping]) -> Polynomial:
    """Read the {"n": int, "terms": [{"coeff": "p/q", "alpha": [...]}]} form."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        dimension = int(data["n"])
        terms: Dict[Exponent, Fraction] = {}
        for entry in data["terms"]:
            alpha = tuple(entry["alpha"])
            if any(not isinstance(a, int) for a in alpha):
                raise PhaseInputError(f"exponent {list(alpha)} must hold integers")
            coeff = Fraction(str(entry["coeff"]))
            terms[alpha] = terms.get(alpha, Fraction(0)) + coeff
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as error:
        if isinstance(error, PhaseInputError):
            raise
        raise PhaseInputError(f"malformed polynomial JSON: {error}") from error
    return Polynomial(dimension, terms)


def load_phase(spec: str, dimension_hint: Optional[int] = None) -> Polynomial:
    """
    Phase from CLI-style input: polynomial text, inline JSON, or "@path" to a
    JSON (or text) file.
    """
    spec = spec.strip()
    if spec.startswith("@"):
        path = spec[1:]
        try:
            with open(path, "r", encoding="utf-8") as file:
                spec = file.read().strip()
        except OSError as error:
            raise PhaseInputError(f"cannot read phase file {path}: {error}") from error
    if spec.startswith("{"):
        return polynomial_from_json(spec)
    return parse_polynomial(spec, dimension_hint)


# ------------------------------------------------------------- evaluation


def _check_point(f: Polynomial, x: Sequence[float]) -> None:
    if len(x) != f.dimension:
        raise PhaseInputError(f"point has {len(x)} coordinates, polynomial has dimension {f.dimension}")


def evaluate(f: Polynomial, x: Sequence[float]) -> float:
    """f(x) in floating point, summing terms in sorted exponent order."""
    _check_point(f, x)
    total = 0.0
    for alpha, coeff in f.sorted_terms():
        term = float(coeff)
        for xi, a in zip(x, alpha):
            if a:
                term *= float(xi) ** a
        total += term
    return total


def evaluate_many(f: Polynomial, points: np.ndarray) -> np.ndarray:
    """
    Evaluate f at each row of `points` (shape (m, n)).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != f.dimension:
        raise PhaseInputError(
            f"points must have shape (m, {f.dimension}), got {points.shape}"
        )
    cache: Dict[Tuple[int, int], np.ndarray] = {}

    def power(i: int, a: int) -> np.ndarray:
        if (i, a) not in cache:
            cache[(i, a)] = points[:, i] ** a
        return cache[(i, a)]

    total = np.zeros(points.shape[0])
    for alpha, coeff in f.sorted_terms():
        term = np.full(points.shape[0], float(coeff))
        for i, a in enumerate(alpha):
            if a:
                term = term * power(i, a)
        total = total + term
    return total


def evaluate_grid(f: Polynomial, axes: Sequence[np.ndarray]) -> np.ndarray:
    """
    Evaluate f on the tensor grid axes[0] x ... x axes[n-1].

    Returns an array of shape (len(axes[0]), ..., len(axes[n-1])).
    """
    if len(axes) != f.dimension:
        raise PhaseInputError(f"expected {f.dimension} axes, got {len(axes)}")
    shape = tuple(len(axis) for axis in axes)
    powers = []
    for i, axis in enumerate(axes):
        view = [1] * f.dimension
        view[i] = len(axis)
        powers.append((np.asarray(axis, dtype=float).reshape(view), {}))

    def power(i: int, a: int) -> np.ndarray:
        base, cache = powers[i]
        if a not in cache:
            cache[a] = base ** a
        return cache[a]

    total = np.zeros(shape)
    for alpha, coeff in f.sorted_terms():
        term = float(coeff)
        for i, a in enumerate(alpha):
            if a:
                term = term * power(i, a)
        total = total + term
    return total


# ------------------------------------------------------- differentiation


def partial_derivative(f: Polynomial, i: int) -> Polynomial:
    """Exact derivative with respect to x_i (1-based index)."""
    if not 1 <= i <= f.dimension:
        raise PhaseInputError(f"variable index {i} out of range 1..{f.dimension}")
    terms: Dict[Exponent, Fraction] = {}
    for alpha, coeff in f.terms.items():
        a = alpha[i - 1]
        if a:
            lowered = alpha[: i - 1] + (a - 1,) + alpha[i:]
            terms[lowered] = coeff * a
    return Polynomial(f.dimension, terms)


def gradient(f: Polynomial) -> List[Polynomial]:
    return [partial_derivative(f, i) for i in range(1, f.dimension + 1)]


def weighted_derivatives(f: Polynomial) -> List[Polynomial]:
    """The weighted gradient flow components x_i * df/dx_i, exactly."""
    return [
        Polynomial(
            f.dimension,
            {alpha: coeff * alpha[i] for alpha, coeff in f.terms.items() if alpha[i]},
        )
        for i in range(f.dimension)
    ]


def weighted_euler(f: Polynomial, weights: Sequence[Rational]) -> Polynomial:
    """sum_i k_i x_i df/dx_i, computed termwise as (k . alpha) c_alpha x^alpha."""
    if len(weights) != f.dimension:
        raise PhaseInputError(f"{len(weights)} weights for a phase of dimension {f.dimension}")
    weights = [Fraction(k) for k in weights]
    return Polynomial(
        f.dimension,
        {
            alpha: coeff * sum(k * a for k, a in zip(weights, alpha))
            for alpha, coeff in f.terms.items()
        },
    )


# ----------------------------------------------------- flow ratio & scaling


def flow_ratio(f: Polynomial, x: Sequence[float]) -> float:
    """
    r(x) = sum_i |x_i df/dx_i(x)| / prod_i |x_i|.

    Raises:
        DomainError: if some coordinate is zero.
    """
    _check_point(f, x)
    if any(float(xi) == 0.0 for xi in x):
        raise DomainError("flow ratio is undefined on the coordinate hyperplanes")
    numerator = sum(abs(evaluate(w, x)) for w in weighted_derivatives(f))
    denominator = float(np.prod(np.abs(np.asarray(x, dtype=float))))
    return numerator / denominator


def flow_ratio_many(f: Polynomial, points: np.ndarray) -> np.ndarray:
    """Vectorised flow ratio; NaN where a coordinate is zero."""
    points = np.asarray(points, dtype=float)
    numerator = np.zeros(points.shape[0])
    for w in weighted_derivatives(f):
        numerator = numerator + np.abs(evaluate_many(w, points))
    denominator = np.prod(np.abs(points), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numerator / denominator
    ratio[denominator == 0] = np.nan
    return ratio


def _weights_of(k) -> List[Fraction]:
    weights = getattr(k, "weights", k)
    return [Fraction(w) if not isinstance(w, float) else w for w in weights]


def weighted_scale(f: Polynomial, k, t: float, x: Sequence[float]) -> Tuple[float, float]:
    """
    Return (f(t^k1 x1, ..., t^kn xn), t f(x)); the two agree when f is
    quasi-homogeneous with weights k.
    """
    weights = _weights_of(k)
    if len(weights) != f.dimension:
        raise PhaseInputError(f"{len(weights)} weights for a phase of dimension {f.dimension}")
    _check_point(f, x)
    if t <= 0:
        raise PhaseInputError("scaling parameter t must be positive")
    scaled = [float(t) ** float(w) * float(xi) for w, xi in zip(weights, x)]
    return evaluate(f, scaled), float(t) * evaluate(f, x)


def monomial_terms(f: Polynomial) -> Iterable[Polynomial]:
    for alpha, coeff in f.sorted_terms():
        yield Polynomial(f.dimension, {alpha: coeff})
