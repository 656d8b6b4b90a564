"""
Quasi-homogeneous weights, the Euler identity and the critical integrability
exponent epsilon_0 on the unit box.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import config
from src.errors import FitError, PhaseInputError
from src.polynomial import Polynomial, evaluate_many, weighted_derivatives, weighted_euler
from src.rational import independent_rows, inverse, matmul, solve_affine
from src.sampling import BoxDomain
from src.simplex import maximise_min_entry
from src.sublevel import abs_evaluator, estimate_sublevel
from src.univariate import max_root_multiplicity

logger = logging.getLogger(__name__)

WeightStatus = Literal["unique", "underdetermined", "infeasible"]


@dataclass(frozen=True)
class WeightVector:
    """
    Positive rational weights k with k . alpha = 1 on the support.

    When underdetermined, `weights` is the chosen positive member and the full
    affine family is `particular + span(basis)`.
    """

    weights: Optional[Tuple[Fraction, ...]]
    status: WeightStatus
    particular: Optional[Tuple[Fraction, ...]] = None
    basis: Tuple[Tuple[Fraction, ...], ...] = ()

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def member(self, coefficients: Sequence) -> Tuple[Fraction, ...]:
        """particular + sum_j coefficients[j] * basis[j]."""
        if self.particular is None:
            raise PhaseInputError("infeasible weight system has no members")
        point = list(self.particular)
        for t, direction in zip(coefficients, self.basis):
            point = [p + Fraction(t) * d for p, d in zip(point, direction)]
        return tuple(point)

    def alternative(self) -> Optional["WeightVector"]:
        """A second positive member of an underdetermined family."""
        if self.status != "underdetermined":
            return None
        base = list(self.weights)
        direction = list(self.basis[0])
        limits = [k / -d for k, d in zip(base, direction) if d < 0]
        step = min(limits) / 2 if limits else Fraction(1)
        other = tuple(k + step * d for k, d in zip(base, direction))
        return WeightVector(other, "underdetermined", self.particular, self.basis)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "weights": [str(k) for k in self.weights] if self.weights else None,
            "sum": str(self.total) if self.weights else None,
            "family_basis": [[str(v) for v in b] for b in self.basis],
        }


def _weights_of(k: Union[WeightVector, Sequence]) -> List[Fraction]:
    if isinstance(k, WeightVector):
        if k.status == "infeasible" or k.weights is None:
            raise PhaseInputError("weights are infeasible for this phase")
        return list(k.weights)
    return [Fraction(w) for w in k]


def solve_weights(f: Polynomial) -> WeightVector:
    """
    Solve k . alpha = 1 over the support of f with all k_i > 0.

    Returns:
        WeightVector: unique solution, the minimal-norm positive member of an
        underdetermined family (or an LP-chosen positive member when the
        minimal-norm one is not positive), or status infeasible.
    """
    if f.is_zero():
        raise PhaseInputError("quasi-homogeneity needs a nonzero phase")
    n = f.dimension
    rows = [[Fraction(a) for a in alpha] for alpha in f.support()]
    ones = [Fraction(1)] * len(rows)
    solved = solve_affine(rows, ones, n)
    if solved is None:
        return WeightVector(None, "infeasible")
    particular, basis = solved
    particular = tuple(particular)
    basis = tuple(tuple(b) for b in basis)
    if not basis:
        if all(k > 0 for k in particular):
            return WeightVector(particular, "unique", particular)
        return WeightVector(None, "infeasible", particular)

    independent = independent_rows(rows, n)
    gram = matmul(independent, [list(col) for col in zip(*independent)])
    coefficients = matmul(inverse(gram), [[Fraction(1)] for _ in independent])
    min_norm = tuple(
        sum((row[i] * c[0] for row, c in zip(independent, coefficients)), Fraction(0)) for i in range(n)
    )
    if all(k > 0 for k in min_norm):
        return WeightVector(min_norm, "underdetermined", particular, basis)
    positive = maximise_min_entry(rows, ones)
    if positive is not None and all(k > 0 for k in positive):
        return WeightVector(tuple(positive), "underdetermined", particular, basis)
    return WeightVector(None, "infeasible", particular, basis)


def euler_check(f: Polynomial, k: Union[WeightVector, Sequence]) -> bool:
    """Exact check of sum_i k_i x_i df/dx_i == f."""
    weights = _weights_of(k)
    if len(weights) != f.dimension:
        raise PhaseInputError(f"{len(weights)} weights for a phase of dimension {f.dimension}")
    return weighted_euler(f, weights) == f


@dataclass
class BoundaryExponent:
    face: str
    exponent: float
    method: Literal["exact", "fit"]
    pure_power: Optional[float] = None
    log_augmented: Optional[float] = None
    log_power: Optional[float] = None
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "face": self.face,
            "exponent": None if math.isinf(self.exponent) else self.exponent,
            "method": self.method,
            "pure_power": self.pure_power,
            "log_augmented": self.log_augmented,
            "log_power": self.log_power,
            "flagged": self.flagged,
        }


@dataclass
class Epsilon0Result:
    value: float
    cap: Fraction
    boundary_exponents: List[BoundaryExponent] = field(default_factory=list)
    binding: List[str] = field(default_factory=list)
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "cap": str(self.cap),
            "binding": list(self.binding),
            "flagged": self.flagged,
            "boundary_exponents": [b.to_dict() for b in self.boundary_exponents],
        }


def _univariate_coefficients(g: Polynomial) -> List[Fraction]:
    degree = max((alpha[0] for alpha in g.terms), default=0)
    coefficients = [Fraction(0)] * (degree + 1)
    for alpha, c in g.terms.items():
        coefficients[alpha[0]] = c
    return coefficients


def _fitted_exponent(g: Polynomial, face: str, sampling) -> BoundaryExponent:
    box = BoxDomain.unit(g.dimension)
    estimate = estimate_sublevel(
        abs_evaluator(g), box, samples=sampling.samples, seed=sampling.seed, settings=sampling
    )
    if estimate.bounded_below:
        return BoundaryExponent(face, math.inf, "fit")
    if estimate.log_augmented is None:
        raise FitError(f"sublevel fit on boundary face {face} failed")
    return BoundaryExponent(
        face,
        estimate.log_augmented.epsilon,
        "fit",
        pure_power=estimate.pure.epsilon if estimate.pure else None,
        log_augmented=estimate.log_augmented.epsilon,
        log_power=estimate.log_augmented.log_power,
    )


def boundary_exponent(f: Polynomial, index: int, side: int, sampling=None) -> BoundaryExponent:
    """
    Integrability exponent of |f| restricted to the face x_index = side of the
    unit box: the sup of eps with |f|^-eps integrable there.
    """
    face = f"x{index}={'+' if side > 0 else '-'}1"
    g = f.substitute(index, side)
    if g.is_zero():
        logger.warning("phase vanishes identically on boundary face %s", face)
        return BoundaryExponent(face, 0.0, "exact", flagged=True)
    if f.dimension == 1 or g.degree() == 0:
        return BoundaryExponent(face, math.inf, "exact")
    if g.dimension == 1:
        multiplicity = max_root_multiplicity(_univariate_coefficients(g), -1, 1)
        value = math.inf if multiplicity == 0 else 1.0 / multiplicity
        return BoundaryExponent(face, value, "exact", pure_power=value, log_augmented=value, log_power=0.0)
    return _fitted_exponent(g, face, sampling or config.sampling)


def epsilon0(f: Polynomial, k: Union[WeightVector, Sequence], sampling=None) -> Epsilon0Result:
    """
    epsilon_0 = min(sum k_i, integrability exponents of |f| on the faces x_i = +-1).

    One-variable restrictions are decided exactly from the largest multiplicity
    of a real root in [-1, 1]; higher-dimensional faces use sublevel fits.
    """
    weights = _weights_of(k)
    if not euler_check(f, weights):
        raise PhaseInputError("weights do not satisfy the Euler identity for this phase")
    cap = sum(weights, Fraction(0))
    exponents = [
        boundary_exponent(f, index, side, sampling)
        for index in range(1, f.dimension + 1)
        for side in (1, -1)
    ]
    candidates = [("cap", float(cap))] + [(b.face, b.exponent) for b in exponents]
    value = min(v for _, v in candidates)
    binding = [name for name, v in candidates if np.isclose(v, value, rtol=1e-12, atol=0.0)]
    flagged = any(b.flagged for b in exponents)
    logger.info("epsilon0 = %.4g (binding: %s)", value, ", ".join(binding))
    return Epsilon0Result(value, cap, exponents, binding, flagged)


def flow_dominates(f: Polynomial, k: Union[WeightVector, Sequence], points: np.ndarray) -> np.ndarray:
    """
    Pointwise check of sum_i |x_i df/dx_i| >= |f| / max_i k_i for a
    quasi-homogeneous f (the Euler identity bounds |f| by the weighted flow).
    """
    weights = _weights_of(k)
    flow = np.zeros(points.shape[0])
    for w in weighted_derivatives(f):
        flow = flow + np.abs(evaluate_many(w, points))
    bound = np.abs(evaluate_many(f, points)) / float(max(weights))
    return flow >= bound * (1 - 1e-12)
