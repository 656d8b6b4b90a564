"""
Exact univariate polynomial helpers over Fraction.

Coefficient lists run from the constant term upward. Used to decide
integrability of one-variable restrictions from the multiplicity of their
real roots.
"""

from fractions import Fraction
from typing import List, Sequence, Tuple

Coefficients = List[Fraction]


def trim(p: Sequence) -> Coefficients:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def derivative(p: Sequence) -> Coefficients:
    return trim([i * c for i, c in enumerate(p)][1:])


def evaluate(p: Sequence, x) -> Fraction:
    total = Fraction(0)
    for c in reversed(p):
        total = total * x + c
    return total


def divmod_poly(a: Sequence, b: Sequence) -> Tuple[Coefficients, Coefficients]:
    a, b = trim(a), trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    quotient = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    remainder = list(a)
    while len(remainder) >= len(b) and remainder:
        shift = len(remainder) - len(b)
        factor = remainder[-1] / b[-1]
        quotient[shift] = factor
        for i, c in enumerate(b):
            remainder[shift + i] -= factor * c
        remainder = trim(remainder)
    return trim(quotient), remainder


def monic(p: Sequence) -> Coefficients:
    p = trim(p)
    return [c / p[-1] for c in p] if p else p


def gcd(a: Sequence, b: Sequence) -> Coefficients:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    return monic(a)


def square_free_decomposition(p: Sequence) -> List[Tuple[int, Coefficients]]:
    """
    Yun's algorithm: p = lc * prod q_i^i with each q_i square-free and
    pairwise coprime. Returns the nonconstant factors as (multiplicity, q_i).
    """
    p = trim(p)
    if len(p) <= 1:
        return []
    factors = []
    a = gcd(p, derivative(p))
    b = divmod_poly(p, a)[0]
    c = divmod_poly(derivative(p), a)[0]
    d = trim([ci - bi for ci, bi in zip(_pad(c, len(b)), _pad(derivative(b), len(b)))])
    multiplicity = 1
    while len(b) > 1:
        a = gcd(b, d)
        if len(a) > 1:
            factors.append((multiplicity, a))
        b = divmod_poly(b, a)[0]
        c = divmod_poly(d, a)[0]
        d = trim([ci - bi for ci, bi in zip(_pad(c, len(b)), _pad(derivative(b), len(b)))])
        multiplicity += 1
    return factors


def _pad(p: Sequence, length: int) -> Coefficients:
    p = list(p)
    return p + [Fraction(0)] * max(length - len(p), 0)


def sturm_sequence(p: Sequence) -> List[Coefficients]:
    sequence = [trim(p), derivative(p)]
    while sequence[-1]:
        remainder = divmod_poly(sequence[-2], sequence[-1])[1]
        if not remainder:
            break
        sequence.append([-c for c in remainder])
    return [s for s in sequence if s]


def _sign_changes(sequence: List[Coefficients], x: Fraction) -> int:
    signs = [evaluate(s, x) for s in sequence]
    signs = [s for s in signs if s != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))


def count_real_roots(p: Sequence, lo, hi) -> int:
    """Number of distinct real roots of a nonzero p in the closed interval [lo, hi]."""
    p = trim(p)
    if len(p) <= 1:
        return 0
    lo, hi = Fraction(lo), Fraction(hi)
    q = divmod_poly(p, gcd(p, derivative(p)))[0]
    sequence = sturm_sequence(q)
    count = _sign_changes(sequence, lo) - _sign_changes(sequence, hi)
    if evaluate(q, lo) == 0:
        count += 1
    return count


def max_root_multiplicity(p: Sequence, lo=-1, hi=1) -> int:
    """Largest multiplicity of a real root of p in [lo, hi]; 0 when there is none."""
    best = 0
    for multiplicity, factor in square_free_decomposition(p):
        if count_real_roots(factor, lo, hi) > 0:
            best = max(best, multiplicity)
    return best
