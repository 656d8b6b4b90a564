"""
Exact linear algebra over Fraction: row reduction, rank, nullspaces and
primitive integer scaling.
"""

from fractions import Fraction
from math import gcd, lcm
from typing import List, Sequence, Tuple

Vector = List[Fraction]


def rref(rows: Sequence[Sequence], ncols: int = None) -> Tuple[List[Vector], List[int]]:
    """Reduced row echelon form and pivot columns."""
    matrix = [[Fraction(v) for v in row] for row in rows]
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(matrix)) if matrix[i][col] != 0), None)
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        lead = matrix[r][col]
        matrix[r] = [v / lead for v in matrix[r]]
        for i in range(len(matrix)):
            if i != r and matrix[i][col] != 0:
                factor = matrix[i][col]
                matrix[i] = [a - factor * b for a, b in zip(matrix[i], matrix[r])]
        pivots.append(col)
        r += 1
        if r == len(matrix):
            break
    return matrix[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int = None) -> int:
    if not rows:
        return 0
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> List[Vector]:
    """Basis of {x : rows x = 0}, one vector per free column."""
    reduced, pivots = rref(rows, ncols) if rows else ([], [])
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            x[p] = -row[f]
        basis.append(x)
    return basis


def solve_affine(rows: Sequence[Sequence], rhs: Sequence, ncols: int):
    """
    Solve rows x = rhs exactly.

    Returns (particular, basis) with basis spanning the homogeneous solutions,
    or None when the system is inconsistent.
    """
    augmented = [list(row) + [Fraction(r)] for row, r in zip(rows, rhs)]
    reduced, pivots = rref(augmented, ncols + 1)
    if ncols in pivots:
        return None
    particular = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        particular[p] = row[ncols]
    return particular, nullspace(rows, ncols)


def independent_rows(rows: Sequence[Sequence], ncols: int) -> List[Vector]:
    """A maximal linearly independent subset of the rows, in input order."""
    chosen: List[Vector] = []
    for row in rows:
        candidate = chosen + [[Fraction(v) for v in row]]
        if rank(candidate, ncols) == len(candidate):
            chosen = candidate
    return chosen


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[Vector]:
    return [
        [sum((Fraction(x) * Fraction(y) for x, y in zip(row, col)), Fraction(0)) for col in zip(*b)]
        for row in a
    ]


def inverse(matrix: Sequence[Sequence]) -> List[Vector]:
    n = len(matrix)
    augmented = [
        [Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    reduced, pivots = rref(augmented, 2 * n)
    if pivots[:n] != list(range(n)) or len(reduced) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in reduced]


def primitive(vector: Sequence) -> Tuple[Fraction, ...]:
    """Positive rescaling of a rational vector to coprime integers."""
    values = [Fraction(v) for v in vector]
    common = 1
    for v in values:
        common = lcm(common, v.denominator)
    integers = [int(v * common) for v in values]
    divisor = 0
    for v in integers:
        divisor = gcd(divisor, abs(v))
    if divisor == 0:
        return tuple(Fraction(0) for _ in values)
    return tuple(Fraction(v // divisor) for v in integers)


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((Fraction(x) * Fraction(y) for x, y in zip(a, b)), Fraction(0))
