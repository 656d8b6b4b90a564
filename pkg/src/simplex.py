"""
Small dense exact simplex over `Fraction`.

Two-phase tableau method with Bland's rule. Problems are in the form

    minimise c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.

Supports in this package hold tens of points, so exactness is affordable.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Literal, Optional, Sequence

logger = logging.getLogger(__name__)

Status = Literal["optimal", "infeasible", "unbounded"]
Matrix = Sequence[Sequence]


@dataclass(frozen=True)
class LPResult:
    status: Status
    x: Optional[List[Fraction]] = None
    fun: Optional[Fraction] = None

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


class SimplexTableau:
    """
    Canonical tableau: `rows[i]` holds the coefficients of row i followed by its
    right-hand side; `basis[i]` is the basic column of row i.
    """

    def __init__(self, rows: List[List[Fraction]], basis: List[int]):
        self.rows = rows
        self.basis = basis

    @property
    def width(self) -> int:
        return len(self.rows[0]) - 1 if self.rows else 0

    def pivot(self, i: int, j: int) -> None:
        row = self.rows[i]
        piv = row[j]
        self.rows[i] = row = [value / piv for value in row]
        for k, other in enumerate(self.rows):
            if k != i and other[j] != 0:
                factor = other[j]
                self.rows[k] = [a - factor * b for a, b in zip(other, row)]
        self.basis[i] = j

    def reduced_costs(self, cost: Sequence[Fraction], columns: Sequence[int]) -> dict:
        reduced = {}
        for j in columns:
            value = cost[j]
            for i, b in enumerate(self.basis):
                if cost[b]:
                    value -= cost[b] * self.rows[i][j]
            reduced[j] = value
        return reduced

    def objective(self, cost: Sequence[Fraction]) -> Fraction:
        return sum((cost[b] * self.rows[i][-1] for i, b in enumerate(self.basis)), Fraction(0))

    def bland_primal(self, cost: Sequence[Fraction], columns: Sequence[int]) -> str:
        """Minimise cost over the allowed columns; returns 'optimal' or 'unbounded'."""
        iterations = 0
        while True:
            basic = set(self.basis)
            candidates = [j for j in columns if j not in basic]
            reduced = self.reduced_costs(cost, candidates)
            entering = [j for j in candidates if reduced[j] < 0]
            if not entering:
                logger.debug("simplex optimal after %d pivots", iterations)
                return "optimal"
            j = min(entering)
            try:
                _, _, i = min(
                    (row[-1] / row[j], self.basis[i], i)
                    for i, row in enumerate(self.rows)
                    if row[j] > 0
                )
            except ValueError:
                return "unbounded"
            self.pivot(i, j)
            iterations += 1

    def values(self) -> List[Fraction]:
        x = [Fraction(0)] * self.width
        for i, b in enumerate(self.basis):
            x[b] = self.rows[i][-1]
        return x


def _as_fractions(rows: Optional[Matrix]) -> List[List[Fraction]]:
    return [[Fraction(v) for v in row] for row in rows] if rows is not None else []


def linprog_exact(
    c: Sequence,
    A_ub: Optional[Matrix] = None,
    b_ub: Optional[Sequence] = None,
    A_eq: Optional[Matrix] = None,
    b_eq: Optional[Sequence] = None,
) -> LPResult:
    """
    Solve a linear program exactly.

    Args:
        c: objective coefficients (minimised).
        A_ub, b_ub: inequality constraints A_ub x <= b_ub.
        A_eq, b_eq: equality constraints.
    Returns:
        LPResult: status, optimal point and objective value when optimal.
    """
    c = [Fraction(v) for v in c]
    nx = len(c)
    ub = _as_fractions(A_ub)
    eq = _as_fractions(A_eq)
    b_ub = [Fraction(v) for v in (b_ub or [])]
    b_eq = [Fraction(v) for v in (b_eq or [])]
    if len(ub) != len(b_ub) or len(eq) != len(b_eq):
        raise ValueError("constraint matrices and right-hand sides differ in length")
    for row in ub + eq:
        if len(row) != nx:
            raise ValueError("constraint row length does not match the objective")

    m_ub, m = len(ub), len(ub) + len(eq)
    n_slack = m_ub
    n_cols = nx + n_slack + m
    rows: List[List[Fraction]] = []
    for i, (row, rhs) in enumerate(list(zip(ub, b_ub)) + list(zip(eq, b_eq))):
        full = list(row) + [Fraction(0)] * (n_slack + m) + [rhs]
        if i < m_ub:
            full[nx + i] = Fraction(1)
        if rhs < 0:
            full = [-v for v in full]
        full[nx + n_slack + i] = Fraction(1)
        rows.append(full)

    if m == 0:
        if any(v < 0 for v in c):
            return LPResult("unbounded")
        return LPResult("optimal", [Fraction(0)] * nx, Fraction(0))

    tableau = SimplexTableau(rows, [nx + n_slack + i for i in range(m)])
    artificial = set(range(nx + n_slack, n_cols))

    phase_one = [Fraction(1) if j in artificial else Fraction(0) for j in range(n_cols)]
    tableau.bland_primal(phase_one, range(n_cols))
    if tableau.objective(phase_one) > 0:
        return LPResult("infeasible")

    # drive zero-valued artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tableau.rows):
        if tableau.basis[i] in artificial:
            row = tableau.rows[i]
            pivot_col = next(
                (j for j in range(nx + n_slack) if row[j] != 0), None
            )
            if pivot_col is None:
                del tableau.rows[i]
                del tableau.basis[i]
                continue
            tableau.pivot(i, pivot_col)
        i += 1

    allowed = range(nx + n_slack)
    phase_two = c + [Fraction(0)] * (n_slack + m)
    if tableau.rows:
        status = tableau.bland_primal(phase_two, allowed)
    else:
        status = "unbounded" if any(v < 0 for v in c) else "optimal"
    if status == "unbounded":
        return LPResult("unbounded")
    x = tableau.values()[:nx] if tableau.rows else [Fraction(0)] * nx
    fun = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return LPResult("optimal", x, fun)


def maximin_value(points: Sequence[Sequence[int]]) -> Fraction:
    """
    max over a in the standard simplex of min over points p of a.p, exactly.

    Variables: a_1..a_n, t_plus, t_minus (t = t_plus - t_minus is free).
    """
    n = len(points[0])
    c = [Fraction(0)] * n + [Fraction(-1), Fraction(1)]
    A_ub = [[-Fraction(p_i) for p_i in p] + [Fraction(1), Fraction(-1)] for p in points]
    b_ub = [Fraction(0)] * len(points)
    A_eq = [[Fraction(1)] * n + [Fraction(0), Fraction(0)]]
    result = linprog_exact(c, A_ub, b_ub, A_eq, [Fraction(1)])
    if result.status != "optimal":
        raise ArithmeticError(f"maximin LP ended with status {result.status}")
    return -result.fun


def maximise_min_entry(A_eq: Matrix, b_eq: Sequence) -> Optional[List[Fraction]]:
    """
    Among x >= 0 with A_eq x = b_eq, one maximising min_i x_i (capped at 1).
    Returns None when the system has no nonnegative solution.
    """
    n = len(A_eq[0])
    c = [Fraction(0)] * n + [Fraction(-1)]
    A_ub = []
    for i in range(n):
        row = [Fraction(0)] * (n + 1)
        row[i] = Fraction(-1)
        row[n] = Fraction(1)
        A_ub.append(row)
    cap = [Fraction(0)] * n + [Fraction(1)]
    A_ub.append(cap)
    b_ub = [Fraction(0)] * n + [Fraction(1)]
    eq = [list(row) + [Fraction(0)] for row in A_eq]
    result = linprog_exact(c, A_ub, b_ub, eq, b_eq)
    if result.status != "optimal":
        return None
    return result.x[:n]
