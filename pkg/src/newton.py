"""
Exact Newton polyhedron geometry.

N(f) is the convex hull of the octants alpha + R>=0^n over the support of f.
Everything here runs in `Fraction` arithmetic: vertices come from LP
membership tests, facets from enumerating n-subsets of the generators
(vertices and coordinate directions) and keeping the valid inequalities with
nonnegative normals.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple, Union

from src.errors import GeometryError, PhaseInputError
from src.polynomial import Polynomial, weighted_derivatives
from src.rational import dot, nullspace, primitive, rank
from src.simplex import linprog_exact, maximin_value

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]


@dataclass(frozen=True)
class SupportSet:
    """Finite set of integer exponent vectors; entries may be negative for shifted supports."""

    dimension: int
    points: Tuple[Point, ...]

    def __post_init__(self):
        points = tuple(sorted({tuple(int(a) for a in p) for p in self.points}))
        for p in points:
            if len(p) != self.dimension:
                raise GeometryError(f"support point {p} does not have dimension {self.dimension}")
        object.__setattr__(self, "points", points)

    @classmethod
    def from_polynomial(cls, f: Polynomial) -> "SupportSet":
        return cls(f.dimension, tuple(f.support()))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]]) -> "SupportSet":
        points = [tuple(p) for p in points]
        if not points:
            raise GeometryError("support is empty")
        return cls(len(points[0]), tuple(points))

    def shifted(self, offset: int) -> "SupportSet":
        """Support translated by offset * (1, ..., 1)."""
        return SupportSet(self.dimension, tuple(tuple(a + offset for a in p) for p in self.points))

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class Facet:
    """The inequality normal . x >= offset with a primitive integer normal >= 0."""

    normal: Tuple[Fraction, ...]
    offset: Fraction

    def value(self, point: Sequence) -> Fraction:
        return dot(self.normal, point)

    def contains(self, point: Sequence) -> bool:
        return self.value(point) >= self.offset

    def is_tight(self, point: Sequence) -> bool:
        return self.value(point) == self.offset

    def to_dict(self) -> dict:
        return {"a": [str(a) for a in self.normal], "c": str(self.offset)}


@dataclass(frozen=True)
class NewtonData:
    support: SupportSet
    vertices: Tuple[Point, ...]
    facets: Tuple[Facet, ...]
    distance: Fraction
    diagonal_face_dim: int
    diagonal_face_support: Tuple[Point, ...]

    @property
    def dimension(self) -> int:
        return self.support.dimension

    def contains(self, point: Sequence) -> bool:
        return all(facet.contains(point) for facet in self.facets)

    def to_dict(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "facets": [facet.to_dict() for facet in self.facets],
            "d": str(self.distance),
            "k": self.diagonal_face_dim,
            "diagonal_face_support": [list(p) for p in self.diagonal_face_support],
        }


@dataclass(frozen=True)
class CompactFace:
    tight_support: Tuple[Point, ...]
    dim: int
    witness_normal: Tuple[Fraction, ...]
    vertices: Tuple[Point, ...] = field(default=())

    @property
    def level(self) -> Fraction:
        """Common value of witness_normal . alpha over the face."""
        return dot(self.witness_normal, self.tight_support[0])

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "tight_support": [list(p) for p in self.tight_support],
            "witness_normal": [str(a) for a in self.witness_normal],
        }


@dataclass(frozen=True)
class DoublingResult:
    d_f: Fraction
    d_g: Fraction
    d_h: Fraction
    passed: bool

    def to_dict(self) -> dict:
        return {"d_f": str(self.d_f), "d_g": str(self.d_g), "d_h": str(self.d_h), "pass": self.passed}


def _as_support(support: Union[SupportSet, Polynomial, Iterable[Sequence[int]]]) -> SupportSet:
    if isinstance(support, SupportSet):
        result = support
    elif isinstance(support, Polynomial):
        result = SupportSet.from_polynomial(support)
    else:
        result = SupportSet.from_points(support)
    if not result.points:
        raise GeometryError("support is empty")
    return result


def _is_vertex(point: Point, others: Sequence[Point]) -> bool:
    """True when point lies outside conv(others) + R>=0^n."""
    if not others:
        return True
    if any(all(o <= p for o, p in zip(other, point)) for other in others):
        return False
    n = len(point)
    m = len(others)
    A_ub = [[Fraction(other[i]) for other in others] for i in range(n)]
    b_ub = [Fraction(p) for p in point]
    A_eq = [[Fraction(1)] * m]
    result = linprog_exact([0] * m, A_ub, b_ub, A_eq, [1])
    return not result.feasible


def _vertices(points: Sequence[Point]) -> List[Point]:
    return [p for p in points if _is_vertex(p, [q for q in points if q != p])]


def _generator_row(generator: Tuple[str, Point], n: int) -> List[Fraction]:
    kind, value = generator
    if kind == "vertex":
        return [Fraction(v) for v in value] + [Fraction(-1)]
    row = [Fraction(0)] * (n + 1)
    row[value[0]] = Fraction(1)
    return row


def _facets(vertices: Sequence[Point], n: int) -> List[Facet]:
    generators = [("vertex", v) for v in vertices] + [("direction", (i,)) for i in range(n)]
    found: Dict[Tuple, Facet] = {}
    for subset in combinations(generators, n):
        if not any(kind == "vertex" for kind, _ in subset):
            continue
        rows = [_generator_row(g, n) for g in subset]
        if rank(rows, n + 1) != n:
            continue
        (solution,) = nullspace(rows, n + 1)
        normal, offset = solution[:n], solution[n]
        if all(a <= 0 for a in normal):
            normal, offset = [-a for a in normal], -offset
        if any(a < 0 for a in normal) or all(a == 0 for a in normal):
            continue
        if any(dot(normal, v) < offset for v in vertices):
            continue
        scaled = primitive(list(normal) + [offset])
        facet = Facet(tuple(scaled[:n]), scaled[n])
        found[(facet.normal, facet.offset)] = facet
    return [found[key] for key in sorted(found)]


def ray_shoot_distance(facets: Sequence[Facet]) -> Fraction:
    """Smallest t with t*(1,...,1) satisfying every facet inequality."""
    return max(facet.offset / sum(facet.normal) for facet in facets if sum(facet.normal) > 0)


def _diagonal_face(
    points: Sequence[Point], facets: Sequence[Facet], distance: Fraction, n: int
) -> Tuple[int, Tuple[Point, ...]]:
    diagonal = [distance] * n
    tight = [facet for facet in facets if facet.is_tight(diagonal)]
    k = n - rank([list(facet.normal) for facet in tight], n)
    on_face = tuple(p for p in points if all(facet.is_tight(p) for facet in tight))
    return k, on_face


def build_newton(support: Union[SupportSet, Polynomial, Iterable[Sequence[int]]]) -> NewtonData:
    """
    Build the Newton polyhedron of a support set.

    Args:
        support: SupportSet, Polynomial or iterable of exponent vectors.
    Returns:
        NewtonData: vertices, irredundant facets, distance d and diagonal face.
    Raises:
        GeometryError: if the support is empty.
    """
    support = _as_support(support)
    n = support.dimension
    vertices = _vertices(support.points)
    facets = _facets(vertices, n)
    distance = ray_shoot_distance(facets)
    k, on_face = _diagonal_face(support.points, facets, distance, n)
    logger.debug("newton: %d vertices, %d facets, d=%s, k=%d", len(vertices), len(facets), distance, k)
    return NewtonData(support, tuple(vertices), tuple(facets), distance, k, on_face)


def newton_distance(nd: NewtonData) -> Fraction:
    """
    d(f) from the maximin LP over the standard simplex, checked exactly against
    the ray-shoot of the diagonal through the facet system.
    """
    value = maximin_value(nd.support.points)
    shot = ray_shoot_distance(nd.facets)
    if value != shot:
        raise ArithmeticError(f"maximin value {value} disagrees with ray-shoot {shot}")
    return value


def diagonal_face(nd: NewtonData) -> Tuple[int, Tuple[Point, ...]]:
    return nd.diagonal_face_dim, nd.diagonal_face_support


def _face_generators(nd: NewtonData, facet_ids: FrozenSet[int]):
    vertices = frozenset(
        v for v in nd.vertices if all(nd.facets[j].is_tight(v) for j in facet_ids)
    )
    directions = frozenset(
        i for i in range(nd.dimension) if all(nd.facets[j].normal[i] == 0 for j in facet_ids)
    )
    return vertices, directions


def _closure(nd: NewtonData, vertices: FrozenSet[Point], directions: FrozenSet[int]) -> FrozenSet[int]:
    return frozenset(
        j
        for j, facet in enumerate(nd.facets)
        if all(facet.is_tight(v) for v in vertices) and all(facet.normal[i] == 0 for i in directions)
    )


def _affine_dim(points: Sequence[Point]) -> int:
    base = points[0]
    return rank([[a - b for a, b in zip(p, base)] for p in points[1:]], len(base)) if len(points) > 1 else 0


def compact_faces(nd: NewtonData) -> List[CompactFace]:
    """
    All faces of N(f) exposed by a strictly positive normal, vertices included.

    Faces are intersections of facets; a face is compact exactly when the sum of
    the normals of the facets containing it is positive in every coordinate,
    and that sum then exposes the face.
    """
    seen = set()
    queue = deque()
    for j in range(len(nd.facets)):
        vertices, directions = _face_generators(nd, frozenset([j]))
        ids = _closure(nd, vertices, directions)
        if ids not in seen:
            seen.add(ids)
            queue.append((ids, vertices, directions))
    faces: List[CompactFace] = []
    while queue:
        ids, vertices, directions = queue.popleft()
        witness = tuple(sum((nd.facets[j].normal[i] for j in ids), Fraction(0)) for i in range(nd.dimension))
        if all(w > 0 for w in witness):
            faces.append(_make_face(nd, vertices, witness))
        for j, facet in enumerate(nd.facets):
            if j in ids:
                continue
            sub_vertices = frozenset(v for v in vertices if facet.is_tight(v))
            if not sub_vertices:
                continue
            sub_directions = frozenset(i for i in directions if facet.normal[i] == 0)
            sub_ids = _closure(nd, sub_vertices, sub_directions)
            if sub_ids not in seen:
                seen.add(sub_ids)
                queue.append((sub_ids, sub_vertices, sub_directions))
    faces.sort(key=lambda face: (face.dim, face.tight_support))
    return faces


def _make_face(nd: NewtonData, vertices: FrozenSet[Point], witness: Tuple[Fraction, ...]) -> CompactFace:
    witness = primitive(witness)
    level = min(dot(witness, p) for p in nd.support.points)
    tight = tuple(p for p in nd.support.points if dot(witness, p) == level)
    if not set(vertices) <= set(tight):
        raise ArithmeticError("witness normal does not expose the face's vertices")
    ordered = tuple(sorted(vertices))
    return CompactFace(tight, _affine_dim(ordered), witness, ordered)


def face_polynomial(f: Polynomial, face: CompactFace) -> Polynomial:
    """
    f_F: the terms of f whose exponents lie on the compact face F.

    Raises:
        GeometryError: if F is not exposed by its witness normal on f's support.
    """
    support = f.support()
    if not support:
        raise GeometryError("face polynomial of the zero polynomial")
    if len(face.witness_normal) != f.dimension:
        raise GeometryError("face and polynomial differ in dimension")
    level = min(dot(face.witness_normal, alpha) for alpha in support)
    tight = tuple(alpha for alpha in support if dot(face.witness_normal, alpha) == level)
    if tight != tuple(face.tight_support):
        raise GeometryError("face does not belong to the Newton polyhedron of this polynomial")
    return Polynomial(f.dimension, {alpha: f.terms[alpha] for alpha in tight})


def flow_square(f: Polynomial) -> Polynomial:
    """g = sum_i (x_i df/dx_i)^2, exactly."""
    total = Polynomial.zero(f.dimension)
    for w in weighted_derivatives(f):
        total = total + w * w
    return total


def flow_quotient_support(f: Polynomial) -> SupportSet:
    """Support of h = g / prod x_i^2; entries may go down to -2."""
    g = flow_square(f)
    if g.is_zero():
        raise GeometryError("flow square of a constant phase is zero")
    return SupportSet.from_polynomial(g).shifted(-2)


def doubling_check(f: Polynomial) -> DoublingResult:
    """
    Compare d(g) with 2 d(f) for g = sum (x_i df/dx_i)^2, and compute d(h)
    directly from the shifted support of h = g / prod x_i^2.
    """
    if f.is_zero():
        raise PhaseInputError("doubling check needs a nonzero phase")
    d_f = build_newton(f).distance
    g = flow_square(f)
    d_g = build_newton(g).distance
    d_h = build_newton(flow_quotient_support(f)).distance
    if d_h != d_g - 2:
        raise ArithmeticError(f"shifted distance {d_h} differs from d(g) - 2 = {d_g - 2}")
    return DoublingResult(d_f, d_g, d_h, d_g == 2 * d_f)
