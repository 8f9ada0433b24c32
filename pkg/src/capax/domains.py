"""Convex toric domains, concave pieces and their weight sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ValidationError
from .lattice_geom import (
    Point,
    RatPolygon,
    cross,
    hull,
    lattice_length,
    pt,
    rat,
    rational_gcd,
)

LATTICE = "lattice"
RATIONAL = "rational"

DEFAULT_DEPTH_CAP = 64


class DomainError(ValidationError):
    """Raised for inputs that do not describe a valid domain."""


def _clean_chain(chain: Sequence[Point]) -> list[Point]:
    out: list[Point] = []
    for p in chain:
        if out and out[-1] == p:
            continue
        while len(out) >= 2 and cross((out[-1][0] - out[-2][0], out[-1][1] - out[-2][1]),
                                      (p[0] - out[-1][0], p[1] - out[-1][1])) == 0:
            out.pop()
        out.append(p)
    return out


@dataclass(frozen=True)
class ConvexToricDomain:
    """Region bounded by the axes and a concave non-increasing vertex chain.

    ``chain`` runs from the vertex on the y-axis to the vertex on the x-axis.
    """

    chain: tuple[Point, ...]
    polygon: RatPolygon
    classification: str
    scale: Fraction
    primitive_lattice: RatPolygon

    @property
    def x_intercept(self) -> Fraction:
        return self.chain[-1][0]

    @property
    def y_intercept(self) -> Fraction:
        return self.chain[0][1]

    def scaled(self, q) -> "ConvexToricDomain":
        q = rat(q)
        return parse_domain([(q * x, q * y) for x, y in self.chain])

    def to_json(self):
        return {"vertices": [[[x.numerator, x.denominator], [y.numerator, y.denominator]] for x, y in self.chain]}


def parse_domain(vertices: Sequence) -> ConvexToricDomain:
    """Validate the non-axis boundary chain of a convex toric domain."""
    pts = [pt(v[0], v[1]) for v in vertices]
    if len(pts) < 2:
        raise DomainError("a domain needs at least two chain vertices (one on each axis)")
    for p in pts:
        if p[0] < 0 or p[1] < 0:
            raise DomainError(f"vertex {p[0]},{p[1]} lies outside the first quadrant")
    if pts[0][0] != 0 or pts[0][1] <= 0:
        raise DomainError("the chain must start at a point (0, b) with b > 0 on the y-axis")
    if pts[-1][1] != 0 or pts[-1][0] <= 0:
        raise DomainError("the chain must end at a point (a, 0) with a > 0 on the x-axis")
    pts = _clean_chain(pts)
    for i in range(len(pts) - 1):
        dx, dy = pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1]
        if dx < 0 or dy > 0:
            raise DomainError(f"chain is not monotone between vertices {i} and {i + 1}")
    for i in range(len(pts) - 2):
        e1 = (pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1])
        e2 = (pts[i + 2][0] - pts[i + 1][0], pts[i + 2][1] - pts[i + 1][1])
        if cross(e1, e2) > 0:
            raise DomainError(f"boundary is not concave at vertex {i + 1}")
    if len(pts) >= 2 and pts[1][0] == 0:
        raise DomainError("an initial vertical edge would lie on the y-axis")
    if pts[-2][1] == 0:
        raise DomainError("a final horizontal edge would lie on the x-axis")
    poly = hull([(Fraction(0), Fraction(0))] + pts)
    lattice = poly.is_lattice()
    den = math.lcm(*[c.denominator for p in pts for c in p])
    big = poly.scale(den)
    g = rational_gcd([lattice_length(e) for e in big.edges()])
    scale = Fraction(int(g), den)
    base = big.scale(Fraction(1, int(g)))
    return ConvexToricDomain(
        chain=tuple(pts),
        polygon=poly,
        classification=LATTICE if lattice else RATIONAL,
        scale=scale,
        primitive_lattice=base,
    )


def domain_from_json(data) -> ConvexToricDomain:
    if not isinstance(data, dict) or "vertices" not in data:
        raise DomainError("domain JSON must be an object with a 'vertices' list")
    return parse_domain([(v[0], v[1]) for v in data["vertices"]])


def is_primitive(domain: ConvexToricDomain) -> bool:
    if domain.classification != LATTICE:
        raise DomainError("primitivity is defined for lattice domains; use the detected scale instead")
    return rational_gcd([lattice_length(e) for e in domain.polygon.edges()]) == 1


@dataclass(frozen=True)
class WeightSequence:
    head: Optional[Fraction]
    weights: tuple[Fraction, ...]
    truncated: bool = False

    def sorted(self) -> "WeightSequence":
        return WeightSequence(self.head, tuple(sorted(self.weights, reverse=True)), self.truncated)

    def entries(self) -> list[Fraction]:
        return ([self.head] if self.head is not None else []) + list(self.weights)

    def to_json(self):
        enc = lambda q: [q.numerator, q.denominator]  # noqa: E731
        return {
            "head": None if self.head is None else enc(self.head),
            "weights": [enc(w) for w in sorted(self.weights, reverse=True)],
            "truncated": self.truncated,
        }


@dataclass
class ConcavePiece:
    """Region under a convex decreasing graph from (0, b) to (a, 0).

    The region is not convex, so it is kept as its graph rather than a
    RatPolygon; ``boundary`` is the closed loop through the origin.
    """

    graph: tuple[Point, ...]

    def __post_init__(self):
        g = _clean_chain([pt(p[0], p[1]) for p in self.graph])
        if g[0][0] != 0 or g[-1][1] != 0:
            raise DomainError("a concave piece graph must run from the y-axis to the x-axis")
        for i in range(len(g) - 2):
            e1 = (g[i + 1][0] - g[i][0], g[i + 1][1] - g[i][1])
            e2 = (g[i + 2][0] - g[i + 1][0], g[i + 2][1] - g[i + 1][1])
            if cross(e1, e2) < 0:
                raise DomainError("concave piece graph must be convex")
        self.graph = tuple(g)

    @property
    def boundary(self) -> tuple[Point, ...]:
        return ((Fraction(0), Fraction(0)),) + self.graph

    @property
    def area(self) -> Fraction:
        loop = self.boundary
        s = sum(cross(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop)))
        return abs(s) / 2

    @property
    def empty(self) -> bool:
        return self.area == 0


def _piece_or_none(graph: list[Point]) -> Optional[ConcavePiece]:
    graph = _clean_chain(graph)
    if len(graph) < 2:
        return None
    piece = ConcavePiece(tuple(graph))
    return None if piece.empty else piece


def concave_weights(piece: Optional[ConcavePiece], depth_cap: int = DEFAULT_DEPTH_CAP) -> WeightSequence:
    """Peel off the largest inscribed standard triangle and recurse on the two leftovers."""
    weights: list[Fraction] = []
    truncated = False
    stack = [(piece, 0)] if piece is not None and not piece.empty else []
    while stack:
        cur, depth = stack.pop()
        if depth >= depth_cap:
            truncated = True
            continue
        g = cur.graph
        sums = [x + y for x, y in g]
        a = min(sums)
        weights.append(a)
        first = sums.index(a)
        last = len(sums) - 1 - sums[::-1].index(a)
        left = _piece_or_none([(x, x + y - a) for x, y in g[: first + 1]])
        right = _piece_or_none([(x + y - a, y) for x, y in g[last:]])
        for nxt in (right, left):
            if nxt is not None:
                stack.append((nxt, depth + 1))
    return WeightSequence(None, tuple(sorted(weights, reverse=True)), truncated)


def convex_weights(domain: ConvexToricDomain, depth_cap: int = DEFAULT_DEPTH_CAP) -> WeightSequence:
    chain = domain.chain
    sums = [x + y for x, y in chain]
    c = max(sums)
    first = sums.index(c)
    last = len(sums) - 1 - sums[::-1].index(c)
    upper = _piece_or_none([(x, c - x - y) for x, y in chain[: first + 1]])
    lower = _piece_or_none([(c - x - y, y) for x, y in chain[last:]])
    ws: list[Fraction] = []
    truncated = False
    for piece in (upper, lower):
        if piece is None:
            continue
        w = concave_weights(piece, depth_cap)
        ws.extend(w.weights)
        truncated = truncated or w.truncated
    return WeightSequence(c, tuple(sorted(ws, reverse=True)), truncated)


def weight_gcd(w: WeightSequence):
    """Rational gcd of the head and all weights; ``math.inf`` for an empty sequence."""
    entries = w.entries()
    if not entries:
        return math.inf
    return rational_gcd(entries)


def triangle_piece(a, b) -> ConcavePiece:
    """The right triangle with legs a (along x) and b (along y)."""
    return ConcavePiece(((Fraction(0), rat(b)), (rat(a), Fraction(0))))
