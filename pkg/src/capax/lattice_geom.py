"""Exact rational plane geometry for convex polygons.

Points are plain ``(Fraction, Fraction)`` tuples.  Polygons are stored
counterclockwise starting at the lexicographically smallest vertex, with
collinear vertices removed, so equal polygons compare equal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

from .errors import ValidationError

Point = tuple[Fraction, Fraction]

POINT = "point"
SEGMENT = "segment"
FULL = "full"


def rat(value) -> Fraction:
    """Coerce ints, strings, Fractions and ``[num, den]`` pairs to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"rational pair must have two entries, got {value!r}")
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, float):
        raise ValidationError("floats are not accepted as exact rationals")
    return Fraction(value)


def pt(x, y) -> Point:
    return (rat(x), rat(y))


def cross(u: Sequence, v: Sequence):
    return u[0] * v[1] - u[1] * v[0]


def _sub(p, q):
    return (p[0] - q[0], p[1] - q[1])


def _add(p, q):
    return (p[0] + q[0], p[1] + q[1])


def half_plane_index(v) -> int:
    """0 for directions with angle in (-pi/2, pi/2], 1 for the rest."""
    return 0 if (v[0] > 0 or (v[0] == 0 and v[1] > 0)) else 1


def angle_cmp(u, v) -> int:
    """Total order on nonzero directions by angle in (-pi/2, 3pi/2]."""
    hu, hv = half_plane_index(u), half_plane_index(v)
    if hu != hv:
        return -1 if hu < hv else 1
    c = cross(u, v)
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


angle_key = cmp_to_key(angle_cmp)


@dataclass(frozen=True)
class RatPolygon:
    vertices: tuple[Point, ...]

    @property
    def degeneracy(self) -> str:
        n = len(self.vertices)
        return POINT if n == 1 else SEGMENT if n == 2 else FULL

    def edges(self) -> list[tuple[Fraction, Fraction]]:
        """Counterclockwise edge vectors (a segment yields both orientations)."""
        vs = self.vertices
        if len(vs) == 1:
            return []
        return [_sub(vs[(i + 1) % len(vs)], vs[i]) for i in range(len(vs))]

    def clockwise_edges(self):
        return [(-e[0], -e[1]) for e in reversed(self.edges())]

    def is_lattice(self) -> bool:
        return all(c.denominator == 1 for p in self.vertices for c in p)

    def bbox(self):
        xs = [p[0] for p in self.vertices]
        ys = [p[1] for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def translate(self, t) -> "RatPolygon":
        t = (rat(t[0]), rat(t[1]))
        return RatPolygon(tuple(_add(p, t) for p in self.vertices))

    def scale(self, q) -> "RatPolygon":
        q = rat(q)
        if q < 0:
            raise ValidationError("scale factor must be nonnegative")
        if q == 0:
            return RatPolygon(((Fraction(0), Fraction(0)),))
        return RatPolygon(tuple((q * p[0], q * p[1]) for p in self.vertices))

    def normalized(self) -> "RatPolygon":
        """Translate so the canonical start vertex sits at the origin."""
        x0, y0 = self.vertices[0]
        return self.translate((-x0, -y0))

    def contains(self, p) -> bool:
        p = (rat(p[0]), rat(p[1]))
        vs = self.vertices
        if len(vs) == 1:
            return p == vs[0]
        if len(vs) == 2:
            a, b = vs
            if cross(_sub(b, a), _sub(p, a)) != 0:
                return False
            return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
        return all(cross(_sub(vs[(i + 1) % len(vs)], vs[i]), _sub(p, vs[i])) >= 0 for i in range(len(vs)))

    def to_json(self):
        return [[[p[0].numerator, p[0].denominator], [p[1].numerator, p[1].denominator]] for p in self.vertices]

    def __str__(self) -> str:
        return " ".join(f"({p[0]},{p[1]})" for p in self.vertices)


def polygon_from_json(data) -> RatPolygon:
    return hull([pt(p[0], p[1]) for p in data])


def hull(points: Iterable) -> RatPolygon:
    """Convex hull in canonical form (Andrew's monotone chain)."""
    pts = sorted({(rat(p[0]), rat(p[1])) for p in points})
    if not pts:
        raise ValidationError("hull of an empty point set is undefined")
    if len(pts) <= 2:
        return RatPolygon(tuple(pts))

    def chain(seq):
        out: list[Point] = []
        for p in seq:
            while len(out) >= 2 and cross(_sub(out[-1], out[-2]), _sub(p, out[-2])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    ring = lower[:-1] + upper[:-1]
    if len(ring) == 2 and ring[0] == ring[1]:
        ring = ring[:1]
    return RatPolygon(tuple(ring))


def polygon_from_edges(start: Point, edges: Sequence) -> RatPolygon:
    """Walk a closed sequence of edge vectors from ``start``."""
    pts = [start]
    cur = start
    for e in edges:
        cur = _add(cur, e)
        pts.append(cur)
    if pts[-1] != start:
        raise ValidationError("edge vectors do not close up")
    return hull(pts)


def area(P: RatPolygon) -> Fraction:
    vs = P.vertices
    if len(vs) < 3:
        return Fraction(0)
    s = sum(cross(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs)))
    return Fraction(s) / 2


def _column_range(P: RatPolygon, x: Fraction):
    ys = []
    vs = P.vertices
    n = len(vs)
    for i in range(n):
        p, q = vs[i], vs[(i + 1) % n]
        if p[0] == x:
            ys.append(p[1])
        if (p[0] < x < q[0]) or (q[0] < x < p[0]):
            ys.append(p[1] + (q[1] - p[1]) * (x - p[0]) / (q[0] - p[0]))
    if not ys:
        return None
    return min(ys), max(ys)


def lattice_count_scan(P: RatPolygon) -> int:
    """Count integer points column by column across the bounding box."""
    x0, _, x1, _ = P.bbox()
    total = 0
    for x in range(math.ceil(x0), math.floor(x1) + 1):
        r = _column_range(P, Fraction(x))
        if r is None:
            continue
        lo, hi = math.ceil(r[0]), math.floor(r[1])
        if hi >= lo:
            total += hi - lo + 1
    return total


def boundary_lattice_points(P: RatPolygon) -> int:
    """Number of lattice points on the boundary of a lattice polygon."""
    edges = P.edges()
    if not edges:
        return 1
    if len(P.vertices) == 2:
        return int(lattice_length(edges[0])) + 1
    return sum(int(lattice_length(e)) for e in edges)


def lattice_count_pick(P: RatPolygon) -> int:
    """Pick's theorem; only valid for polygons with integral vertices."""
    if not P.is_lattice():
        raise ValidationError("Pick's theorem needs integral vertices")
    b = boundary_lattice_points(P)
    if len(P.vertices) <= 2:
        return b
    twice_interior = 2 * area(P) - b + 2
    return int(twice_interior / 2) + b


def lattice_count(P: RatPolygon) -> int:
    if P.is_lattice():
        return lattice_count_pick(P)
    return lattice_count_scan(P)


def lattice_points(P: RatPolygon) -> list[tuple[int, int]]:
    x0, _, x1, _ = P.bbox()
    out = []
    for x in range(math.ceil(x0), math.floor(x1) + 1):
        r = _column_range(P, Fraction(x))
        if r is None:
            continue
        out.extend((x, y) for y in range(math.ceil(r[0]), math.floor(r[1]) + 1))
    return out


def minkowski_sum(P: RatPolygon, Q: RatPolygon) -> RatPolygon:
    """Merge the two edge sequences by angle, starting from the sum of start vertices."""
    edges = sorted(P.edges() + Q.edges(), key=angle_key)
    start = _add(P.vertices[0], Q.vertices[0])
    pts = [start]
    cur = start
    for e in edges:
        cur = _add(cur, e)
        pts.append(cur)
    return hull(pts)


def mixed_volume(P: RatPolygon, Q: RatPolygon) -> Fraction:
    return area(minkowski_sum(P, Q)) - area(P) - area(Q)


def rational_gcd(values: Iterable) -> Fraction:
    """Largest t > 0 with every value an integer multiple of t (0 if all zero)."""
    vals = [rat(v) for v in values]
    den = math.lcm(*[v.denominator for v in vals]) if vals else 1
    g = 0
    for v in vals:
        g = math.gcd(g, abs(v.numerator * (den // v.denominator)))
    return Fraction(g, den)


def lattice_length(v) -> Fraction:
    return rational_gcd([v[0], v[1]])


def primitive(v) -> tuple[int, int]:
    """The primitive integer vector pointing along a nonzero rational vector."""
    t = lattice_length(v)
    if t == 0:
        raise ValidationError("zero vector has no direction")
    return (int(rat(v[0]) / t), int(rat(v[1]) / t))


def support(P: RatPolygon, n) -> Fraction:
    """max over P of <n, p>."""
    return max(n[0] * p[0] + n[1] * p[1] for p in P.vertices)


def omega_length(omega: RatPolygon, v) -> Fraction:
    """Omega-length of an edge vector: max over p in omega of v x p."""
    if v[0] == 0 and v[1] == 0:
        raise ValidationError("omega_length needs a nonzero vector")
    return max(v[0] * p[1] - v[1] * p[0] for p in omega.vertices)


def omega_perimeter(omega: RatPolygon, lam: RatPolygon) -> Fraction:
    return sum((omega_length(omega, e) for e in lam.clockwise_edges() if e != (0, 0)), Fraction(0))


def lattice_perimeter(P: RatPolygon) -> Fraction:
    return sum((lattice_length(e) for e in P.edges()), Fraction(0))
