"""Toric surfaces from convex domains: fans, divisors, polytopes and capacities.

A torus-invariant divisor is stored as its support vector ``a`` (one entry
per ray) and has polytope ``P(D) = {m : <m, u_rho> >= -a_rho}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Optional, Sequence

from .domains import ConvexToricDomain
from .errors import ValidationError
from .lattice_geom import (
    RatPolygon,
    cross,
    hull,
    lattice_count,
    lattice_points,
    mixed_volume,
    primitive,
    rat,
)

Ray = tuple[int, int]


def _ray_cmp(u, v) -> int:
    # counterclockwise from the positive x-axis, angle in [0, 2pi)
    hu = 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1
    hv = 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1
    if hu != hv:
        return hu - hv
    c = cross(u, v)
    return -1 if c > 0 else (1 if c < 0 else 0)


ray_key = cmp_to_key(_ray_cmp)


def det(u, v):
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class ToricSurfaceData:
    rays: tuple[Ray, ...]
    polarisation: tuple[Fraction, ...]

    def __post_init__(self):
        rays = self.rays
        if len(rays) < 3:
            raise ValidationError("a complete fan needs at least three rays")
        if len(rays) != len(self.polarisation):
            raise ValidationError("polarisation must give one support value per ray")
        for u in rays:
            if math.gcd(u[0], u[1]) != 1:
                raise ValidationError(f"ray {u} is not a primitive integer vector")
        if list(rays) != sorted(rays, key=ray_key) or len(set(rays)) != len(rays):
            raise ValidationError("rays must be distinct and sorted counterclockwise")
        for i in range(len(rays)):
            if det(rays[i], rays[(i + 1) % len(rays)]) <= 0:
                raise ValidationError("consecutive rays must span strictly convex cones (fan not complete)")

    @property
    def n(self) -> int:
        return len(self.rays)

    def divisor(self, support) -> "ToricDivisor":
        return ToricDivisor(tuple(rat(a) for a in support))

    @property
    def A(self) -> "ToricDivisor":
        return ToricDivisor(self.polarisation)

    @property
    def anticanonical(self) -> "ToricDivisor":
        return ToricDivisor(tuple(Fraction(1) for _ in self.rays))

    def is_smooth(self) -> bool:
        return all(det(self.rays[i], self.rays[(i + 1) % self.n]) == 1 for i in range(self.n))

    def to_json(self):
        return {
            "rays": [list(u) for u in self.rays],
            "polarisation": [[a.numerator, a.denominator] for a in self.polarisation],
        }


@dataclass(frozen=True)
class ToricDivisor:
    support: tuple[Fraction, ...]

    @property
    def integrality(self) -> str:
        return "Z" if all(a.denominator == 1 for a in self.support) else "Q"

    def __add__(self, other):
        return ToricDivisor(tuple(a + b for a, b in zip(self.support, other.support)))

    def __sub__(self, other):
        return ToricDivisor(tuple(a - b for a, b in zip(self.support, other.support)))

    def __mul__(self, q):
        q = rat(q)
        return ToricDivisor(tuple(q * a for a in self.support))

    __rmul__ = __mul__


def surface_from_json(data) -> ToricSurfaceData:
    try:
        rays = [(int(u[0]), int(u[1])) for u in data["rays"]]
        pol = [rat(a) for a in data["polarisation"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"surface JSON needs 'rays' and 'polarisation': {exc}") from exc
    order = sorted(range(len(rays)), key=lambda i: ray_key(rays[i]))
    return ToricSurfaceData(tuple(rays[i] for i in order), tuple(pol[i] for i in order))


def normal_fan(domain: ConvexToricDomain) -> ToricSurfaceData:
    """Inner normal fan of the full domain polygon, with its own support vector."""
    poly = domain.polygon
    pairs = []
    for e in poly.edges():
        u = primitive((-e[1], e[0]))
        a = -min(u[0] * p[0] + u[1] * p[1] for p in poly.vertices)
        pairs.append((u, a))
    pairs.sort(key=lambda t: ray_key(t[0]))
    return ToricSurfaceData(tuple(u for u, _ in pairs), tuple(a for _, a in pairs))


# ---------------------------------------------------------------------------
# intersection form on invariant divisors

def gram_matrix(Y: ToricSurfaceData) -> list[list[Fraction]]:
    n = Y.n
    r = Y.rays
    G = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        prev, nxt = r[i - 1], r[(i + 1) % n]
        G[i][i] = Fraction(-det(prev, nxt), det(prev, r[i]) * det(r[i], nxt))
        j = (i + 1) % n
        G[i][j] = Fraction(1, det(r[i], r[j]))
        G[j][i] = G[i][j]
    return G


def bilinear(G, a, b) -> Fraction:
    return sum((a[i] * G[i][j] * b[j] for i in range(len(a)) for j in range(len(b)) if G[i][j]), Fraction(0))


def curve_degrees(D: ToricDivisor, Y: ToricSurfaceData, G=None) -> list[Fraction]:
    """D . D_rho for every ray."""
    G = G or gram_matrix(Y)
    return [sum((D.support[j] * G[i][j] for j in range(Y.n)), Fraction(0)) for i in range(Y.n)]


# ---------------------------------------------------------------------------
# polytopes

def _clip(poly: list, u, c) -> list:
    """Keep the part of a convex ring with <m, u> >= c."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = u[0] * p[0] + u[1] * p[1] - c
        fq = u[0] * q[0] + u[1] * q[1] - c
        if fp >= 0:
            out.append(p)
        if (fp > 0 > fq) or (fp < 0 < fq):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def polytope_of(D: ToricDivisor, Y: ToricSurfaceData) -> Optional[RatPolygon]:
    """Exact halfplane intersection; None when empty."""
    big = 2 * (max((abs(a) for a in D.support), default=0) + 1) * max(max(abs(u[0]), abs(u[1])) for u in Y.rays) + 1
    big = Fraction(big)
    ring = [(-big, -big), (big, -big), (big, big), (-big, big)]
    for u, a in zip(Y.rays, D.support):
        ring = _clip(ring, u, -a)
        if not ring:
            return None
    return hull(ring)


def polytope_of_nef(D: ToricDivisor, Y: ToricSurfaceData) -> RatPolygon:
    """Vertices of P(D) for nef D: intersections of consecutive facet lines."""
    r, a = Y.rays, D.support
    pts = []
    for i in range(Y.n):
        u, v = r[i], r[(i + 1) % Y.n]
        d = det(u, v)
        # <m,u> = -a_i and <m,v> = -a_{i+1}
        bu, bv = -a[i], -a[(i + 1) % Y.n]
        pts.append(((bu * v[1] - bv * u[1]) / d, (u[0] * bv - v[0] * bu) / d))
    return hull(pts)


def _facet_minima(P: RatPolygon, Y: ToricSurfaceData) -> list[Fraction]:
    return [min(u[0] * p[0] + u[1] * p[1] for p in P.vertices) for u in Y.rays]


def is_nef(D: ToricDivisor, Y: ToricSurfaceData) -> bool:
    P = polytope_of(D, Y)
    if P is None:
        return False
    return all(mn == -a for mn, a in zip(_facet_minima(P, Y), D.support))


def h0(D: ToricDivisor, Y: ToricSurfaceData) -> int:
    """Number of lattice points of P(D); for Q-divisors this is the count for the round-down."""
    P = polytope_of(D, Y)
    return 0 if P is None else lattice_count(P)


def round_down(D: ToricDivisor) -> ToricDivisor:
    return ToricDivisor(tuple(Fraction(math.floor(a)) for a in D.support))


def repair_round_down(D: ToricDivisor, Y: ToricSurfaceData) -> ToricDivisor:
    """Nef Z-divisor with the same lattice points as the round-down of D.

    Each facet hyperplane of the round-down is pushed inward until it meets a
    lattice point; the lattice point set is untouched.
    """
    F = round_down(D)
    P = polytope_of(F, Y)
    if P is None:
        raise ValidationError("round-down has no lattice points to repair towards")
    pts = lattice_points(P)
    if not pts:
        raise ValidationError("round-down has no lattice points to repair towards")
    return ToricDivisor(tuple(Fraction(-min(u[0] * x + u[1] * y for x, y in pts)) for u in Y.rays))


def intersect(D: ToricDivisor, E: ToricDivisor, Y: ToricSurfaceData) -> Fraction:
    """Intersection number; mixed volume of polytopes for nef pairs.

    Non-nef arguments are shifted by multiples of the polarisation until nef
    and the product is expanded bilinearly.  If the polarisation is not
    ample (zero on some ray) the fan intersection form is used instead.
    """
    A = Y.A
    nd, ne = is_nef(D, Y), is_nef(E, Y)
    if nd and ne:
        return mixed_volume(polytope_of(D, Y), polytope_of(E, Y))
    G = gram_matrix(Y)
    if any(x <= 0 for x in curve_degrees(A, Y, G)):
        return bilinear(G, D.support, E.support)

    def shift(X):
        m = 0
        degs = curve_degrees(X, Y, G)
        adeg = curve_degrees(A, Y, G)
        for dx, da in zip(degs, adeg):
            if dx < 0:
                m = max(m, math.ceil(-dx / da))
        return m

    m1, m2 = shift(D), shift(E)
    D1, E1 = D + A * m1, E + A * m2
    PA = polytope_of(A, Y)
    P1, P2 = polytope_of(D1, Y), polytope_of(E1, Y)
    a2 = 2 * _area(PA)
    return mixed_volume(P1, P2) - m2 * mixed_volume(P1, PA) - m1 * mixed_volume(PA, P2) + m1 * m2 * a2


def _area(P):
    from .lattice_geom import area

    return area(P)


def self_intersection(D: ToricDivisor, Y: ToricSurfaceData) -> Fraction:
    return intersect(D, D, Y)


# ---------------------------------------------------------------------------
# refinements

def support_value(P: RatPolygon, u) -> Fraction:
    return -min(u[0] * p[0] + u[1] * p[1] for p in P.vertices)


def refine(Y: ToricSurfaceData, new_rays: Sequence[Ray]) -> ToricSurfaceData:
    """Add rays to the fan and pull back the polarisation."""
    rays = list(Y.rays)
    for u in new_rays:
        u = (int(u[0]), int(u[1]))
        if math.gcd(*u) != 1:
            raise ValidationError(f"ray {u} is not primitive")
        if u not in rays:
            rays.append(u)
    rays.sort(key=ray_key)
    Yr_tmp = ToricSurfaceData(tuple(rays), tuple(Fraction(0) for _ in rays))
    A = pullback(Y.A, Y, Yr_tmp)
    return ToricSurfaceData(tuple(rays), A.support)


def pullback(D: ToricDivisor, Y: ToricSurfaceData, Y_refined: ToricSurfaceData) -> ToricDivisor:
    if not set(Y.rays) <= set(Y_refined.rays):
        raise ValidationError("refined fan must contain every original ray")
    if not is_nef(D, Y):
        raise ValidationError("pullback is implemented for nef divisors only")
    P = polytope_of(D, Y)
    return ToricDivisor(tuple(support_value(P, u) for u in Y_refined.rays))


def _smooth_ray(u, v) -> Ray:
    """A lattice vector w inside cone(u, v) with det(u, w) = 1."""
    d = det(u, v)
    # solve det(u, w0) = 1 via extended gcd on u
    g, s, t = _egcd(u[0], u[1])
    # u0*y - u1*x = 1 -> x = -t, y = s
    w0 = (-t, s)
    # move along u so that 0 < det(w, v) < d
    base = det(w0, v)
    shift = (-base // d) + 1 if base <= 0 else -((base - 1) // d)
    w = (w0[0] + shift * u[0], w0[1] + shift * u[1])
    assert det(u, w) == 1 and 0 < det(w, v) < d
    return w


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def smooth_resolution(Y: ToricSurfaceData) -> ToricSurfaceData:
    rays = list(Y.rays)
    changed = True
    while changed:
        changed = False
        for i in range(len(rays)):
            u, v = rays[i], rays[(i + 1) % len(rays)]
            if det(u, v) > 1:
                rays.insert(i + 1, _smooth_ray(u, v))
                changed = True
                break
    return refine(Y, [r for r in rays if r not in Y.rays])


# ---------------------------------------------------------------------------
# capacity solver

@dataclass(frozen=True)
class ToricOptimum:
    k: int
    value: Fraction
    witness: ToricDivisor
    h0: int


def _longest_chord(P: RatPolygon, horizontal: bool) -> Fraction:
    from .lattice_geom import _column_range

    best = Fraction(0)
    for p in P.vertices:
        if horizontal:
            Q = RatPolygon(tuple((v[1], v[0]) for v in P.vertices))
            r = _column_range(Q, p[1]) if len(Q.vertices) else None
        else:
            r = _column_range(P, p[0])
        if r is not None:
            best = max(best, r[1] - r[0])
    return best


def _unimodular_frame(Y: ToricSurfaceData):
    """Indices (p, q) with rays[p], rays[q] a lattice basis, preferring (1,0),(0,1)."""
    r = Y.rays
    if (1, 0) in r and (0, 1) in r:
        return r.index((1, 0)), r.index((0, 1))
    for i in range(Y.n):
        for j in range(Y.n):
            if i != j and det(r[i], r[j]) == 1:
                return i, j
    raise ValidationError("fan has no pair of rays forming a lattice basis; refine it first")


class NefEnumerator:
    """Enumerates nef divisors with supports on a grid of the given step.

    The translation symmetry is removed by pinning the supports on a basis
    pair of rays to [0, 1).  Candidates are pruned by local nef inequalities
    and by the linear objective D.A.
    """

    def __init__(self, Y: ToricSurfaceData, step: Fraction = Fraction(1)):
        self.Y = Y
        self.step = Fraction(step)
        if Fraction(1) / self.step != int(Fraction(1) / self.step):
            raise ValidationError("step must be 1/n for a positive integer n")
        self.G = gram_matrix(Y)
        self.adeg = curve_degrees(Y.A, Y, self.G)
        if any(x < 0 for x in self.adeg):
            raise ValidationError("polarisation is not nef")
        self.PA = polytope_of(Y.A, Y)
        if self.PA is None or self.PA.degeneracy != "full":
            raise ValidationError("polarisation polytope must be two-dimensional (A big)")
        self.p, self.q = _unimodular_frame(Y)

    def objective(self, support) -> Fraction:
        return sum((a * d for a, d in zip(support, self.adeg)), Fraction(0))

    def _grid(self, lo, hi):
        s = self.step
        start = math.ceil(lo / s)
        stop = math.floor(hi / s)
        return [s * i for i in range(start, stop + 1)]

    def enumerate(self, bound: Fraction):
        """Yield (support, polytope) for every nef divisor in the fundamental domain with D.A <= bound."""
        Y, G, n = self.Y, self.G, self.Y.n
        r = Y.rays
        up, uq = r[self.p], r[self.q]
        # coordinates x = <m, up>, y = <m, uq> turn the pinned facets into axis lines
        PA_coords = RatPolygon(tuple((up[0] * v[0] + up[1] * v[1], uq[0] * v[0] + uq[1] * v[1]) for v in self.PA.vertices))
        PA_coords = hull(PA_coords.vertices)
        wv = _longest_chord(PA_coords, horizontal=False)
        wh = _longest_chord(PA_coords, horizontal=True)
        width = bound / wv if wv else Fraction(0)
        height = bound / wh if wh else Fraction(0)
        # in these coordinates ray u has components (alpha, beta) with u = alpha*up' + ...
        # express each ray as <m,u> = c1*<m,up> + c2*<m,uq>
        dpq = det(up, uq)
        comps = []
        for u in r:
            c1 = Fraction(det(u, uq), dpq)
            c2 = Fraction(det(up, u), dpq)
            comps.append((c1, c2))
        offsets = [self.step * i for i in range(int(1 / self.step))]
        ranges: list[list[Fraction]] = [None] * n  # type: ignore[list-item]
        for i in range(n):
            if i in (self.p, self.q):
                continue
            c1, c2 = comps[i]
            corners = []
            for ap in (Fraction(0), Fraction(1)):
                for aq in (Fraction(0), Fraction(1)):
                    for X in (-ap, -ap + width):
                        for Yv in (-aq, -aq + height):
                            corners.append(c1 * X + c2 * Yv)
            ranges[i] = (-max(corners), -min(corners))
        lo_contrib = [Fraction(0)] * n
        for i in range(n):
            if ranges[i] is not None:
                lo_contrib[i] = ranges[i][0] * self.adeg[i]
        # suffix sums of the minimal objective contribution of unassigned rays
        suffix = [Fraction(0)] * (n + 1)
        for i in range(n - 1, -1, -1):
            suffix[i] = suffix[i + 1] + (lo_contrib[i] if i not in (self.p, self.q) else Fraction(0))
        a: list[Fraction] = [Fraction(0)] * n

        def local(i):
            prev, nxt = (i - 1) % n, (i + 1) % n
            return a[prev] * G[i][prev] + a[nxt] * G[i][nxt] + a[i] * G[i][i]

        results = []

        def rec(i, partial):
            if i == n:
                if local(n - 1) < 0 or local(0) < 0:
                    return
                if n > 1 and local(n - 2) < 0:
                    return
                results.append(tuple(a))
                return
            if i in (self.p, self.q):
                choices = offsets
            else:
                lo, hi = ranges[i]
                if i >= 2:
                    # nef at ray i-1 bounds a[i] from below
                    prev = i - 1
                    need = -(a[prev - 1] * G[prev][prev - 1] + a[prev] * G[prev][prev])
                    lo = max(lo, need / G[prev][i])
                choices = self._grid(lo, hi)
            for val in choices:
                a[i] = val
                if i >= 2 and local(i - 1) < 0:
                    continue
                contrib = val * self.adeg[i]
                tot = partial + contrib + suffix[i + 1]
                if tot > bound:
                    if self.adeg[i] > 0:
                        break
                    continue
                rec(i + 1, partial + contrib)
            a[i] = Fraction(0)

        rec(0, Fraction(0))
        for sup in results:
            D = ToricDivisor(sup)
            P = polytope_of_nef(D, Y)
            yield sup, P


def _upper_bound(Y: ToricSurfaceData, enumerator: NefEnumerator, k_max: int) -> Fraction:
    """Objective of the smallest multiple d*A that is on the grid and has >= k_max + 1 lattice points."""
    den = 1
    for x in Y.polarisation:
        den = math.lcm(den, (x / enumerator.step).denominator)
    PA = enumerator.PA
    a2 = enumerator.objective(Y.polarisation)
    d = den
    while lattice_count(PA.scale(d)) < k_max + 1:
        d += den
    return d * a2


def alg_capacities_toric(Y: ToricSurfaceData, k_max: int, step=Fraction(1)) -> list[ToricOptimum]:
    """c^alg_k for k = 0..k_max by one sweep over nef divisors of bounded degree."""
    if k_max < 0:
        raise ValidationError("k must be nonnegative")
    en = NefEnumerator(Y, Fraction(step))
    bound = _upper_bound(Y, en, k_max)
    table: dict[int, tuple] = {}
    for sup, P in en.enumerate(bound):
        n = lattice_count(P)
        val = en.objective(sup)
        key = (val, P.normalized().vertices, sup)
        m = min(n, k_max + 1)
        if m not in table or key < table[m]:
            table[m] = key
    out = []
    best = None
    for cnt in range(k_max + 1, 0, -1):
        if cnt in table and (best is None or table[cnt] < best):
            best = table[cnt]
        out.append((cnt - 1, best))
    out.reverse()
    res = []
    for k, key in out:
        if key is None:
            raise AssertionError(f"no nef divisor found for k={k} below the upper bound")
        val, _, sup = key
        D = ToricDivisor(sup)
        res.append(ToricOptimum(k, val, D, h0(D, Y)))
    return res


def alg_capacity_toric(Y: ToricSurfaceData, k: int) -> tuple[Fraction, ToricDivisor]:
    r = alg_capacities_toric(Y, k)[k]
    return r.value, r.witness


def domain_surface(domain: ConvexToricDomain) -> ToricSurfaceData:
    return normal_fan(domain)


def ehrhart(domain_polygon: RatPolygon, x: int) -> int:
    return lattice_count(domain_polygon.scale(x))


def edge_lengths_via_fan(Y: ToricSurfaceData) -> list[Fraction]:
    """A . D_rho for each ray; the lattice lengths of the edges of P(A)."""
    return curve_degrees(Y.A, Y)


def anticanonical_degree(Y: ToricSurfaceData) -> Fraction:
    return intersect(Y.anticanonical, Y.A, Y)
