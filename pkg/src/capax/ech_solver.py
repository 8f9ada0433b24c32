"""ECH capacities of convex toric domains.

The capacity ``c_k`` is the least Omega-perimeter of a convex lattice polygon
with exactly ``k + 1`` lattice points.  The main solver walks polygon
boundaries as angularly sorted edge sequences starting at the
lexicographically smallest vertex; every polygon (points and segments
included) has exactly one such walk.  Partial walks are merged on
(current vertex, twice-area-plus-boundary count) and pruned by the
incumbent bound, which gives an exact dynamic program over all polygons of
bounded perimeter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .domains import ConvexToricDomain
from .errors import ResourceLimit, ValidationError
from .lattice_geom import (
    RatPolygon,
    angle_key,
    hull,
    lattice_count,
    lattice_length,
    minkowski_sum,
    mixed_volume,
    omega_perimeter,
    polygon_from_edges,
    primitive,
)

ECH = "ech_combinatorial"
ALG_TORIC = "alg_toric"
ALG_ABSTRACT = "alg_abstract"
ORACLE = "oracle"

DEFAULT_MAX_NODES = 50_000_000
MAX_ORACLE_BOX = 8


@dataclass
class CapacitySequence:
    values: list[Fraction]
    source: str
    witnesses: list = field(default_factory=list)

    def __post_init__(self):
        if self.values and self.values[0] != 0:
            raise ValidationError("a capacity sequence starts at 0")

    def __len__(self):
        return len(self.values)

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    def is_monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.values, self.values[1:]))

    def cap(self, x) -> int:
        """#{k : c_k <= x}; only meaningful while x < the last computed value."""
        return sum(1 for v in self.values if v <= x)


@dataclass(frozen=True)
class OptimiserRecord:
    k: int
    value: Fraction
    witness: RatPolygon


class _Costs:
    """Integer-scaled Omega-length data for one domain."""

    def __init__(self, domain: ConvexToricDomain):
        den = 1
        for p in domain.polygon.vertices:
            den = math.lcm(den, p[0].denominator, p[1].denominator)
        self.den = den
        self.verts = [(int(p[0] * den), int(p[1] * den)) for p in domain.polygon.vertices]
        self.a = int(domain.x_intercept * den)
        self.b = int(domain.y_intercept * den)

    def length(self, vx: int, vy: int) -> int:
        return max(vx * py - vy * px for px, py in self.verts)

    def box(self, bound: int) -> tuple[int, int]:
        # width <= bound / b and height <= bound / a, since Omega contains both axis edges
        return bound // self.b, bound // self.a


def _directions(wx: int, wy: int) -> list[tuple[int, int]]:
    dirs = [
        (dx, dy)
        for dx in range(-wx, wx + 1)
        for dy in range(-wy, wy + 1)
        if (dx or dy) and math.gcd(dx, dy) == 1
    ]
    dirs.sort(key=angle_key)
    return dirs


def polygon_walk_table(costs: _Costs, bound: int, key_max: int, max_nodes: int = DEFAULT_MAX_NODES):
    """Best (cost, vertex path) for each lattice-point count over all polygons of cost <= bound.

    ``key`` tracks 2*area + boundary points, which equals 2*(count - 1)
    once the walk closes.  Costs are in units of 1/costs.den.
    """
    wx, wy = costs.box(bound)
    best: dict[int, tuple[int, tuple]] = {1: (0, ((0, 0),))}
    states: dict[tuple[int, int], dict[int, tuple[int, tuple]]] = {(0, 0): {0: (0, ((0, 0),))}}
    nodes = 0
    back_cache: dict[tuple[int, int], int] = {}

    # the walk runs counterclockwise, so edge e is charged l(-e); the edges
    # still to come sum to -(x, y) and cost at least l(x, y) by sublinearity
    def back(x, y):
        v = back_cache.get((x, y))
        if v is None:
            v = costs.length(x, y)
            back_cache[(x, y)] = v
        return v

    for dx, dy in _directions(wx, wy):
        step_cost = costs.length(-dx, -dy)
        snapshot = [(pos, list(table.items())) for pos, table in states.items()]
        for (x, y), entries in snapshot:
            turn = x * dy - y * dx
            if turn < 0:
                continue
            for key, (cost, path) in entries:
                m = 0
                nx, ny, nkey, ncost = x, y, key, cost
                while True:
                    m += 1
                    nx += dx
                    ny += dy
                    nkey += turn + 1
                    ncost += step_cost
                    nodes += 1
                    if nodes > max_nodes:
                        raise ResourceLimit(f"polygon search exceeded max_nodes={max_nodes}")
                    if nx < 0 or nx > wx or ny < -wy or ny > wy:
                        break
                    if nkey > key_max or ncost > bound:
                        break
                    if nx == 0 and ny == 0:
                        count = nkey // 2 + 1
                        cand = (ncost, path)
                        old = best.get(count)
                        if old is None or cand < old:
                            best[count] = cand
                        break
                    if nx == 0 and ny < 0:
                        break
                    if ncost + back(nx, ny) > bound:
                        break
                    cell = states.setdefault((nx, ny), {})
                    cand = (ncost, path + ((nx, ny),))
                    old = cell.get(nkey)
                    if old is None or cand < old:
                        cell[nkey] = cand
    return best


def _lattice_hull(domain: ConvexToricDomain) -> Optional[RatPolygon]:
    from .lattice_geom import lattice_points

    pts = lattice_points(domain.polygon)
    if not pts:
        return None
    return hull(pts)


def _initial_bound(domain: ConvexToricDomain, costs: _Costs, k_max: int) -> tuple[int, int]:
    """(heuristic bound, guaranteed bound) in scaled units."""
    seg_step = min(costs.a, costs.b)
    guaranteed = k_max * seg_step
    heuristic = 0
    H = _lattice_hull(domain)
    scaled = []
    if H is not None and H.degeneracy == "full":
        per = mixed_volume(H, domain.polygon) * costs.den
        d = 1
        while True:
            n = lattice_count(H.scale(d))
            scaled.append((n, int(math.ceil(d * per))))
            if n >= k_max + 1:
                break
            d += 1
    for k in range(1, k_max + 1):
        ub = k * seg_step
        for n, c in scaled:
            if n >= k + 1:
                ub = min(ub, c)
                break
        heuristic = max(heuristic, ub)
    return heuristic, guaranteed


def _solve_table(domain: ConvexToricDomain, k_max: int, max_nodes: int):
    if k_max < 0:
        raise ValidationError("k must be nonnegative")
    costs = _Costs(domain)
    heuristic, guaranteed = _initial_bound(domain, costs, k_max)
    key_max = 2 * k_max
    for bound in (heuristic, guaranteed):
        best = polygon_walk_table(costs, bound, key_max, max_nodes)
        if all(n in best for n in range(1, k_max + 2)):
            return costs, best
    raise AssertionError("segment bound failed to produce every lattice-point count")


def _record(costs: _Costs, k: int, entry) -> OptimiserRecord:
    cost, path = entry
    poly = hull(path)
    return OptimiserRecord(k, Fraction(cost, costs.den), poly)


def ech_capacity(domain: ConvexToricDomain, k: int, max_nodes: int = DEFAULT_MAX_NODES) -> OptimiserRecord:
    costs, best = _solve_table(domain, k, max_nodes)
    return _record(costs, k, best[k + 1])


def ech_capacities(domain: ConvexToricDomain, k_max: int, max_nodes: int = DEFAULT_MAX_NODES) -> CapacitySequence:
    costs, best = _solve_table(domain, k_max, max_nodes)
    recs = [_record(costs, k, best[k + 1]) for k in range(k_max + 1)]
    return CapacitySequence([r.value for r in recs], ECH, recs)


def cap_function(domain: ConvexToricDomain, x, max_nodes: int = DEFAULT_MAX_NODES) -> int:
    """Largest lattice-point count among polygons of Omega-perimeter <= x."""
    x = Fraction(x)
    if x < 0:
        raise ValidationError("cap_function needs x >= 0")
    costs = _Costs(domain)
    bound = math.floor(x * costs.den)
    wx, wy = costs.box(bound)
    key_max = 2 * (wx + 1) * (wy + 1)
    best = polygon_walk_table(costs, bound, key_max, max_nodes)
    return max(best)


# ---------------------------------------------------------------------------
# exhaustive oracle

def _int_hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and (out[-1][0] - out[-2][0]) * (p[1] - out[-2][1]) - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0]) <= 0:
                out.pop()
            out.append(p)
        return out

    lo = chain(pts)
    up = chain(reversed(pts))
    return tuple(lo[:-1] + up[:-1])


def _int_count(verts) -> int:
    """Column scan of an integer polygon using only integer arithmetic."""
    n = len(verts)
    if n == 1:
        return 1
    xs = [v[0] for v in verts]
    total = 0
    for x in range(min(xs), max(xs) + 1):
        lo = hi = None
        for i in range(n):
            (px, py), (qx, qy) = verts[i], verts[(i + 1) % n]
            if px == x:
                c_lo = c_hi = py
            elif (px < x < qx) or (qx < x < px):
                num = py * (qx - px) + (qy - py) * (x - px)
                den = qx - px
                if den < 0:
                    num, den = -num, -den
                c_lo, c_hi = -((-num) // den), num // den
            else:
                continue
            lo = c_lo if lo is None else min(lo, c_lo)
            hi = c_hi if hi is None else max(hi, c_hi)
        if lo is not None and hi >= lo:
            total += hi - lo + 1
    return total


def _normalise(verts):
    x0, y0 = verts[0]
    return tuple((x - x0, y - y0) for x, y in verts)


_ORACLE_CACHE: dict[tuple[int, int], dict[tuple, int]] = {}


def enumerate_small_polygons(max_points: int, box: int) -> dict[tuple, int]:
    """All convex lattice polygons, up to translation, fitting in a box x box square
    and having at most ``max_points`` lattice points, mapped to their point count.

    Grown by adding one lattice point at a time to the hull; every polygon is
    reachable because its intermediate hulls have no more points than it does.
    """
    key = (max_points, box)
    if key in _ORACLE_CACHE:
        return _ORACLE_CACHE[key]
    for (mp, b), table in _ORACLE_CACHE.items():
        if b == box and mp > max_points:
            return {v: n for v, n in table.items() if n <= max_points}
    start = ((0, 0),)
    found = {start: 1}
    frontier = [start]
    while frontier:
        nxt = []
        for verts in frontier:
            xs = [p[0] for p in verts]
            ys = [p[1] for p in verts]
            for qx in range(max(xs) - box, min(xs) + box + 1):
                for qy in range(max(ys) - box, min(ys) + box + 1):
                    new = _normalise(_int_hull(verts + ((qx, qy),)))
                    if new in found:
                        continue
                    n = _int_count(new)
                    if n > max_points:
                        continue
                    found[new] = n
                    nxt.append(new)
        frontier = nxt
    _ORACLE_CACHE[key] = found
    return found


def brute_oracle_table(domain: ConvexToricDomain, k_max: int, box: int) -> list[Fraction]:
    """Exhaustive minimum over hulls of lattice point sets in [0, box]^2, costs by Minkowski area."""
    if box > MAX_ORACLE_BOX:
        raise ResourceLimit(f"oracle box {box} exceeds the feasible limit {MAX_ORACLE_BOX}")
    if box < 0 or k_max < 0:
        raise ValidationError("box and k must be nonnegative")
    polys = enumerate_small_polygons(k_max + 1, box)
    best: dict[int, Fraction] = {}
    omega = domain.polygon
    for verts, n in polys.items():
        lam = RatPolygon(tuple((Fraction(a), Fraction(b)) for a, b in verts))
        c = mixed_volume(lam, omega)
        if n not in best or c < best[n]:
            best[n] = c
    missing = [n - 1 for n in range(1, k_max + 2) if n not in best]
    if missing:
        raise ResourceLimit(f"box {box} too small to realise k={missing[0]}")
    return [best[k + 1] for k in range(k_max + 1)]


def brute_oracle(domain: ConvexToricDomain, k: int, box: int) -> Fraction:
    return brute_oracle_table(domain, k, box)[k]


# ---------------------------------------------------------------------------
# witness shapes

def _edge_lengths(P: RatPolygon) -> dict[tuple[int, int], Fraction]:
    out: dict[tuple[int, int], Fraction] = {}
    for e in P.edges():
        if e == (0, 0):
            continue
        u = primitive(e)
        out[u] = out.get(u, Fraction(0)) + lattice_length(e)
    return out


@dataclass(frozen=True)
class ShapeDecomposition:
    k: int
    multiple: int
    residual: RatPolygon


def decompose_witness(witness: RatPolygon, omega: RatPolygon) -> tuple[int, RatPolygon]:
    """Largest d with witness = Q + d*omega for a lattice polygon Q (up to translation)."""
    lw = _edge_lengths(witness)
    lo = _edge_lengths(omega)
    d = min(math.floor(lw.get(u, 0) / l) for u, l in lo.items())
    d = max(d, 0)
    rest = []
    for u in set(lw) | set(lo):
        length = lw.get(u, Fraction(0)) - d * lo.get(u, Fraction(0))
        if length:
            rest.append((u[0] * length, u[1] * length))
    rest.sort(key=angle_key)
    origin = (Fraction(0), Fraction(0))
    residual = polygon_from_edges(origin, rest) if rest else RatPolygon((origin,))
    recombined = minkowski_sum(residual, omega.scale(d)).normalized()
    if recombined != witness.normalized():
        raise AssertionError("edge-wise decomposition failed to reproduce the witness")
    return d, residual.normalized()


def optimiser_shape_report(domain: ConvexToricDomain, k_values) -> list[ShapeDecomposition]:
    ks = list(k_values)
    seq = ech_capacities(domain, max(ks))
    out = []
    for k in ks:
        d, q = decompose_witness(seq.witnesses[k].witness, domain.polygon)
        out.append(ShapeDecomposition(k, d, q))
    return out


def check_record(domain: ConvexToricDomain, rec: OptimiserRecord) -> bool:
    return lattice_count(rec.witness) == rec.k + 1 and omega_perimeter(domain.polygon, rec.witness) == rec.value
