"""Large-k structure of capacity sequences.

Gaps and attained residues, error terms against the Weyl law, cap-function
quasi-polynomials and their onset, recursions, disjoint unions and
embedding obstructions.  Capacity arithmetic stays exact; floats appear
only in the error-term samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .domains import ConvexToricDomain, LATTICE, convex_weights, is_primitive, weight_gcd
from .errors import ValidationError
from .lattice_geom import area, lattice_count, lattice_perimeter, rat, rational_gcd
from .surfaces import SurfaceLattice, toric_lattice
from .toric import (
    ToricSurfaceData,
    alg_capacities_toric,
    edge_lengths_via_fan,
    h0,
    normal_fan,
    smooth_resolution,
)

TAIL = "tail_observation"
GCD = "gcd_formula"
EDGE = "edge_gcd"


class InvariantViolation(AssertionError):
    """Two routes to the same quantity disagree."""


def _mod(v: Fraction, m: Fraction) -> Fraction:
    return v - m * math.floor(v / m)


@dataclass
class GapReport:
    gap: Fraction
    method: str
    attained_residues: tuple
    stable: bool = True


def gap_and_residues(values: Sequence, A_sq, scale=1) -> GapReport:
    """Residues of the trailing half of the sequence mod A^2 and their largest circular gap.

    For a polarisation q*A0 with A0 integral pass ``scale=q``: residues are
    taken for the sequence of A0 and the gap is scaled back by q.
    """
    q = rat(scale)
    A_sq = rat(A_sq) / (q * q)
    if len(values) < 4:
        raise ValidationError("need at least four capacities to observe a gap")
    vals = [rat(v) / q for v in values]
    half = vals[len(vals) // 2:]
    quarter = vals[3 * len(vals) // 4:]
    res = sorted({_mod(v, A_sq) for v in half})
    stable = sorted({_mod(v, A_sq) for v in quarter}) == res
    if len(res) == 1:
        gap = A_sq
    else:
        diffs = [b - a for a, b in zip(res, res[1:])] + [res[0] + A_sq - res[-1]]
        gap = max(diffs)
    return GapReport(gap * q, TAIL, tuple(r * q for r in res), stable)


def gap_formula(S: SurfaceLattice, A) -> Fraction:
    """Positive generator of D.A over integral classes D: the gcd over a basis."""
    A = tuple(rat(x) for x in A)
    vals = []
    for i in range(S.rank):
        e = tuple(Fraction(int(i == j)) for j in range(S.rank))
        vals.append(S.dot(e, A))
    g = rational_gcd(vals)
    if g == 0:
        raise ValidationError("A pairs to zero with every class; it is not big")
    return g


def gap_edge(Y: ToricSurfaceData) -> Fraction:
    """gcd of A.D_rho over the invariant divisors (lattice lengths of the edges)."""
    return rational_gcd(edge_lengths_via_fan(Y))


def domain_gap(domain: ConvexToricDomain) -> Fraction:
    return gap_edge(normal_fan(domain))


def gap_formula_domain(domain: ConvexToricDomain) -> Fraction:
    """gcd formula evaluated on the Picard lattice of a smooth resolution."""
    tl = toric_lattice(smooth_resolution(normal_fan(domain)))
    return gap_formula(tl.lattice, tl.polarisation)


@dataclass
class TightnessEvidence:
    tight: bool
    routes: dict


def is_tightly_constrained(domain: Optional[ConvexToricDomain] = None, surface=None, values=None, A_sq=None) -> TightnessEvidence:
    """Compare every available route to gap = 1; disagreement is an error."""
    routes: dict[str, bool] = {}
    scale = domain.scale if domain is not None else 1
    if domain is not None:
        routes[GCD] = gap_formula_domain(domain) == 1
        routes[EDGE] = domain_gap(domain) == 1
        if domain.classification == LATTICE:
            routes["primitive"] = is_primitive(domain)
        routes["weight_gcd"] = weight_gcd(convex_weights(domain)) == 1
        if A_sq is None:
            A_sq = 2 * area(domain.polygon)
    if surface is not None:
        S, A = surface
        routes[GCD] = gap_formula(S, A) == 1
        if A_sq is None:
            A_sq = S.dot(A, A)
    if values is not None:
        rep = gap_and_residues(values, A_sq, scale)
        routes[TAIL] = rep.gap == 1
    if not routes:
        raise ValidationError("no input given")
    verdicts = set(routes.values())
    if len(verdicts) != 1:
        raise InvariantViolation(f"tightness routes disagree: {routes}")
    return TightnessEvidence(verdicts.pop(), routes)


# ---------------------------------------------------------------------------
# error terms

@dataclass
class ErrorTermReport:
    k_range: tuple
    samples: list  # (k, exact c_k, float e_k)
    tail_max: float
    tail_min: float
    envelope: float
    predicted_limsup: Optional[Fraction] = None
    predicted_liminf: Optional[Fraction] = None

    def _limits(self):
        if self.predicted_limsup is None:
            raise ValidationError("no predicted limits to compare against")
        return float(self.predicted_limsup), float(self.predicted_liminf)

    def within_envelope(self) -> bool:
        """One-sided contract: tail_max in [limsup - d, limsup], tail_min in [liminf, liminf + d]."""
        up, lo = self._limits()
        return (up - self.envelope <= self.tail_max <= up) and (lo <= self.tail_min <= lo + self.envelope)

    def near_predicted(self) -> bool:
        """Both tail extrema within the envelope of their predicted limits, on either side."""
        up, lo = self._limits()
        return abs(self.tail_max - up) <= self.envelope and abs(self.tail_min - lo) <= self.envelope


def error_term(c: Fraction, A_sq: Fraction, k: int) -> float:
    """c_k - sqrt(2 A^2 k); the sign is fixed exactly before the float subtraction."""
    target = 2 * A_sq * k
    e = float(c) - math.sqrt(float(target))
    exact_sign = (c * c > target) - (c * c < target) if c >= 0 else -1
    if exact_sign == 0:
        return 0.0
    if (e > 0) != (exact_sign > 0):
        e = math.copysign(abs(e), exact_sign)
    return e


def predicted_limits(gap, minus_KA) -> tuple[Fraction, Fraction]:
    """(limsup, liminf) of the error terms from the gap and the anticanonical degree."""
    gap, minus_KA = rat(gap), rat(minus_KA)
    return gap - minus_KA / 2, -minus_KA / 2


def predicted_limits_domain(domain: ConvexToricDomain) -> tuple[Fraction, Fraction]:
    """(q - perimeter/2, -perimeter/2) for a rational multiple q of a primitive lattice domain."""
    ell = lattice_perimeter(domain.polygon)
    return domain.scale - ell / 2, -ell / 2


def error_terms(values: Sequence, A_sq, window: int, predicted=None) -> ErrorTermReport:
    A_sq = rat(A_sq)
    n = len(values)
    if window < 1 or window >= n:
        raise ValidationError("window must be between 1 and the sequence length - 1")
    samples = [(k, rat(values[k]), error_term(rat(values[k]), A_sq, k)) for k in range(1, n)]
    tail = samples[-window:]
    k0 = tail[0][0]
    envelope = float(2 * A_sq) / math.sqrt(float(2 * A_sq * k0))
    rep = ErrorTermReport(
        (tail[0][0], tail[-1][0]),
        samples,
        max(s[2] for s in tail),
        min(s[2] for s in tail),
        envelope,
    )
    if predicted is not None:
        rep.predicted_limsup, rep.predicted_liminf = predicted
    return rep


def ruelle(minus_KA, gap) -> Fraction:
    return rat(minus_KA) - rat(gap)


def ruelle_domain(domain: ConvexToricDomain) -> Fraction:
    return ruelle(lattice_perimeter(domain.polygon), domain_gap(domain))


def weyl_deviation(values: Sequence, A_sq) -> list[tuple[int, float]]:
    """|c_k^2 / k - 2A^2| for k >= 1."""
    A_sq = rat(A_sq)
    return [(k, float(abs(rat(values[k]) ** 2 / k - 2 * A_sq))) for k in range(1, len(values))]


# ---------------------------------------------------------------------------
# cap functions

def cap_values(values: Sequence, x_max: int) -> list[int]:
    """cap(x) for integer x = 0..x_max from a capacity prefix that reaches past x_max."""
    vals = [rat(v) for v in values]
    if vals[-1] <= x_max:
        raise ValidationError(f"capacity prefix ends at {vals[-1]}, need values beyond x={x_max}")
    out = []
    j = 0
    for x in range(x_max + 1):
        while j < len(vals) and vals[j] <= x:
            j += 1
        out.append(j)
    return out


def toric_prefix_beyond(Y: ToricSurfaceData, x_max) -> list[Fraction]:
    """Capacities of Y from k = 0 until the first value exceeding x_max."""
    k = 16
    while True:
        vals = [r.value for r in alg_capacities_toric(Y, k)]
        if vals[-1] > x_max:
            return vals
        k *= 2


def attained(caps: Sequence[int]) -> list[bool]:
    return [caps[x] > (caps[x - 1] if x else 0) for x in range(len(caps))]


def low_bound_onset(caps: Sequence[int], A_sq: int, boundary_length) -> Optional[int]:
    """Least integer x0 >= 0 with x0 > A^2 - perimeter and x0..x0+A^2-1 all attained."""
    att = attained(caps)
    start = max(0, math.floor(A_sq - rat(boundary_length)) + 1)
    for x0 in range(start, len(caps) - A_sq + 1):
        if all(att[x0: x0 + A_sq]):
            return x0
    return None


@dataclass
class QuasiPolynomial:
    period: int
    quad: Fraction
    lin: Fraction
    constants: tuple
    onset: Optional[int]
    fitted_quad: Optional[Fraction] = None
    fitted_lin: Optional[Fraction] = None
    sufficient: bool = True

    def __call__(self, x: int) -> Fraction:
        g = self.constants[x % self.period]
        if g is None:
            raise ValidationError(f"residue class of {x} is not attained")
        return self.quad * x * x + self.lin * x + g

    def matches(self, caps: Sequence[int]) -> bool:
        """Exact agreement with every computed cap value at or past the onset in attained classes."""
        return all(caps[x] == self(x) for x in range(self.onset, len(caps))
                   if self.constants[x % self.period] is not None)


def fit_quasipolynomial(caps: Sequence[int], A_sq: int, minus_KA) -> QuasiPolynomial:
    """Residue-class constants, the onset, and coefficients refit from the data alone.

    Only residue classes mod A^2 that are attained in the trailing half of the
    range carry the closed form; other classes get ``None`` constants.
    """
    P = int(A_sq)
    if P != A_sq or P <= 0:
        raise ValidationError("quasi-polynomial period needs an integral A^2")
    quad = Fraction(1, 2 * P)
    lin = rat(minus_KA) / (2 * P)
    n = len(caps)
    att = attained(caps)
    classes = {x % P for x in range(n // 2, n) if att[x]}
    gam = [caps[x] - quad * x * x - lin * x for x in range(n)]
    # least x0 after which gamma is P-periodic on the attained classes
    ok_from = n
    for x in range(n - P - 1, -1, -1):
        if x % P in classes and gam[x] != gam[x + P]:
            break
        ok_from = x
    if not classes or ok_from + 2 * P > n:
        return QuasiPolynomial(P, quad, lin, (), None, sufficient=False)
    onset = ok_from
    while onset < n and onset % P not in classes:
        onset += 1
    constants = tuple(gam[onset + ((i - onset) % P)] if i in classes else None for i in range(P))
    fq = fl = None
    if onset + 3 * P <= n:
        fqs, fls = set(), set()
        for x in range(onset, onset + P):
            if x % P not in classes:
                continue
            s0, s1, s2 = caps[x], caps[x + P], caps[x + 2 * P]
            q_fit = Fraction(s2 - 2 * s1 + s0, 2 * P * P)
            l_fit = (Fraction(s1 - s0) - q_fit * (2 * x * P + P * P)) / P
            fqs.add(q_fit)
            fls.add(l_fit)
        if len(fqs) == 1 and len(fls) == 1:
            fq, fl = fqs.pop(), fls.pop()
    return QuasiPolynomial(P, quad, lin, constants, onset, fq, fl, fq is not None)


def ehrhart_differences(caps: Sequence[int], lam: int, ehr: Callable[[int], int]) -> dict[int, list[int]]:
    """cap(i + lam*x) - ehr(x) for each residue i, over x while i + lam*x is in range."""
    out: dict[int, list[int]] = {}
    for i in range(lam):
        row = []
        x = 0
        while i + lam * x < len(caps):
            row.append(caps[i + lam * x] - ehr(x))
            x += 1
        out[i] = row
    return out


def eventually_constant(row: Sequence, tail: int = 3) -> bool:
    return len(row) >= tail and len(set(row[-tail:])) == 1


def ehrhart_crosscheck(caps: Sequence[int], lam: int, ehr: Callable[[int], int], tail: int = 3) -> dict[int, tuple[bool, bool]]:
    """Per residue i: (cap(i+lam*x) - ehr(x) eventually constant, same after also removing i*x).

    The closed form makes the plain difference grow like i*x, so only the
    second column can hold for i > 0.
    """
    rows = ehrhart_differences(caps, lam, ehr)
    return {i: (eventually_constant(r, tail), eventually_constant([v - i * x for x, v in enumerate(r)], tail))
            for i, r in rows.items()}


@dataclass
class RecursionReport:
    cap_checks: list = field(default_factory=list)  # (x, holds, above_threshold)
    k_checks: list = field(default_factory=list)  # (k, k', holds, above_threshold)

    def failures_above_threshold(self) -> list:
        return [c for c in self.cap_checks if not c[1] and c[2]] + [c for c in self.k_checks if not c[2] and c[3]]


def check_cap_recursion(caps: Sequence[int], A_sq: int, minus_KA, threshold: int) -> list:
    """cap(x + A^2) = cap(x) + x + I(A)/2 at attained x."""
    half_index = (A_sq + rat(minus_KA)) / 2
    att = attained(caps)
    out = []
    for x in range(len(caps) - A_sq):
        if not att[x]:
            continue
        holds = caps[x + A_sq] == caps[x] + x + half_index
        out.append((x, holds, x >= threshold))
    return out


def check_recursions(values: Sequence, A_sq, minus_KA, threshold, witness_ok: Optional[Callable] = None,
                     k_range: Optional[range] = None) -> RecursionReport:
    """Shift k -> k + I(A)/2 + c_k raises the capacity by exactly A^2."""
    vals = [rat(v) for v in values]
    A_sq = rat(A_sq)
    half_index = (A_sq + rat(minus_KA)) / 2
    rep = RecursionReport()
    ks = k_range if k_range is not None else range(1, len(vals))
    for k in ks:
        if k <= 0:
            continue
        kp = k + half_index + vals[k]
        if kp.denominator != 1 or kp >= len(vals):
            continue
        kp = int(kp)
        holds = vals[kp] == vals[k] + A_sq
        if holds and witness_ok is not None:
            holds = witness_ok(k, kp)
        rep.k_checks.append((k, kp, holds, vals[k] >= threshold))
    return rep


def toric_witness_shift_ok(Y: ToricSurfaceData, optima) -> Callable:
    """Witness(k) + A must have at least k' + 1 sections."""
    A = Y.A

    def ok(k, kp):
        D = optima[k].witness + A
        return h0(D, Y) >= kp + 1

    return ok


# ---------------------------------------------------------------------------
# disjoint unions and obstructions

def disjoint_union(a: Sequence, b: Sequence) -> list[Fraction]:
    """c_k of a formal disjoint union: max over k1 + k2 = k of c_k1 + c_k2."""
    n = min(len(a), len(b))
    out = []
    for k in range(n):
        out.append(max(rat(a[i]) + rat(b[k - i]) for i in range(k + 1)))
    return out


@dataclass
class ObstructionReport:
    first_k: Optional[int]
    capacity_verdict: str
    perimeter_verdict: Optional[str]
    areas_equal: bool
    perimeters: tuple

    @property
    def obstructed(self) -> bool:
        return self.first_k is not None or self.perimeter_verdict == "obstructed"


def obstruct_sequences(a: Sequence, b: Sequence) -> Optional[int]:
    for k, (x, y) in enumerate(zip(a, b)):
        if rat(x) > rat(y):
            return k
    return None


def obstruct(source: ConvexToricDomain, target: ConvexToricDomain, k_max: int, solver: str = "toric") -> ObstructionReport:
    """Evidence against an embedding of the interior of ``source`` into ``target``."""
    if solver == "toric":
        ca = [r.value for r in alg_capacities_toric(normal_fan(source), k_max)]
        cb = [r.value for r in alg_capacities_toric(normal_fan(target), k_max)]
    elif solver == "ech":
        from .ech_solver import ech_capacities

        ca = ech_capacities(source, k_max).values
        cb = ech_capacities(target, k_max).values
    else:
        raise ValidationError(f"unknown solver {solver!r}")
    first = obstruct_sequences(ca, cb)
    eq = area(source.polygon) == area(target.polygon)
    la, lb = lattice_perimeter(source.polygon), lattice_perimeter(target.polygon)
    pv = None
    if eq:
        pv = "obstructed" if la < lb else "no obstruction found"
    return ObstructionReport(first, "obstructed" if first is not None else "no obstruction found", pv, eq, (la, lb))


def ehrhart_function(domain: ConvexToricDomain) -> Callable[[int], int]:
    poly = domain.polygon
    return lambda x: lattice_count(poly.scale(x))
