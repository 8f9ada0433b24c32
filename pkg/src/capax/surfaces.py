"""Algebraic capacities of smooth surfaces given by an intersection lattice.

Classes are coordinate vectors in a fixed basis of the Neron-Severi lattice.
The nef cone is taken to be the dual of the supplied effective generators,
so completeness of ``effective_gens`` is part of the input contract.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import ValidationError
from .lattice_geom import rat

Vec = tuple


def _vec(v) -> tuple[Fraction, ...]:
    return tuple(rat(x) for x in v)


def inertia(gram) -> tuple[int, int, int]:
    """(positive, negative, zero) counts by exact symmetric elimination."""
    M = [[Fraction(x) for x in row] for row in gram]
    n = len(M)
    pos = neg = zero = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if M[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and M[i][j] != 0), None)
            if pair is None:
                zero += len(active)
                break
            i, j = pair
            # replace row/col i by i + j to create a nonzero diagonal entry
            for r in range(n):
                M[i][r] += M[j][r]
            for r in range(n):
                M[r][i] += M[r][j]
            piv = i
            if M[i][i] == 0:
                for r in range(n):
                    M[i][r] -= 2 * M[j][r]
                for r in range(n):
                    M[r][i] -= 2 * M[r][j]
        d = M[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        active.remove(piv)
        for i in active:
            f = M[i][piv] / d
            if f:
                for j in range(n):
                    M[i][j] -= f * M[piv][j]
        for i in active:
            M[piv][i] = M[i][piv] = Fraction(0)
    return pos, neg, zero


@dataclass
class SurfaceLattice:
    rank: int
    gram: list
    K: tuple
    chiO: int
    effective_gens: list
    labels: list = field(default_factory=list)
    nef_gens: Optional[list] = None

    def __post_init__(self):
        self.gram = [[rat(x) for x in row] for row in self.gram]
        self.K = _vec(self.K)
        self.effective_gens = [_vec(c) for c in self.effective_gens]
        if self.nef_gens is not None:
            self.nef_gens = [_vec(c) for c in self.nef_gens]
        if not self.labels:
            self.labels = [f"e{i + 1}" for i in range(self.rank)]
        n = self.rank
        if len(self.gram) != n or any(len(r) != n for r in self.gram):
            raise ValidationError("gram must be a rank x rank matrix")
        if any(self.gram[i][j] != self.gram[j][i] for i in range(n) for j in range(n)):
            raise ValidationError("gram must be symmetric")
        if len(self.K) != n or any(len(c) != n for c in self.effective_gens):
            raise ValidationError("K and effective generators must have rank entries")
        if len(self.labels) != n:
            raise ValidationError("labels must name every basis element")
        if inertia(self.gram) != (1, n - 1, 0):
            raise ValidationError("intersection form must have signature (1, rank-1)")
        for i in range(n):
            e = tuple(Fraction(int(i == j)) for j in range(n))
            if (self.dot(e, e) + self.dot(e, self.K)) % 2 != 0:
                raise ValidationError("D^2 + D.K must be even on a smooth surface (basis element %d fails)" % i)
        for c in self.effective_gens:
            if self.dot(c, c) < 0 and (self.dot(c, c) + self.dot(c, self.K)) % 2 != 0:
                raise ValidationError("negative curve violates adjunction parity")
        if not self.effective_gens:
            raise ValidationError("effective_gens must be non-empty")

    def dot(self, a, b) -> Fraction:
        G = self.gram
        return sum((a[i] * G[i][j] * b[j] for i in range(self.rank) for j in range(self.rank) if a[i] and b[j]), Fraction(0))

    def negative_curves(self) -> list:
        return [c for c in self.effective_gens if self.dot(c, c) < 0]

    def label(self, D) -> str:
        """Render a class as an integer combination of the basis labels."""
        terms = []
        for coef, name in zip(D, self.labels):
            if coef == 0:
                continue
            c = str(abs(coef)) if abs(coef) != 1 else ""
            sign = "-" if coef < 0 else "+"
            terms.append((sign, f"{c}{name}"))
        if not terms:
            return "0"
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for s, t in terms[1:]:
            out += s + t
        return out

    def to_json(self):
        enc = lambda x: int(x) if x.denominator == 1 else [x.numerator, x.denominator]  # noqa: E731
        data = {
            "rank": self.rank,
            "gram": [[enc(x) for x in row] for row in self.gram],
            "K": [enc(x) for x in self.K],
            "chiO": self.chiO,
            "effective_gens": [[enc(x) for x in c] for c in self.effective_gens],
            "labels": list(self.labels),
        }
        if self.nef_gens is not None:
            data["nef_gens"] = [[enc(x) for x in c] for c in self.nef_gens]
        return data


def lattice_from_json(data) -> SurfaceLattice:
    try:
        return SurfaceLattice(
            rank=int(data["rank"]),
            gram=data["gram"],
            K=data["K"],
            chiO=int(data["chiO"]),
            effective_gens=data["effective_gens"],
            labels=list(data.get("labels", [])),
            nef_gens=data.get("nef_gens"),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"surface lattice JSON is missing a field: {exc}") from exc


def index(D, S: SurfaceLattice) -> Fraction:
    D = _vec(D)
    val = S.dot(D, D) - S.dot(D, S.K)
    if all(x.denominator == 1 for x in D) and val % 2 != 0:
        raise AssertionError("index of an integral class must be even")
    return val


def is_nef_abstract(D, S: SurfaceLattice) -> bool:
    D = _vec(D)
    return all(S.dot(D, C) >= 0 for C in S.effective_gens)


def is_big(A, S: SurfaceLattice) -> bool:
    """A is positive on every nonzero nef class (checked on nef generators or by LP)."""
    A = _vec(A)
    if S.nef_gens:
        return all(S.dot(A, N) > 0 for N in S.nef_gens)
    try:
        _coordinate_box(S, A, Fraction(1))
    except ValidationError:
        return False
    return True


def _coordinate_box(S: SurfaceLattice, A, bound: Fraction):
    n = S.rank
    G = np.array([[float(x) for x in row] for row in S.gram])
    rows = [-(G @ np.array([float(x) for x in C])) for C in S.effective_gens]
    a_row = G @ np.array([float(x) for x in A])
    A_ub = np.array(rows + [a_row])
    b_ub = np.array([0.0] * len(rows) + [float(bound)])
    box = []
    for i in range(n):
        lims = []
        for sgn in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = sgn
            res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * n, method="highs")
            if res.status == 3:
                raise ValidationError("the nef region {D.A <= bound} is unbounded: A is not big")
            if res.status != 0:
                raise ValidationError(f"linear program failed while bounding the nef region: {res.message}")
            lims.append(sgn * res.fun)
        lo, hi = lims[0], lims[1]
        box.append((math.floor(lo - 1e-6), math.ceil(hi + 1e-6)))
    return box


def nef_points(S: SurfaceLattice, A, bound: Fraction):
    """Integer nef classes D with D.A <= bound."""
    A = _vec(A)
    n = S.rank
    box = _coordinate_box(S, A, bound)
    G = S.gram
    cons = [[sum(G[i][j] * C[j] for j in range(n)) for i in range(n)] for C in S.effective_gens]
    arow = [sum(G[i][j] * A[j] for j in range(n)) for i in range(n)]

    def rest_range(row, i):
        lo = hi = Fraction(0)
        for j in range(i, n):
            a, b = row[j] * box[j][0], row[j] * box[j][1]
            lo += min(a, b)
            hi += max(a, b)
        return lo, hi

    rest = [[rest_range(r, i) for i in range(n + 1)] for r in cons]
    arest = [rest_range(arow, i) for i in range(n + 1)]
    out = []
    x = [0] * n

    def rec(i, partial_c, partial_a):
        if i == n:
            if all(p >= 0 for p in partial_c) and partial_a <= bound:
                out.append(tuple(Fraction(v) for v in x))
            return
        for v in range(box[i][0], box[i][1] + 1):
            pc = [p + r[i] * v for p, r in zip(partial_c, cons)]
            if any(p + rest[c][i + 1][1] < 0 for c, p in enumerate(pc)):
                continue
            pa = partial_a + arow[i] * v
            if pa + arest[i + 1][0] > bound:
                continue
            x[i] = v
            rec(i + 1, pc, pa)
        x[i] = 0

    rec(0, [Fraction(0)] * len(cons), Fraction(0))
    return out


def _index_growth_bound(S: SurfaceLattice, A, k: int) -> Fraction:
    A = _vec(A)
    cands = []
    if all(x.denominator == 1 for x in A):
        cands.append(A)
    den = math.lcm(*[x.denominator for x in A])
    cands.append(tuple(x * den for x in A))
    for N in S.nef_gens or []:
        cands.append(N)
    best = None
    for N in cands:
        if not is_nef_abstract(N, S):
            continue
        n2, nk = S.dot(N, N), S.dot(N, S.K)
        if n2 < 0 or (n2 == 0 and -nk <= 0):
            continue
        m = 0
        while m * m * n2 - m * nk < 2 * k:
            m += 1
        val = m * S.dot(N, A)
        if best is None or val < best:
            best = val
    if best is None:
        raise ValidationError("no nef class with growing index found to bound the search")
    return best


@dataclass(frozen=True)
class AbstractOptimum:
    k: int
    value: Fraction
    witnesses: tuple


def alg_capacities_abstract(S: SurfaceLattice, A, k_max: int, require_nef: bool = True) -> list[AbstractOptimum]:
    """min D.A over nef integer D with I(D) >= 2k, for k = 0..k_max, with all tied witnesses."""
    A = _vec(A)
    if k_max < 0:
        raise ValidationError("k must be nonnegative")
    if require_nef and not is_nef_abstract(A, S):
        raise ValidationError("A must be nef with respect to the supplied effective generators")
    if not is_big(A, S):
        raise ValidationError("A must be big")
    bound = _index_growth_bound(S, A, k_max)
    pts = nef_points(S, A, bound)
    scored = [(S.dot(D, A), index(D, S), D) for D in pts]
    out = []
    for k in range(k_max + 1):
        feas = [(v, D) for v, I, D in scored if I >= 2 * k]
        if not feas:
            raise AssertionError(f"no nef class with index >= {2 * k} below the bound")
        best = min(v for v, _ in feas)
        wits = tuple(sorted(D for v, D in feas if v == best))
        out.append(AbstractOptimum(k, best, wits))
    return out


def alg_capacity_abstract(S: SurfaceLattice, A, k: int, require_nef: bool = True) -> tuple[Fraction, tuple]:
    r = alg_capacities_abstract(S, A, k, require_nef)[k]
    return r.value, r.witnesses


# ---------------------------------------------------------------------------
# isoparametric transform

def iso_transform(D, S: SurfaceLattice):
    D = _vec(D)
    out = list(D)
    for C in S.effective_gens:
        dc = S.dot(D, C)
        if dc >= 0:
            continue
        c2 = S.dot(C, C)
        if c2 >= 0:
            raise ValidationError("a curve of nonnegative square meets D negatively: D is not effective or the curve list is inconsistent")
        coef = math.ceil(dc / c2)
        if coef <= 0:
            raise AssertionError("transform coefficient must be positive")
        out = [o - coef * c for o, c in zip(out, C)]
    return tuple(out)


@dataclass
class IsoStep:
    before: tuple
    after: tuple
    index_before: Fraction
    index_after: Fraction
    minus_one_met: bool
    h0_before: Optional[int] = None
    h0_after: Optional[int] = None


@dataclass
class IsoClosure:
    result: tuple
    steps: list
    terminated: bool

    @property
    def n_steps(self) -> int:
        return len(self.steps)


def iso_transform_closure(D, S: SurfaceLattice, max_iter: int = 100, h0_fn=None) -> IsoClosure:
    """Iterate the transform until D is nef; ``h0_fn`` (toric inputs) is evaluated on every step."""
    D = _vec(D)
    steps = []
    for _ in range(max_iter):
        if is_nef_abstract(D, S):
            return IsoClosure(D, steps, True)
        met = any(S.dot(C, C) == -1 and S.dot(D, C) < 0 for C in S.effective_gens)
        nxt = iso_transform(D, S)
        st = IsoStep(D, nxt, index(D, S), index(nxt, S), met)
        if h0_fn is not None:
            st.h0_before, st.h0_after = h0_fn(D), h0_fn(nxt)
        steps.append(st)
        D = nxt
    return IsoClosure(D, steps, is_nef_abstract(D, S))


# ---------------------------------------------------------------------------
# chamber scan

@dataclass
class ChamberSample:
    t: Fraction
    big: bool
    value: Optional[Fraction]
    witnesses: tuple


@dataclass
class ChamberMap:
    samples: list
    chambers: list  # (t_first, t_last, witness)
    walls: list  # exact parameter values where adjacent chambers meet


def _sample(args):
    S, G1, G2, k, t = args
    A = tuple((1 - t) * a + t * b for a, b in zip(G1, G2))
    if not is_big(A, S):
        return ChamberSample(t, False, None, ())
    v, w = alg_capacity_abstract(S, A, k, require_nef=False)
    return ChamberSample(t, True, v, w)


def chamber_scan(S: SurfaceLattice, G1, G2, k: int, resolution: int, threads: int = 1) -> ChamberMap:
    """Optimisers of c_k along A(t) = (1-t) G1 + t G2 for t = j/resolution."""
    if resolution < 1:
        raise ValidationError("resolution must be positive")
    G1, G2 = _vec(G1), _vec(G2)
    jobs = [(S, G1, G2, k, Fraction(j, resolution)) for j in range(resolution + 1)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            samples = list(ex.map(_sample, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        samples = [_sample(j) for j in jobs]
    chambers = []
    for s in samples:
        if not s.big or len(s.witnesses) != 1:
            continue
        w = s.witnesses[0]
        if chambers and chambers[-1][2] == w:
            chambers[-1][1] = s.t
        else:
            chambers.append([s.t, s.t, w])
    walls = []
    for (_, _, w1), (_, _, w2) in zip(chambers, chambers[1:]):
        a1, b1 = S.dot(w1, G1), S.dot(w1, G2)
        a2, b2 = S.dot(w2, G1), S.dot(w2, G2)
        den = (b1 - a1) - (b2 - a2)
        walls.append((a2 - a1) / den if den else None)
    return ChamberMap(samples, [tuple(c) for c in chambers], walls)


# ---------------------------------------------------------------------------
# lattices of smooth toric surfaces

@dataclass
class ToricLattice:
    lattice: SurfaceLattice
    surface: object
    basis_rays: list
    pinned: tuple

    def reduce(self, support) -> tuple:
        """Class of a support vector in the basis of non-pinned invariant divisors."""
        Y = self.surface
        p, q = self.pinned
        ap, aq = rat(support[p]), rat(support[q])
        return tuple(rat(support[i]) - ap * Y.rays[i][0] - aq * Y.rays[i][1] for i in self.basis_rays)

    def support(self, coords) -> tuple:
        out = [Fraction(0)] * self.surface.n
        for c, i in zip(coords, self.basis_rays):
            out[i] = rat(c)
        return tuple(out)

    @property
    def polarisation(self) -> tuple:
        return self.reduce(self.surface.polarisation)


def toric_lattice(Y) -> ToricLattice:
    """Intersection lattice of a smooth toric surface whose fan contains (1,0) and (0,1)."""
    from .toric import gram_matrix

    if not Y.is_smooth():
        raise ValidationError("toric lattice extraction needs a smooth fan (take a resolution first)")
    if (1, 0) not in Y.rays or (0, 1) not in Y.rays:
        raise ValidationError("fan must contain (1,0) and (0,1)")
    p, q = Y.rays.index((1, 0)), Y.rays.index((0, 1))
    basis = [i for i in range(Y.n) if i not in (p, q)]
    Gfull = gram_matrix(Y)
    gram = [[Gfull[i][j] for j in basis] for i in basis]
    tl = ToricLattice(None, Y, basis, (p, q))  # type: ignore[arg-type]
    K = tl.reduce([-1] * Y.n)
    eff = [tl.reduce([int(i == j) for j in range(Y.n)]) for i in range(Y.n)]
    labels = [f"D{i}" for i in basis]
    tl.lattice = SurfaceLattice(len(basis), gram, K, 1, eff, labels)
    return tl
