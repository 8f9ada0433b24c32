"""Curated fixtures and their golden values.

Each fixture lives in ``corpus_data/<name>/`` with an ``input.json``, a
``golden/`` directory of CSV files and a ``PROVENANCE.md``.  Golden values
carry the name of the oracle that produced them; ``verify_fixture`` reruns
those oracles.  The main solvers are never used to produce golden values.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Optional

from .domains import ConvexToricDomain, domain_from_json
from .errors import ValidationError
from .surfaces import SurfaceLattice, lattice_from_json

DATA_PACKAGE = "capax"
DATA_DIR = "corpus_data"


@dataclass(frozen=True)
class GoldenRow:
    key: str
    value: Fraction
    source: str
    extra: str = ""


@dataclass
class Fixture:
    name: str
    kind: str  # "domain" or "lattice"
    input: dict
    golden: dict[str, list[GoldenRow]] = field(default_factory=dict)
    provenance: str = ""

    def domain(self) -> ConvexToricDomain:
        if self.kind != "domain":
            raise ValidationError(f"fixture {self.name} is not a domain")
        return domain_from_json(self.input["domain"])

    def lattice(self) -> SurfaceLattice:
        if self.kind != "lattice":
            raise ValidationError(f"fixture {self.name} is not a surface lattice")
        return lattice_from_json(self.input["lattice"])

    @property
    def polarisation(self) -> tuple:
        return tuple(_parse_rat(x) for x in self.input["polarisation"])

    def capacities(self, source: Optional[str] = None) -> list[Fraction]:
        """Golden prefix c_0, c_1, ...; with several sources they must agree wherever they overlap."""
        rows = self.golden.get("capacities", [])
        if source is not None:
            rows = [r for r in rows if r.source == source]
        by_k: dict[int, Fraction] = {}
        for r in rows:
            k = int(r.key)
            if by_k.setdefault(k, r.value) != r.value:
                raise ValidationError(f"fixture {self.name}: golden sources disagree at k={k}")
        if sorted(by_k) != list(range(len(by_k))):
            raise ValidationError(f"fixture {self.name}: capacity goldens are not a prefix")
        return [by_k[k] for k in range(len(by_k))]

    def invariant(self, key: str) -> Fraction:
        for r in self.golden.get("invariants", []):
            if r.key == key:
                return r.value
        raise KeyError(key)

    def sources(self, table: str = "capacities") -> set[str]:
        return {r.source for r in self.golden.get(table, [])}


def _parse_rat(x) -> Fraction:
    if isinstance(x, list):
        return Fraction(int(x[0]), int(x[1]))
    return Fraction(x)


def _root():
    return resources.files(DATA_PACKAGE).joinpath(DATA_DIR)


def registry() -> list[str]:
    root = _root()
    return sorted(p.name for p in root.iterdir() if p.is_dir() and p.joinpath("input.json").is_file())


def parse_golden_csv(text: str, table: str) -> list[GoldenRow]:
    rows = []
    reader = csv.DictReader(io.StringIO(text))
    need = {"value_num", "value_den", "source"}
    if reader.fieldnames is None or not need <= set(reader.fieldnames):
        raise ValidationError(f"golden table {table} lacks columns {sorted(need)}")
    key_col = reader.fieldnames[0]
    for line in reader:
        try:
            v = Fraction(int(line["value_num"]), int(line["value_den"]))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"malformed value in golden table {table}: {line}") from exc
        if not line["source"]:
            raise ValidationError(f"golden row without a source in {table}: {line}")
        rows.append(GoldenRow(line[key_col], v, line["source"], line.get("extra", "") or ""))
    return rows


def load_fixture(name: str) -> Fixture:
    if name not in registry():
        raise ValidationError(f"unknown fixture {name!r}; available: {', '.join(registry())}")
    d = _root().joinpath(name)
    try:
        data = json.loads(d.joinpath("input.json").read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"fixture {name}: input.json is not valid JSON") from exc
    kind = data.get("kind")
    if kind not in ("domain", "lattice"):
        raise ValidationError(f"fixture {name}: unknown kind {kind!r}")
    fx = Fixture(name, kind, data)
    g = d.joinpath("golden")
    if g.is_dir():
        for f in sorted(g.iterdir(), key=lambda p: p.name):
            if f.name.endswith(".csv"):
                table = f.name[:-4]
                fx.golden[table] = parse_golden_csv(f.read_text(), table)
    prov = d.joinpath("PROVENANCE.md")
    if prov.is_file():
        fx.provenance = prov.read_text()
    # parse eagerly so malformed inputs fail at load time
    fx.domain() if kind == "domain" else fx.lattice()
    return fx


def write_table(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# independent oracles

def ball_formula(k_max: int, size=1) -> list[Fraction]:
    """Triangle of side ``size``: smallest d with (d+1)(d+2)/2 >= k+1, times size."""
    out = []
    for k in range(k_max + 1):
        d = 0
        while (d + 1) * (d + 2) // 2 < k + 1:
            d += 1
        out.append(Fraction(d) * size)
    return out


def polydisk_formula(k_max: int, a=1, b=1) -> list[Fraction]:
    """Rectangle a x b: min of i*a + j*b over (i+1)(j+1) >= k+1."""
    a, b = Fraction(a), Fraction(b)
    out = []
    for k in range(k_max + 1):
        best = None
        for i in range(k + 1):
            j = max(0, -(-(k + 1) // (i + 1)) - 1)
            v = i * a + j * b
            best = v if best is None or v < best else best
        out.append(best)
    return out


def nef_box_scan(S: SurfaceLattice, A, k_max: int, radius: int) -> list[Fraction]:
    """Exhaustive scan of integral classes with coordinates in [-radius, radius].

    Nefness is tested against the effective generators and the section
    count is Riemann-Roch, which is exact for nef classes on the rational
    surfaces in the corpus.
    """
    A = tuple(Fraction(x) for x in A)
    n = S.rank
    best: list[Optional[Fraction]] = [None] * (k_max + 1)
    for D in itertools.product(range(-radius, radius + 1), repeat=n):
        if any(S.dot(D, C) < 0 for C in S.effective_gens):
            continue
        chi = S.chiO + (S.dot(D, D) - S.dot(D, S.K)) / 2
        val = S.dot(D, A)
        top = min(k_max, math.floor(chi - S.chiO))
        for k in range(top + 1):
            if best[k] is None or val < best[k]:
                best[k] = val
    if any(b is None for b in best):
        raise ValidationError("scan radius too small to reach every k")
    return best  # type: ignore[return-value]


def _oracle(fx: Fixture, source: str, k_max: int) -> list[Fraction]:
    spec = fx.input.get("oracles", {}).get(source)
    if spec is None:
        raise ValidationError(f"fixture {fx.name} does not describe oracle {source!r}")
    kind = spec["type"]
    if kind == "brute_polygons":
        from .ech_solver import brute_oracle_table

        return brute_oracle_table(fx.domain(), k_max, int(spec["box"]))
    if kind == "ball_formula":
        return ball_formula(k_max, _parse_rat(spec.get("size", 1)))
    if kind == "polydisk_formula":
        return polydisk_formula(k_max, _parse_rat(spec["a"]), _parse_rat(spec["b"]))
    if kind == "nef_box_scan":
        return nef_box_scan(fx.lattice(), fx.polarisation, k_max, int(spec["radius"]))
    if kind == "brute_polygons_of":
        from .ech_solver import brute_oracle_table

        return brute_oracle_table(domain_from_json(spec["domain"]), k_max, int(spec["box"]))
    raise ValidationError(f"unknown oracle type {kind!r}")


ORACLE_RUNNER: Callable[[Fixture, str, int], list[Fraction]] = _oracle


def verify_fixture(fx: Fixture) -> list[str]:
    """Rerun every oracle named in the capacity goldens; return mismatch descriptions."""
    problems = []
    for source in sorted(fx.sources("capacities")):
        if source not in fx.input.get("oracles", {}):
            continue  # hand values
        want = fx.capacities(source)
        got = _oracle(fx, source, len(want) - 1)
        if got != want:
            problems.append(f"{fx.name}/{source}: golden {want} but oracle gives {got}")
    return problems
