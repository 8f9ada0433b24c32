"""Write the fixture corpus under src/capax/corpus_data.

Golden capacities come only from the independent oracles in capax.corpus
(polygon enumeration, closed forms, exhaustive nef scans); invariants
are hand values.  Run once; the test suite checks the files against the
oracles and the solvers against the files.
"""
import json
import sys
from fractions import Fraction
from pathlib import Path

from capax.corpus import Fixture, _oracle, write_table

ROOT = Path(__file__).resolve().parents[1] / "src" / "capax" / "corpus_data"


def R(x):
    x = Fraction(x)
    return [x.numerator, x.denominator]


def diag(*d):
    return [[d[i] if i == j else 0 for j in range(len(d))] for i in range(len(d))]


def unit(n, i, s=1):
    return [s if j == i else 0 for j in range(n)]


def dp_lattice(points):
    n = points + 1
    eff = [unit(n, i) for i in range(1, n)]
    for i in range(1, n):
        for j in range(i + 1, n):
            eff.append([1] + [-1 if t in (i, j) else 0 for t in range(1, n)])
    return {
        "rank": n,
        "gram": diag(1, *([-1] * points)),
        "K": [-3] + [1] * points,
        "chiO": 1,
        "effective_gens": eff,
        "labels": ["H"] + [f"E{i}" for i in range(1, n)],
    }


FIXTURES = {
    "p2": {
        "kind": "lattice",
        "lattice": {"rank": 1, "gram": [[1]], "K": [-3], "chiO": 1, "effective_gens": [[1]],
                    "nef_gens": [[1]], "labels": ["H"]},
        "polarisation": [1],
        "oracles": {"nef_scan": {"type": "nef_box_scan", "radius": 8}},
        "k": {"nef_scan": 20},
        "invariants": {"A_sq": 1, "minus_KA": 3, "gap": 1, "index_A": 4},
    },
    "f1": {
        "kind": "lattice",
        "lattice": {"rank": 2, "gram": [[0, 1], [1, 1]], "K": [-1, -2], "chiO": 1,
                    "effective_gens": [[1, 0], [-1, 1]], "nef_gens": [[1, 0], [0, 1]],
                    "labels": ["F", "D_inf"]},
        "polarisation": [1, 1],
        "oracles": {
            "nef_scan": {"type": "nef_box_scan", "radius": 6},
            "polygons": {"type": "brute_polygons_of", "box": 6,
                         "domain": {"vertices": [[0, 1], [1, 1], [2, 0]]}},
        },
        "k": {"nef_scan": 12, "polygons": 8},
        "invariants": {"K_sq": 8, "K_dot_F": -2, "K_dot_D_inf": -3, "index_F": 2, "index_D_inf": 4,
                       "A_sq": 3, "minus_KA": 5, "gap": 1},
    },
    "dp5": {
        "kind": "lattice",
        "lattice": dp_lattice(4),
        "polarisation": [3, -1, -1, -1, -1],
        "oracles": {"nef_scan": {"type": "nef_box_scan", "radius": 4}},
        "k": {"nef_scan": 10},
        "invariants": {"A_sq": 5, "minus_KA": 5, "gap": 1},
    },
    "dp7": {
        "kind": "lattice",
        "lattice": dp_lattice(2),
        "polarisation": [3, -1, -1],
        "oracles": {"nef_scan": {"type": "nef_box_scan", "radius": 7}},
        "k": {"nef_scan": 12},
        "invariants": {"A_sq": 7, "minus_KA": 7, "gap": 1},
    },
    "ball": {
        "kind": "domain",
        "domain": {"vertices": [[0, 1], [1, 0]]},
        "oracles": {"polygons": {"type": "brute_polygons", "box": 6},
                    "formula": {"type": "ball_formula", "size": 1}},
        "k": {"polygons": 10, "formula": 60},
        "invariants": {"A_sq": 1, "perimeter": 3, "gap": 1, "ruelle": 2, "limsup": "-1/2",
                       "liminf": "-3/2", "gamma_0": 1},
    },
    "ball2": {
        "kind": "domain",
        "domain": {"vertices": [[0, 2], [2, 0]]},
        "oracles": {"polygons": {"type": "brute_polygons", "box": 6},
                    "formula": {"type": "ball_formula", "size": 2}},
        "k": {"polygons": 8, "formula": 60},
        "invariants": {"A_sq": 4, "perimeter": 6, "gap": 2, "ruelle": 4, "limsup": -1, "liminf": -3},
    },
    "square": {
        "kind": "domain",
        "domain": {"vertices": [[0, 1], [1, 1], [1, 0]]},
        "oracles": {"polygons": {"type": "brute_polygons", "box": 6},
                    "formula": {"type": "polydisk_formula", "a": 1, "b": 1}},
        "k": {"polygons": 10, "formula": 60},
        "invariants": {"A_sq": 2, "perimeter": 4, "gap": 1, "ruelle": 3, "limsup": -1, "liminf": -2,
                       "gamma_0": 1, "gamma_1": "3/4"},
    },
    "tri21": {
        "kind": "domain",
        "domain": {"vertices": [[0, 1], [2, 0]]},
        "oracles": {"polygons": {"type": "brute_polygons", "box": 6}},
        "k": {"polygons": 10},
        "invariants": {"A_sq": 2, "perimeter": 4, "gap": 1, "ruelle": 3},
    },
    "tri32": {
        "kind": "domain",
        "domain": {"vertices": [[0, 2], [3, 0]]},
        "oracles": {"polygons": {"type": "brute_polygons", "box": 6}},
        "k": {"polygons": 10},
        "invariants": {"A_sq": 6, "perimeter": 6, "gap": 1, "ruelle": 5},
    },
    "quad": {
        "kind": "domain",
        "domain": {"vertices": [[0, [7, 2]], [[3, 2], [5, 2]], [3, 1], [4, 0]]},
        "oracles": {"polygons": {"type": "brute_polygons", "box": 6}},
        "k": {"polygons": 8},
        "invariants": {"A_sq": "61/4", "perimeter": "21/2", "gap": "1/2", "scale": "1/2", "head": 4},
    },
}

PROVENANCE = """# {name}

Inputs in `input.json`.  Golden tables in `golden/`:

- `capacities.csv`: one row per (k, source). The `source` column names an
  entry of `oracles` in `input.json`; `capax.corpus.verify_fixture` reruns it.
{oracles}
- `invariants.csv`: hand-computed values (`source` = `by_hand`).
{extra}"""

ORACLE_TEXT = {
    "brute_polygons": "enumeration of lattice polygons up to translation in a box, costed by mixed volume",
    "brute_polygons_of": "the same polygon enumeration on the matching toric domain",
    "ball_formula": "closed form: least d with (d+1)(d+2)/2 > k, scaled",
    "polydisk_formula": "closed form: min i*a + j*b over (i+1)(j+1) > k",
    "nef_box_scan": "exhaustive scan of integral classes in a coordinate box with Riemann-Roch counts",
}

F1_CHAMBERS = [
    # k, walls in t for A(t) = (1-t) F + t (D_inf - F), optimisers left to right
    (1, ["1/2"], "F;D_inf"),
    (2, ["1/3"], "2F;D_inf"),
    (3, ["1/3", "1/2"], "3F;F+D_inf;2D_inf"),
]

# isoparametric transform by hand: start class, number of steps, final nef class
ISO = {
    "f1": [
        ("-2;2", 1, "0;0"),      # 2E with E = D_inf - F: D.E = -2
        ("-1;2", 1, "0;1"),      # F + 2E: D.E = -1, subtract E once
    ],
    "dp5": [
        ("1;2;0;0;0", 1, "1;0;0;0;0"),     # H + 2E1: D.E1 = -2
        ("2;-2;-2;1;0", 1, "0;0;0;0;0"),   # 2(H-E1-E2) + E3 meets both curves negatively
        ("1;1;-1;0;0", 1, "1;0;-1;0;0"),   # H - E2 + E1
    ],
}


def main(only=None):
    for name, spec in FIXTURES.items():
        if only and name not in only:
            continue
        d = ROOT / name
        (d / "golden").mkdir(parents=True, exist_ok=True)
        inp = {k: v for k, v in spec.items() if k not in ("k", "invariants")}
        (d / "input.json").write_text(json.dumps(inp, indent=2) + "\n")
        fx = Fixture(name, spec["kind"], inp)
        rows = []
        for source, kmax in spec["k"].items():
            vals = _oracle(fx, source, kmax)
            rows += [{"k": k, "value_num": v.numerator, "value_den": v.denominator, "source": source}
                     for k, v in enumerate(vals)]
            print(name, source, [str(v) for v in vals], flush=True)
        (d / "golden" / "capacities.csv").write_text(write_table(rows, ["k", "value_num", "value_den", "source"]))
        inv = [{"name": key, "value_num": Fraction(v).numerator, "value_den": Fraction(v).denominator,
                "source": "by_hand"} for key, v in spec["invariants"].items()]
        (d / "golden" / "invariants.csv").write_text(write_table(inv, ["name", "value_num", "value_den", "source"]))
        extra = ""
        if name == "f1":
            ch = [{"k": k, "value_num": Fraction(w).numerator, "value_den": Fraction(w).denominator,
                   "source": "by_hand", "extra": opt} for k, walls, opt in F1_CHAMBERS for w in walls]
            (d / "golden" / "chambers.csv").write_text(
                write_table(ch, ["k", "value_num", "value_den", "source", "extra"]))
            extra = ("- `chambers.csv`: walls in t for A(t) = (1-t)F + t(D_inf - F) and the optimisers\n"
                     "  between them, from comparing F.A, D_inf.A and their multiples by hand.\n"
                     "- Encoding: basis (F, D_inf) with F^2 = 0, F.D_inf = 1, D_inf^2 = 1; K = -F - 2 D_inf\n"
                     "  gives K.F = -2, K.D_inf = -3, K^2 = 8.\n")
        if name in ISO:
            rows = [{"start": a, "value_num": n, "value_den": 1, "source": "by_hand", "extra": b}
                    for a, n, b in ISO[name]]
            (d / "golden" / "iso.csv").write_text(write_table(rows, ["start", "value_num", "value_den", "source", "extra"]))
            extra += ("- `iso.csv`: start class, number of transform steps until nef, and the final class,\n"
                      "  from Gram arithmetic by hand.\n")
        orc = "\n".join(f"  - `{s}`: {ORACLE_TEXT[o['type']]}." for s, o in spec["oracles"].items())
        (d / "PROVENANCE.md").write_text(PROVENANCE.format(name=name, oracles=orc, extra=extra))


if __name__ == "__main__":
    main(set(sys.argv[1:]) or None)
