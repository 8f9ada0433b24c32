"""Command line entry point.

Exit codes: 0 success, 1 oracle or golden mismatch, 2 invalid input,
3 resource limit reached.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import asymptotics as asy
from .corpus import load_fixture, registry, verify_fixture
from .domains import ConcavePiece, concave_weights, convex_weights, domain_from_json, weight_gcd
from .ech_solver import DEFAULT_MAX_NODES, brute_oracle_table, cap_function, ech_capacities
from .errors import ResourceLimit, ValidationError
from .lattice_geom import area, lattice_perimeter
from .surfaces import alg_capacities_abstract, chamber_scan, lattice_from_json
from .toric import alg_capacities_toric, anticanonical_degree, normal_fan, surface_from_json

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3


def enc(x):
    """JSON-ready copy with every Fraction as a [num, den] pair."""
    if isinstance(x, Fraction):
        return [x.numerator, x.denominator]
    if isinstance(x, dict):
        return {k: enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [enc(v) for v in x]
    return x


def _emit_json(obj, out):
    json.dump(enc(obj), out, sort_keys=True, separators=(",", ":"))
    out.write("\n")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc.msg}") from exc


def _domain(args):
    if getattr(args, "fixture", None):
        return load_fixture(args.fixture).domain()
    data = _read_json(args.domain)
    if isinstance(data, dict) and "domain" in data:
        data = data["domain"]
    return domain_from_json(data)


def _lattice_and_A(args):
    if getattr(args, "fixture", None):
        fx = load_fixture(args.fixture)
        S, A = fx.lattice(), fx.polarisation
    else:
        data = _read_json(args.surface)
        if isinstance(data, dict) and "lattice" in data:
            S, A = lattice_from_json(data["lattice"]), data.get("polarisation")
        else:
            S, A = lattice_from_json(data), data.get("polarisation") if isinstance(data, dict) else None
    if getattr(args, "A", None):
        A = _parse_vector(args.A)
    if A is None:
        raise ValidationError("no polarisation given: add 'polarisation' to the JSON or pass --A")
    A = tuple(Fraction(a[0], a[1]) if isinstance(a, list) else Fraction(a) for a in A)
    if len(A) != S.rank:
        raise ValidationError(f"polarisation has {len(A)} entries, lattice rank is {S.rank}")
    return S, A


def _parse_vector(text: str):
    try:
        return [Fraction(t) for t in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse vector {text!r}") from exc


def _toric_surface(args):
    if args.domain or getattr(args, "fixture", None):
        return normal_fan(_domain(args))
    data = _read_json(args.surface)
    return surface_from_json(data)


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("CAPAX_THREADS", "1")
        try:
            n = int(env)
        except ValueError as exc:
            raise ValidationError(f"CAPAX_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ValidationError("thread count must be at least 1")
    return n


def _csv_rows(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _nonneg(name, v):
    if v < 0:
        raise ValidationError(f"{name} must be nonnegative")


# ---------------------------------------------------------------------------
# subcommands

def cmd_ech(args, out):
    _nonneg("--kmax", args.kmax)
    d = _domain(args)
    seq = ech_capacities(d, args.kmax, max_nodes=args.max_nodes)
    header = ["k", "value_num", "value_den"] + (["witness"] if args.witness else [])
    rows = []
    for k, v in enumerate(seq.values):
        row = [k, v.numerator, v.denominator]
        if args.witness:
            row.append(json.dumps(seq.witnesses[k].witness.to_json(), separators=(",", ":")))
        rows.append(row)
    _csv_rows(out, header, rows)
    if args.oracle_check is not None:
        want = brute_oracle_table(d, args.kmax, args.oracle_check)
        if list(seq.values) != want:
            bad = next(k for k in range(len(want)) if seq.values[k] != want[k])
            print(f"mismatch at k={bad}: ech {seq.values[bad]} vs oracle {want[bad]}", file=sys.stderr)
            return EXIT_MISMATCH
    return EXIT_OK


def cmd_alg_toric(args, out):
    _nonneg("--kmax", args.kmax)
    Y = _toric_surface(args)
    step = Fraction(args.step)
    res = alg_capacities_toric(Y, args.kmax, step=step)
    header = ["k", "value_num", "value_den"] + (["witness"] if args.witness else [])
    rows = []
    for r in res:
        row = [r.k, r.value.numerator, r.value.denominator]
        if args.witness:
            row.append(json.dumps(enc(list(r.witness.support)), separators=(",", ":")))
        rows.append(row)
    _csv_rows(out, header, rows)
    return EXIT_OK


def cmd_alg_surface(args, out):
    _nonneg("--kmax", args.kmax)
    S, A = _lattice_and_A(args)
    res = alg_capacities_abstract(S, A, args.kmax, require_nef=not args.allow_non_nef_A)
    header = ["k", "value_num", "value_den"] + (["witness"] if args.witness else [])
    rows = []
    for r in res:
        row = [r.k, r.value.numerator, r.value.denominator]
        if args.witness:
            row.append(";".join(S.label(w) for w in r.witnesses))
        rows.append(row)
    _csv_rows(out, header, rows)
    return EXIT_OK


def cmd_weights(args, out):
    if args.piece:
        data = _read_json(args.piece)
        graph = data["graph"] if isinstance(data, dict) else data
        w = concave_weights(ConcavePiece(tuple((p[0], p[1]) for p in graph)), args.max_iter)
    else:
        w = convex_weights(_domain(args), args.max_iter)
    g = weight_gcd(w)
    payload = w.to_json()
    payload["gcd"] = None if g == float("inf") else enc(g)
    _emit_json(payload, out)
    return EXIT_OK


def cmd_cap(args, out):
    d = _domain(args)
    if args.xmax is not None:
        _nonneg("--xmax", args.xmax)
        xs = [Fraction(x) for x in range(args.xmax + 1)]
    else:
        xs = _parse_vector(args.x)
    rows = [[x.numerator, x.denominator, cap_function(d, x, max_nodes=args.max_nodes)] for x in xs]
    _csv_rows(out, ["x_num", "x_den", "cap"], rows)
    return EXIT_OK


def _domain_sequence(d, kmax):
    return [r.value for r in alg_capacities_toric(normal_fan(d), kmax)]


def cmd_gap(args, out):
    if args.surface or (args.fixture and load_fixture(args.fixture).kind == "lattice"):
        S, A = _lattice_and_A(args)
        vals = [r.value for r in alg_capacities_abstract(S, A, args.kmax)] if args.kmax else None
        ev = asy.is_tightly_constrained(surface=(S, A), values=vals)
        payload = {"gap": asy.gap_formula(S, A), "tight": ev.tight, "routes": ev.routes}
    else:
        d = _domain(args)
        vals = _domain_sequence(d, args.kmax) if args.kmax else None
        ev = asy.is_tightly_constrained(d, values=vals)
        payload = {"gap": asy.gap_formula_domain(d), "edge_gap": asy.domain_gap(d), "tight": ev.tight,
                   "routes": ev.routes}
        if vals is not None:
            rep = asy.gap_and_residues(vals, 2 * area(d.polygon), d.scale)
            payload["tail"] = {"gap": rep.gap, "residues": list(rep.attained_residues), "stable": rep.stable}
    _emit_json(payload, out)
    return EXIT_OK


def _read_sequence(path: str) -> list[Fraction]:
    """Capacity prefix from CSV with k and either value_num/value_den or value columns."""
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    rows = list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))
    by_k = {}
    try:
        for r in rows:
            v = Fraction(int(r["value_num"]), int(r["value_den"])) if "value_num" in r else Fraction(r["value"])
            by_k[int(r["k"])] = v
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{path}: sequence CSV needs k and value_num/value_den (or value) columns") from exc
    if sorted(by_k) != list(range(len(by_k))):
        raise ValidationError(f"{path}: k must run 0, 1, 2, ... without gaps")
    return [by_k[k] for k in range(len(by_k))]


def _sequence_asymptotics(args, out):
    vals = _read_sequence(args.input)
    A_sq = Fraction(args.Asq)
    if A_sq <= 0:
        raise ValidationError("--Asq must be positive")
    window = args.window or max(1, (len(vals) - 1) // 4)
    rep = asy.gap_and_residues(vals, A_sq)
    lims = asy.predicted_limits(rep.gap, Fraction(args.minus_KA)) if args.minus_KA else None
    et = asy.error_terms(vals, A_sq, window, lims)
    payload = {
        "A_sq": A_sq,
        "gap": rep.gap,
        "residues": list(rep.attained_residues),
        "stable": rep.stable,
        "tail_window": list(et.k_range),
        "tail_max": et.tail_max,
        "tail_min": et.tail_min,
        "envelope": et.envelope,
        "weyl_final": asy.weyl_deviation(vals, A_sq)[-1][1],
    }
    if lims is not None:
        mk = Fraction(args.minus_KA)
        payload.update(minus_K_dot_A=mk, ruelle=asy.ruelle(mk, rep.gap),
                       predicted_limsup=lims[0], predicted_liminf=lims[1])
        if A_sq.denominator == 1 and vals[-1] >= 1:
            P = int(A_sq)
            top = int(vals[-1]) - (1 if vals[-1].denominator == 1 else 0)
            x_max = min(top, args.x_max or top)
            caps = asy.cap_values(vals, x_max)
            qp = asy.fit_quasipolynomial(caps, P, mk)
            payload["quasi_polynomial"] = _qp_json(qp)
    _emit_outputs(args, et)
    _emit_json(payload, out)
    return EXIT_OK


def _qp_json(qp):
    return {
        "period": qp.period, "quad": qp.quad, "lin": qp.lin, "onset": qp.onset,
        "fitted_quad": qp.fitted_quad, "fitted_lin": qp.fitted_lin,
        "constants": list(qp.constants), "sufficient": qp.sufficient,
    }


def _emit_outputs(args, et):
    if args.data:
        with open(args.data, "w", newline="") as fh:
            _csv_rows(fh, ["k", "value_num", "value_den", "e_k"],
                      [[k, c.numerator, c.denominator, repr(e)] for k, c, e in et.samples])
    if args.plot:
        from .plotting import plot_error_terms

        plot_error_terms(et, args.plot)


def cmd_asymptotics(args, out):
    if args.input:
        return _sequence_asymptotics(args, out)
    if args.kmax is None:
        raise ValidationError("--kmax is required with --domain/--fixture")
    d = _domain(args)
    Y = normal_fan(d)
    kmax = args.kmax
    vals = _domain_sequence(d, kmax)
    A_sq = 2 * area(d.polygon)
    minus_KA = anticanonical_degree(Y)
    window = args.window or max(1, kmax // 4)
    lims = asy.predicted_limits_domain(d)
    et = asy.error_terms(vals, A_sq, window, lims)
    payload = {
        "A_sq": A_sq,
        "minus_K_dot_A": minus_KA,
        "gap": asy.gap_formula_domain(d),
        "ruelle": asy.ruelle_domain(d),
        "predicted_limsup": lims[0],
        "predicted_liminf": lims[1],
        "tail_window": list(et.k_range),
        "tail_max": et.tail_max,
        "tail_min": et.tail_min,
        "envelope": et.envelope,
        "weyl_final": asy.weyl_deviation(vals, A_sq)[-1][1],
    }
    if A_sq.denominator == 1 and d.classification == "lattice":
        P = int(A_sq)
        x_max = min(int(vals[-1]) - 1, args.x_max or int(vals[-1]) - 1)
        caps = asy.cap_values(vals, x_max)
        qp = asy.fit_quasipolynomial(caps, P, minus_KA)
        payload["quasi_polynomial"] = _qp_json(qp)
        payload["low_bound_onset"] = asy.low_bound_onset(caps, P, lattice_perimeter(d.polygon))
    _emit_outputs(args, et)
    _emit_json(payload, out)
    return EXIT_OK


def cmd_chambers(args, out):
    S, _A = _lattice_and_A_optional(args)
    try:
        i, j = (int(t) for t in args.plane.split(","))
        G1, G2 = S.effective_gens[i], S.effective_gens[j]
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"--plane must name two effective generators by index, got {args.plane!r}") from exc
    cmap = chamber_scan(S, G1, G2, args.k, args.resolution, threads=_threads(args))
    rows = [[c[0].numerator, c[0].denominator, c[1].numerator, c[1].denominator, S.label(c[2])]
            for c in cmap.chambers]
    _csv_rows(out, ["t_first_num", "t_first_den", "t_last_num", "t_last_den", "optimiser"], rows)
    out.write("# walls " + json.dumps(enc(cmap.walls), separators=(",", ":")) + "\n")
    if args.svg:
        from .plotting import plot_chambers

        plot_chambers(cmap, S, G1, G2, args.svg, title=f"k = {args.k}")
    return EXIT_OK


def _lattice_and_A_optional(args):
    if getattr(args, "fixture", None):
        return load_fixture(args.fixture).lattice(), None
    data = _read_json(args.surface)
    if isinstance(data, dict) and "lattice" in data:
        data = data["lattice"]
    return lattice_from_json(data), None


def cmd_obstruct(args, out):
    src = domain_from_json(_unwrap_domain(_read_json(args.domain)))
    dst = domain_from_json(_unwrap_domain(_read_json(args.target)))
    rep = asy.obstruct(src, dst, args.kmax, solver=args.solver)
    _emit_json({
        "first_k": rep.first_k,
        "capacity_verdict": rep.capacity_verdict,
        "areas_equal": rep.areas_equal,
        "perimeters": list(rep.perimeters),
        "perimeter_verdict": rep.perimeter_verdict,
    }, out)
    return EXIT_OK


def _unwrap_domain(data):
    return data["domain"] if isinstance(data, dict) and "domain" in data else data


def cmd_oracle(args, out):
    _nonneg("--kmax", args.kmax)
    d = _domain(args)
    vals = brute_oracle_table(d, args.kmax, args.box)
    _csv_rows(out, ["k", "value_num", "value_den"], [[k, v.numerator, v.denominator] for k, v in enumerate(vals)])
    if args.check:
        ech = ech_capacities(d, args.kmax, max_nodes=args.max_nodes).values
        if list(ech) != vals:
            bad = next(k for k in range(len(vals)) if ech[k] != vals[k])
            print(f"mismatch at k={bad}: ech {ech[bad]} vs oracle {vals[bad]}", file=sys.stderr)
            return EXIT_MISMATCH
    return EXIT_OK


def cmd_fixtures(args, out):
    if not args.name:
        for n in registry():
            out.write(n + "\n")
        return EXIT_OK
    fx = load_fixture(args.name)
    if args.verify:
        problems = verify_fixture(fx)
        for p in problems:
            print(p, file=sys.stderr)
        out.write("ok\n" if not problems else "mismatch\n")
        return EXIT_MISMATCH if problems else EXIT_OK
    _emit_json({"name": fx.name, "kind": fx.kind, "input": fx.input,
                "golden": {t: [[r.key, r.value, r.source] for r in rows] for t, rows in fx.golden.items()}}, out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="capax", description="ECH and algebraic capacities of toric domains and surfaces")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: $CAPAX_THREADS or 1)")
    p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES, help="state cap for the polygon search")
    p.add_argument("--max-iter", type=int, default=64, help="recursion cap for weight sequences")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def domain_source(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--domain", help="domain JSON file ({'vertices': ...} or a fixture input.json)")
        g.add_argument("--fixture", help="name of a bundled fixture")
        return g

    sp = sub.add_parser("ech", help="ECH capacities of a convex toric domain")
    domain_source(sp)
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--witness", "--witnesses", dest="witness", action="store_true")
    sp.add_argument("--oracle-check", type=int, metavar="BOX", help="also compare against the brute-force oracle")
    sp.set_defaults(func=cmd_ech)

    sp = sub.add_parser("alg-toric", help="algebraic capacities of a polarised toric surface")
    g = domain_source(sp)
    g.add_argument("--surface", help="toric surface JSON with 'rays' and 'polarisation'")
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--step", default="1", help="support grid step for rational divisors")
    sp.add_argument("--witness", action="store_true")
    sp.set_defaults(func=cmd_alg_toric)

    sp = sub.add_parser("alg-surface", help="algebraic capacities from an intersection lattice")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--surface", help="lattice JSON")
    g.add_argument("--fixture")
    sp.add_argument("--A", help="polarisation as comma separated coordinates")
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--allow-non-nef-A", action="store_true")
    sp.add_argument("--witness", action="store_true")
    sp.set_defaults(func=cmd_alg_surface)

    sp = sub.add_parser("weights", help="weight sequence of a convex domain or concave piece")
    g = domain_source(sp)
    g.add_argument("--piece", help="concave piece JSON: graph vertices from the y-axis to the x-axis")
    sp.set_defaults(func=cmd_weights)

    sp = sub.add_parser("cap", help="cap function: number of capacities <= x")
    domain_source(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", help="comma separated rationals")
    g.add_argument("--xmax", type=int, help="every integer x = 0..xmax")
    sp.set_defaults(func=cmd_cap)

    sp = sub.add_parser("gap", help="gap and tightly-constrained routes")
    g = domain_source(sp)
    g.add_argument("--surface", help="lattice JSON with polarisation")
    sp.add_argument("--A")
    sp.add_argument("--kmax", type=int, default=0, help="also observe the gap on k <= kmax")
    sp.set_defaults(func=cmd_gap)

    sp = sub.add_parser("asymptotics", help="error terms, limits and cap quasi-polynomial")
    g = domain_source(sp)
    g.add_argument("--input", help="capacity sequence CSV instead of a domain")
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--Asq", help="A^2 (with --input)")
    sp.add_argument("--minus-KA", help="-K.A (with --input) for predicted limits and the cap closed form")
    sp.add_argument("--window", type=int, default=0)
    sp.add_argument("--x-max", type=int, default=0)
    sp.add_argument("--plot", help="write the e_k figure (.png/.svg)")
    sp.add_argument("--data", help="write e_k samples as CSV")
    sp.set_defaults(func=cmd_asymptotics)

    sp = sub.add_parser("chambers", help="optimiser chambers along a segment of polarisations")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--surface")
    g.add_argument("--fixture")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--resolution", type=int, default=100)
    sp.add_argument("--plane", default="0,1", help="indices of two effective generators")
    sp.add_argument("--svg", help="write the chamber ray diagram")
    sp.set_defaults(func=cmd_chambers)

    sp = sub.add_parser("obstruct", help="capacity and perimeter obstructions to embeddings")
    sp.add_argument("--domain", "--a", dest="domain", required=True, help="source domain")
    sp.add_argument("--target", "--b", dest="target", required=True, help="target domain")
    sp.add_argument("--kmax", type=int, default=20)
    sp.add_argument("--solver", choices=["toric", "ech"], default="toric")
    sp.set_defaults(func=cmd_obstruct)

    sp = sub.add_parser("oracle", help="brute-force polygon oracle")
    domain_source(sp)
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--box", type=int, default=6)
    sp.add_argument("--check", action="store_true", help="compare against the ECH solver")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("fixtures", help="list, print or verify bundled fixtures")
    sp.add_argument("name", nargs="?")
    sp.add_argument("--verify", action="store_true")
    sp.set_defaults(func=cmd_fixtures)
    return p


def _check_conflicts(args):
    if args.command == "alg-toric":
        try:
            step = Fraction(args.step)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"--step must be a rational, got {args.step!r}") from exc
        if step <= 0:
            raise ValidationError("--step must be positive")
    if args.command == "asymptotics":
        if args.input and args.Asq is None:
            raise ValidationError("--input needs --Asq")
        if not args.input and (args.Asq is not None or args.minus_KA is not None):
            raise ValidationError("--Asq and --minus-KA only apply together with --input")
        if args.input and args.kmax is not None:
            raise ValidationError("--kmax does not apply to --input sequences")
        for name in ("Asq", "minus_KA"):
            v = getattr(args, name)
            if v is not None:
                try:
                    Fraction(v)
                except (ValueError, ZeroDivisionError) as exc:
                    raise ValidationError(f"--{name.replace('_', '-')} must be a rational, got {v!r}") from exc
    if args.command == "ech" and args.oracle_check is not None and args.oracle_check < 1:
        raise ValidationError("--oracle-check box must be positive")
    if args.command == "gap" and args.A and not args.surface:
        raise ValidationError("--A only applies together with --surface")


def run(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.max_nodes < 1 or args.max_iter < 1:
            raise ValidationError("--max-nodes and --max-iter must be positive")
        _check_conflicts(args)
        return args.func(args, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
