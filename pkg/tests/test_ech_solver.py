from fractions import Fraction

import pytest
from hypothesis import given, settings

from capax.corpus import load_fixture
from capax.domains import parse_domain
from capax.ech_solver import (
    ResourceLimit,
    brute_oracle,
    brute_oracle_table,
    cap_function,
    check_record,
    decompose_witness,
    ech_capacities,
    ech_capacity,
    enumerate_small_polygons,
    optimiser_shape_report,
)
from capax.errors import ValidationError
from capax.lattice_geom import RatPolygon, lattice_count, mixed_volume

from conftest import F, lattice_convex_chains, poly

BALL = parse_domain([(0, 1), (1, 0)])
BALL2 = parse_domain([(0, 2), (2, 0)])
SQUARE = parse_domain([(0, 1), (1, 1), (1, 0)])
TRI21 = parse_domain([(0, 1), (2, 0)])
QUAD = parse_domain([(0, F(7, 2)), (F(3, 2), F(5, 2)), (3, 1), (4, 0)])


def test_ball_small_k():
    r0 = ech_capacity(BALL, 0)
    assert r0.value == 0 and r0.witness.degeneracy == "point"
    r1 = ech_capacity(BALL, 1)
    assert r1.value == 1 and r1.witness.degeneracy == "segment"
    assert lattice_count(r1.witness) == 2
    assert ech_capacity(BALL, 3).value == 2


def test_tie_break_is_lex_smallest_vertex_list():
    # both unit segments cost 1 on the ball; the vertical one sorts first
    assert ech_capacity(BALL, 1).witness.normalized() == poly((0, 0), (0, 1))


def test_k3_witness_among_known_optimisers():
    w = ech_capacity(BALL, 3).witness.normalized()
    assert mixed_volume(w, BALL.polygon) == 2 and lattice_count(w) == 4


def test_sequences():
    assert ech_capacities(BALL, 6).values == [0, 1, 1, 2, 2, 2, 3]
    assert ech_capacities(BALL2, 3).values == [0, 2, 2, 4]
    # polydisk formula min{i + j : (i+1)(j+1) >= k+1} gives 2 at k = 2
    assert ech_capacities(SQUARE, 3).values == [0, 1, 2, 2]


def test_negative_k():
    with pytest.raises(ValidationError):
        ech_capacity(BALL, -1)


def test_brute_oracle_examples():
    assert brute_oracle(BALL, 2, 3) == 1
    assert brute_oracle(TRI21, 1, 3) == brute_oracle_table(TRI21, 1, 3)[1]
    assert brute_oracle(QUAD, 0, 2) == 0


def test_brute_oracle_limits():
    with pytest.raises(ResourceLimit):
        brute_oracle(BALL, 2, 9)
    with pytest.raises(ResourceLimit):
        brute_oracle_table(BALL, 9, 1)


def test_enumeration_counts_agree_with_scan():
    for verts, n in list(enumerate_small_polygons(6, 4).items())[:400]:
        P = RatPolygon(tuple((Fraction(a), Fraction(b)) for a, b in verts))
        assert lattice_count(P) == n


def test_cap_function_examples():
    assert cap_function(BALL, 0) == 1
    assert cap_function(BALL, 1) == 3
    assert cap_function(BALL, 2) == 6
    with pytest.raises(ValidationError):
        cap_function(BALL, -1)


def test_cap_function_matches_sequence():
    seq = ech_capacities(QUAD, 12).values
    for x in [0, F(7, 2), 4, 5, 7, F(15, 2), 10]:
        assert cap_function(QUAD, x) == sum(1 for v in seq if v <= x)


@pytest.mark.parametrize("name", ["ball", "ball2", "square", "tri21", "tri32", "quad"])
def test_matches_oracle_goldens(name):
    fx = load_fixture(name)
    gold = fx.capacities("polygons")
    assert ech_capacities(fx.domain(), len(gold) - 1).values == gold


@pytest.mark.parametrize("name", ["ball", "ball2", "square"])
def test_matches_formula_goldens(name):
    fx = load_fixture(name)
    gold = fx.capacities("formula")[:31]
    assert ech_capacities(fx.domain(), 30).values == gold


def test_witnesses_valid():
    for d in (BALL, SQUARE, TRI21, QUAD):
        seq = ech_capacities(d, 10)
        assert all(check_record(d, r) for r in seq.witnesses)
        assert seq.is_monotone()


@pytest.mark.parametrize("q", [F(2), F(3, 2)])
def test_conformality(q):
    for d in (BALL, SQUARE, TRI21):
        base = ech_capacities(d, 8).values
        assert ech_capacities(d.scaled(q), 8).values == [q * v for v in base]


def test_domain_monotonicity():
    inner, outer = parse_domain([(0, 1), (1, 0)]), parse_domain([(0, 1), (1, 1), (1, 0)])
    a, b = ech_capacities(inner, 10).values, ech_capacities(outer, 10).values
    assert all(x <= y for x, y in zip(a, b))


def test_shape_report():
    rep = optimiser_shape_report(BALL, [1, 20])
    assert rep[0].multiple == 0 and rep[0].residual.degeneracy == "segment"
    # c_20 = 5 is attained by 5 * ball
    assert rep[1].multiple == 5 and rep[1].residual.degeneracy == "point"
    sq = optimiser_shape_report(SQUARE, [8])[0]
    assert sq.multiple >= 1


def test_decompose_rejects_nothing_for_valid_sum():
    W = poly((0, 0), (3, 0), (0, 3))
    d, res = decompose_witness(W, BALL.polygon)
    assert d == 3 and res.degeneracy == "point"


def test_max_nodes_limit():
    with pytest.raises(ResourceLimit):
        ech_capacities(SQUARE, 20, max_nodes=50)


@settings(max_examples=15, deadline=None)
@given(lattice_convex_chains())
def test_random_domains_match_oracle(chain):
    d = parse_domain(chain)
    assert ech_capacities(d, 4).values == brute_oracle_table(d, 4, 6)
