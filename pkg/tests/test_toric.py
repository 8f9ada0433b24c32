import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capax.domains import parse_domain
from capax.ech_solver import ech_capacities
from capax.errors import ValidationError
from capax.lattice_geom import area, lattice_count, lattice_length
from capax.toric import (
    ToricSurfaceData,
    alg_capacities_toric,
    alg_capacity_toric,
    anticanonical_degree,
    curve_degrees,
    edge_lengths_via_fan,
    ehrhart,
    h0,
    intersect,
    is_nef,
    normal_fan,
    polytope_of,
    pullback,
    refine,
    repair_round_down,
    round_down,
    self_intersection,
    smooth_resolution,
    surface_from_json,
)

from conftest import F, lattice_convex_chains, poly

BALL = parse_domain([(0, 1), (1, 0)])
SQUARE = parse_domain([(0, 1), (1, 1), (1, 0)])
TRI21 = parse_domain([(0, 1), (2, 0)])
TRI32 = parse_domain([(0, 2), (3, 0)])
BALL2 = parse_domain([(0, 2), (2, 0)])
QUAD = parse_domain([(0, F(7, 2)), (F(3, 2), F(5, 2)), (3, 1), (4, 0)])

P2 = normal_fan(BALL)


def test_normal_fan_rays():
    assert P2.rays == ((1, 0), (0, 1), (-1, -1))
    assert P2.polarisation == (0, 0, 1)
    assert normal_fan(SQUARE).rays == ((1, 0), (0, 1), (-1, 0), (0, -1))
    assert (-1, -2) in normal_fan(TRI21).rays
    assert not normal_fan(TRI21).is_smooth()
    assert P2.is_smooth()


def test_fan_validation():
    with pytest.raises(ValidationError):
        ToricSurfaceData(((1, 0), (0, 1)), (0, 0))
    with pytest.raises(ValidationError):
        surface_from_json({"rays": [[2, 0], [0, 1], [-1, -1]], "polarisation": [0, 0, 1]})
    with pytest.raises(ValidationError):
        # all rays in a half-plane: not complete
        surface_from_json({"rays": [[1, 0], [0, 1], [-1, 1]], "polarisation": [0, 0, 1]})
    with pytest.raises(ValidationError):
        surface_from_json({"rays": [[1, 0]]})


def test_json_round_trip():
    Y = normal_fan(QUAD)
    assert surface_from_json(Y.to_json()) == Y
    # input order does not matter
    Z = surface_from_json({"rays": [[-1, -1], [1, 0], [0, 1]], "polarisation": [1, 0, 0]})
    assert Z == P2


def test_polytope_of():
    assert polytope_of(P2.A, P2).normalized() == BALL.polygon.normalized()
    pt = polytope_of(P2.divisor((0, 0, 0)), P2)
    assert pt.vertices == ((0, 0),)
    assert polytope_of(P2.divisor((0, 0, -1)), P2) is None
    # (1, 1, -1) is linearly equivalent to H; its polytope is a translate of the triangle
    P = polytope_of(P2.divisor((1, 1, -1)), P2)
    assert P.normalized() == poly((-1, -1), (0, -1), (-1, 0)).normalized()


def test_is_nef():
    assert is_nef(P2.A, P2)
    assert is_nef(P2.divisor((1, 1, -1)), P2)
    assert not is_nef(P2.divisor((0, 0, -1)), P2)
    F1 = surface_from_json({"rays": [[1, 0], [0, 1], [-1, -1], [0, -1]], "polarisation": [0, 0, 2, 1]})
    # the exceptional curve alone is not nef
    assert not is_nef(F1.divisor((0, 0, 0, 1)), F1)
    assert is_nef(F1.A, F1)


def test_h0():
    assert h0(P2.divisor((0, 0, 2)), P2) == 6
    assert h0(P2.divisor((0, 0, 0)), P2) == 1
    assert h0(P2.divisor((0, 0, F(3, 2))), P2) == 3
    assert h0(P2.divisor((0, 0, -1)), P2) == 0


def test_round_down_and_repair():
    D = P2.divisor((0, 0, F(3, 2)))
    assert round_down(D).support == (0, 0, 1)
    Y = normal_fan(QUAD)
    A = Y.A
    assert A.integrality == "Q"
    R = repair_round_down(A, Y)
    assert R.integrality == "Z"
    assert is_nef(R, Y)
    assert h0(R, Y) == h0(A, Y) == lattice_count(QUAD.polygon)


def test_intersections():
    H = P2.A
    assert intersect(H, H, P2) == 1
    assert self_intersection(H, P2) == 1
    Y = normal_fan(SQUARE)
    assert self_intersection(Y.A, Y) == 2
    assert anticanonical_degree(P2) == 3
    assert anticanonical_degree(Y) == 4
    # non-nef arguments expand bilinearly: the exceptional curve on F_1 squares to -1
    F1 = surface_from_json({"rays": [[1, 0], [0, 1], [-1, -1], [0, -1]], "polarisation": [0, 0, 2, 1]})
    E = F1.divisor((0, 0, 0, 1))
    assert self_intersection(E, F1) == -1


def test_edge_lengths_via_fan():
    for dom in (BALL, SQUARE, TRI21, TRI32, QUAD):
        Y = normal_fan(dom)
        lens = sorted(edge_lengths_via_fan(Y))
        assert lens == sorted(lattice_length(e) for e in dom.polygon.edges())


@pytest.mark.parametrize("dom", [BALL, SQUARE, TRI21, TRI32, BALL2, QUAD])
def test_minus_K_A_is_perimeter(dom):
    Y = normal_fan(dom)
    assert anticanonical_degree(Y) == sum(lattice_length(e) for e in dom.polygon.edges())


@pytest.mark.parametrize("dom", [BALL, SQUARE, TRI21, TRI32])
def test_A_squared_is_twice_area(dom):
    Y = normal_fan(dom)
    assert self_intersection(Y.A, Y) == 2 * area(dom.polygon)


def test_alg_capacity_examples():
    v, D = alg_capacity_toric(P2, 3)
    assert v == 2 and D.support == (0, 0, 2)
    assert alg_capacity_toric(P2, 2)[0] == 1
    assert alg_capacity_toric(P2, 0)[0] == 0
    with pytest.raises(ValidationError):
        alg_capacities_toric(P2, -1)


def test_alg_witness_h0():
    for dom in (BALL, SQUARE, TRI21, QUAD):
        Y = normal_fan(dom)
        for r in alg_capacities_toric(Y, 10):
            assert is_nef(r.witness, Y)
            assert r.h0 >= r.k + 1
            assert intersect(r.witness, Y.A, Y) == r.value


@pytest.mark.parametrize("dom", [BALL, SQUARE, TRI21, TRI32, BALL2, QUAD])
def test_cross_solver_equality(dom):
    Y = normal_fan(dom)
    alg = [r.value for r in alg_capacities_toric(Y, 20)]
    assert alg == ech_capacities(dom, 20).values


def test_pullback_examples():
    Yr = refine(P2, [(1, 1)])
    assert Yr.rays == ((1, 0), (1, 1), (0, 1), (-1, -1))
    assert pullback(P2.A, P2, Yr).support == (0, 0, 0, 1)
    Y = refine(P2, [(-1, 0)])
    assert pullback(P2.divisor((0, 0, 2)), P2, Y).support[Y.rays.index((-1, 0))] == 2
    with pytest.raises(ValidationError):
        pullback(P2.A, Yr, P2)
    with pytest.raises(ValidationError):
        refine(P2, [(2, 2)])


def test_pullback_preserves_numbers():
    Yr = refine(P2, [(1, 1), (-1, 0)])
    A = Yr.A
    assert self_intersection(A, Yr) == 1
    assert h0(pullback(P2.divisor((0, 0, 3)), P2, Yr), Yr) == 10


_extra_rays = st.lists(
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)).filter(
        lambda u: u != (0, 0) and __import__("math").gcd(*u) == 1),
    min_size=1, max_size=3)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([BALL, SQUARE, TRI21]), _extra_rays)
def test_pullback_invariance(dom, rays):
    Y = normal_fan(dom)
    Yr = refine(Y, rays)
    a = [r.value for r in alg_capacities_toric(Y, 12)]
    b = [r.value for r in alg_capacities_toric(Yr, 12)]
    assert a == b


def test_smooth_resolution():
    for dom in (TRI21, TRI32, QUAD):
        Y = normal_fan(dom)
        Z = smooth_resolution(Y)
        assert Z.is_smooth()
        assert set(Y.rays) <= set(Z.rays)
        assert polytope_of(Z.A, Z).normalized() == polytope_of(Y.A, Y).normalized()


@pytest.mark.parametrize("dom", [BALL, SQUARE, TRI21])
def test_rational_step_agrees(dom):
    Y = normal_fan(dom)
    a = [r.value for r in alg_capacities_toric(Y, 10)]
    b = [r.value for r in alg_capacities_toric(Y, 10, step=F(1, 2))]
    assert a == b


@pytest.mark.parametrize("dom", [BALL, SQUARE, TRI21, TRI32])
def test_ehrhart_matches_h0(dom):
    Y = normal_fan(dom)
    for x in range(6):
        assert ehrhart(dom.polygon, x) == h0(Y.A * x, Y)


def test_ehrhart_ball():
    assert [ehrhart(BALL.polygon, x) for x in range(5)] == [1, 3, 6, 10, 15]


def test_curve_degrees_of_A_sum_to_perimeter():
    Y = normal_fan(TRI32)
    assert sum(curve_degrees(Y.A, Y)) == 6


@settings(max_examples=15, deadline=None)
@given(lattice_convex_chains())
def test_random_domains_cross_solver(chain):
    dom = parse_domain(chain)
    Y = normal_fan(dom)
    assert [r.value for r in alg_capacities_toric(Y, 8)] == ech_capacities(dom, 8).values
