import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capax.errors import ValidationError
from capax.lattice_geom import (
    area,
    hull,
    lattice_count,
    lattice_count_pick,
    lattice_count_scan,
    lattice_length,
    lattice_perimeter,
    minkowski_sum,
    mixed_volume,
    omega_length,
    omega_perimeter,
    polygon_from_json,
    rat,
)

from conftest import F, lattice_polygons, poly, rat_polygons, small_rat

SQUARE = poly((0, 0), (1, 0), (1, 1), (0, 1))


def test_hull_drops_interior_point():
    P = hull([(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1, 4), F(1, 4))])
    assert P.vertices == ((0, 0), (1, 0), (0, 1))
    assert P.degeneracy == "full"


def test_hull_collinear_and_single():
    seg = poly((0, 0), (2, 0), (1, 0))
    assert seg.degeneracy == "segment" and seg.vertices == ((0, 0), (2, 0))
    pt = poly((5, 7))
    assert pt.degeneracy == "point" and pt.vertices == ((5, 7),)


def test_hull_empty_rejected():
    with pytest.raises(ValidationError):
        hull([])


def test_canonical_start_is_lex_min():
    P = poly((2, 2), (0, 1), (1, 0), (2, 0))
    assert P.vertices[0] == min(P.vertices)


def test_area_examples(delta1):
    assert area(delta1) == F(1, 2)
    assert area(SQUARE) == 1
    assert area(poly((0, 0), (3, 0))) == 0


def test_lattice_count_examples(delta1):
    assert lattice_count(delta1) == 3
    assert lattice_count(delta1.scale(2)) == 6
    assert lattice_count(poly((0, 0), (F(3, 2), 0), (0, F(3, 2)))) == 3


def test_minkowski_examples(delta1):
    assert minkowski_sum(delta1, delta1) == delta1.scale(2)
    seg = poly((0, 0), (1, 0))
    assert minkowski_sum(seg, delta1) == poly((0, 0), (2, 0), (1, 1), (0, 1))
    p = poly((3, -2))
    assert minkowski_sum(p, SQUARE) == SQUARE.translate((3, -2))


def test_mixed_volume_examples(delta1):
    assert mixed_volume(delta1, delta1) == 1
    assert mixed_volume(poly((0, 0), (1, 0)), delta1) == 1
    assert mixed_volume(poly((2, 3)), SQUARE) == 0


def test_lattice_length_examples():
    assert lattice_length((F(2), F(4))) == 2
    assert lattice_length((F(3, 2), F(0))) == F(3, 2)
    assert lattice_length((F(0), F(0))) == 0


def test_omega_length_examples(delta1):
    assert omega_length(delta1, (F(1), F(-1))) == 1
    assert omega_length(delta1, (F(1), F(0))) == 1
    assert omega_length(delta1, (F(-1), F(0))) == 0
    with pytest.raises(ValidationError):
        omega_length(delta1, (F(0), F(0)))


def test_omega_perimeter_examples(delta1):
    assert omega_perimeter(delta1, delta1) == 1
    assert omega_perimeter(delta1, poly((0, 0), (1, 0))) == 1
    assert omega_perimeter(delta1, SQUARE) == 2
    assert omega_perimeter(delta1, poly((1, 1))) == 0


def test_lattice_perimeter_examples(delta1):
    assert lattice_perimeter(delta1) == 3
    assert lattice_perimeter(delta1.scale(2)) == 6
    assert lattice_perimeter(SQUARE) == 4


def test_rat_rejects_float():
    with pytest.raises(ValidationError):
        rat(0.5)
    assert rat([3, 6]) == F(1, 2)
    assert rat("2/4") == F(1, 2)


def test_json_round_trip(delta1):
    assert polygon_from_json(delta1.to_json()) == delta1


@settings(max_examples=1000, deadline=None)
@given(rat_polygons(), rat_polygons())
def test_omega_perimeter_is_mixed_volume(lam, omega):
    assert omega_perimeter(omega, lam) == mixed_volume(lam, omega)


@settings(max_examples=150, deadline=None)
@given(lattice_polygons(), lattice_polygons(), lattice_polygons())
def test_mixed_volume_symmetric_and_additive(P, Pp, Q):
    assert mixed_volume(P, Q) == mixed_volume(Q, P)
    assert mixed_volume(minkowski_sum(P, Pp), Q) == mixed_volume(P, Q) + mixed_volume(Pp, Q)
    assert mixed_volume(P, Q) >= 0


@settings(max_examples=150, deadline=None)
@given(rat_polygons(), rat_polygons(), st.tuples(small_rat, small_rat))
def test_omega_perimeter_translation_invariant(omega, lam, t):
    assert omega_perimeter(omega, lam.translate(t)) == omega_perimeter(omega, lam)
    assert omega_perimeter(omega, lam.translate((3, -1))) == omega_perimeter(omega, lam)


@settings(max_examples=200, deadline=None)
@given(lattice_polygons())
def test_pick_matches_scan(P):
    assert lattice_count_pick(P) == lattice_count_scan(P)


@settings(max_examples=150, deadline=None)
@given(rat_polygons(), rat_polygons(), st.fractions(min_value=F(1, 4), max_value=3, max_denominator=4))
def test_scaling(P, Q, q):
    assert area(P.scale(q)) == q * q * area(P)
    assert lattice_perimeter(P.scale(q)) == q * lattice_perimeter(P)
    assert mixed_volume(P.scale(q), Q) == q * mixed_volume(P, Q)
