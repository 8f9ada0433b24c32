from fractions import Fraction

import pytest
from hypothesis import strategies as st

from capax.lattice_geom import hull


# acceptance verdicts, printed after the run so output capture cannot hide them
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def F(x, y=1):
    return Fraction(x, y)


def poly(*pts):
    return hull([(Fraction(a), Fraction(b)) for a, b in pts])


small_rat = st.fractions(min_value=-4, max_value=4, max_denominator=4)
lattice_coord = st.integers(min_value=0, max_value=5)


@st.composite
def rat_polygons(draw, min_points=1, max_points=6, coord=small_rat):
    pts = draw(st.lists(st.tuples(coord, coord), min_size=min_points, max_size=max_points))
    return hull([(Fraction(a), Fraction(b)) for a, b in pts])


@st.composite
def lattice_polygons(draw, min_points=1, max_points=6):
    pts = draw(st.lists(st.tuples(lattice_coord, lattice_coord), min_size=min_points, max_size=max_points))
    return hull([(Fraction(a), Fraction(b)) for a, b in pts])


@pytest.fixture
def delta1():
    return poly((0, 0), (1, 0), (0, 1))


def _chain_from_edges(edges, start):
    pts = [start]
    for dx, dy in edges:
        x, y = pts[-1]
        pts.append((x + dx, y + dy))
    return pts


@st.composite
def edge_lists(draw, max_edges=4, max_step=3):
    """Distinct primitive directions with dx > 0, dy < 0, each repeated a few times."""
    n = draw(st.integers(min_value=1, max_value=max_edges))
    dirs = draw(st.lists(st.tuples(st.integers(1, max_step), st.integers(1, max_step)),
                         min_size=n, max_size=n, unique_by=lambda d: Fraction(d[1], d[0])))
    mult = draw(st.lists(st.integers(1, 2), min_size=n, max_size=n))
    return [(m * dx, -m * dy) for (dx, dy), m in zip(dirs, mult)]


@st.composite
def lattice_convex_chains(draw, allow_vertical=True):
    """Concave non-increasing lattice chains from the y-axis to the x-axis."""
    edges = draw(edge_lists())
    if allow_vertical and draw(st.booleans()):
        edges.append((0, -draw(st.integers(1, 2))))
    if draw(st.booleans()):
        edges.insert(0, (draw(st.integers(1, 2)), 0))
    # concave: slope dy/dx decreasing along the chain (vertical last)
    edges.sort(key=lambda e: (Fraction(-e[1], e[0]) if e[0] else Fraction(10 ** 6)))
    b = -sum(e[1] for e in edges)
    return _chain_from_edges(edges, (0, b))


@st.composite
def lattice_concave_graphs(draw):
    """Convex decreasing lattice graphs from (0, b) to (a, 0)."""
    edges = draw(edge_lists())
    edges.sort(key=lambda e: Fraction(e[1], e[0]))  # steep first
    b = -sum(e[1] for e in edges)
    return _chain_from_edges(edges, (0, b))
