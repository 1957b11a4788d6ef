from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_vertices
from skewfold import Polynomial, newton_polygon, parse_polynomial
from skewfold.newton import hull_vertices, intercept, polygon_from_points

F = Fraction


@pytest.mark.parametrize(
    "q, verts, T",
    [
        ("z^3*w^2 + z^5", [(3, 2), (5, 0)], [5]),
        ("z*w^2", [(1, 2)], []),
        ("w^4 + z^2*w^3 + z^3*w", [(0, 4), (2, 3), (3, 1)], [4, 7]),
        ("z^3*w^2 + w^5", [(0, 5), (3, 2)], [5]),
    ],
)
def test_worked_polygons(q, verts, T):
    P = newton_polygon(parse_polynomial(q))
    assert list(P.vertices) == [(F(a), F(b)) for a, b in verts]
    assert list(P.intercepts) == [F(t) for t in T]


def test_intercept_formula():
    P = polygon_from_points([(0, 5), (3, 2)])
    assert intercept(P, 1) == 5
    P = polygon_from_points([(0, 4), (2, 3), (3, 1)])
    assert intercept(P, 2) == 7
    assert P.T(1) == 4
    with pytest.raises(IndexError):
        intercept(P, 3)
    with pytest.raises(IndexError):
        P.vertex(0)


def test_collinear_and_dominated_points_are_not_vertices():
    # (1, 2) sits on the segment from (0, 3) to (3, 0); (1, 1) is dominated
    assert hull_vertices([(0, 3), (1, 2), (3, 0), (1, 1)]) == [(0, 3), (3, 0)]
    # points sharing an exponent of z
    assert hull_vertices([(2, 0), (2, 3), (0, 1)]) == [(2, 3)]


def test_empty_polynomial_rejected():
    with pytest.raises(ValueError):
        newton_polygon(Polynomial([]))


sparse = st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), min_size=1, max_size=12, unique=True)


@settings(max_examples=200, deadline=None)
@given(sparse)
def test_matches_brute_force_oracle(points):
    assert [tuple(map(int, v)) for v in hull_vertices(points)] == brute_force_vertices(points)


@settings(max_examples=100, deadline=None)
@given(sparse)
def test_vertex_polynomial_is_idempotent(points):
    P = polygon_from_points(points)
    again = polygon_from_points(P.vertices)
    assert again.vertices == P.vertices


@settings(max_examples=100, deadline=None)
@given(sparse)
def test_monotone_and_contains_inputs(points):
    P = polygon_from_points(points)
    v = P.vertices
    assert all(a[0] < b[0] and a[1] > b[1] for a, b in zip(v, v[1:]))
    assert all(a < b for a, b in zip(P.intercepts, P.intercepts[1:]))
    assert all(a > b for a, b in zip(P.edge_weights, P.edge_weights[1:]))
    assert all(P.contains(i, j) for i, j in points)


def test_to_dict_uses_rational_strings():
    P = newton_polygon(parse_polynomial("w^4 + z^2*w^3 + z^3*w"))
    assert P.to_dict() == {
        "vertices": [["0", "4"], ["2", "3"], ["3", "1"]],
        "intercepts": ["4", "7"],
        "edge_weights": ["2", "1/2"],
    }
