"""Upper-right Newton polygon of a bivariate polynomial.

The polygon is the convex hull of the union of the quadrants
``{x <= i, y <= j}`` over the monomials ``z**i w**j``. Its finite extreme
points form a chain with the z-exponent increasing and the w-exponent
decreasing. All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .poly import Polynomial

__all__ = ["NewtonPolygon", "newton_polygon", "hull_vertices", "intercept"]


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_vertices(points) -> list[tuple[Fraction, Fraction]]:
    """Vertices of the upper-right hull of a finite point set.

    Staircase maxima are kept first (a point dominated coordinate-wise by
    another is never extreme), then one monotone-chain pass removes points
    that do not make a strict clockwise turn. Collinear points are dropped.
    """
    pts = sorted({(Fraction(i), Fraction(j)) for i, j in points})
    if not pts:
        raise ValueError("cannot build a Newton polygon from no monomials")
    # sweep from the right: keep a point only if its j beats everything to its right
    stair = []
    best_j = None
    for pt in reversed(pts):
        if best_j is None or pt[1] > best_j:
            stair.append(pt)
            best_j = pt[1]
    stair.reverse()

    chain: list[tuple[Fraction, Fraction]] = []
    for pt in stair:
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], pt) >= 0:
            chain.pop()
        chain.append(pt)
    return chain


@dataclass(frozen=True)
class NewtonPolygon:
    """Vertex chain with y-intercepts and edge weights of each edge line."""

    vertices: tuple[tuple[Fraction, Fraction], ...]
    intercepts: tuple[Fraction, ...]
    edge_weights: tuple[Fraction, ...]
    #: every exponent pair the polygon was built from
    points: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        v = self.vertices
        for k in range(len(v) - 1):
            assert v[k][0] < v[k + 1][0] and v[k][1] > v[k + 1][1], "vertex chain is not monotone"
        for a, b in zip(self.intercepts, self.intercepts[1:]):
            assert a < b, "intercepts must increase"
        for a, b in zip(self.edge_weights, self.edge_weights[1:]):
            assert a > b, "edge weights must decrease"

    @property
    def s(self) -> int:
        return len(self.vertices)

    def vertex(self, k: int) -> tuple[Fraction, Fraction]:
        """1-based vertex access, matching the usual (n_k, m_k) indexing."""
        if not 1 <= k <= self.s:
            raise IndexError(f"vertex index {k} outside 1..{self.s}")
        return self.vertices[k - 1]

    def T(self, k: int) -> Fraction:
        """Intercept of edge ``k`` (1-based)."""
        return intercept(self, k)

    def contains(self, i, j) -> bool:
        """Whether the quadrant below-left of ``(i, j)`` lies inside the hull."""
        i, j = Fraction(i), Fraction(j)
        v = self.vertices
        if j > v[0][1] or i > v[-1][0]:
            return False
        for a, b in zip(v, v[1:]):
            if _cross(a, b, (i, j)) > 0:
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "vertices": [[str(n), str(m)] for n, m in self.vertices],
            "intercepts": [str(t) for t in self.intercepts],
            "edge_weights": [str(w) for w in self.edge_weights],
        }


def _edge_data(vertices):
    intercepts, weights = [], []
    for (n0, m0), (n1, m1) in zip(vertices, vertices[1:]):
        intercepts.append(m0 + n0 * (m0 - m1) / (n1 - n0))
        weights.append((n1 - n0) / (m0 - m1))
    return tuple(intercepts), tuple(weights)


def polygon_from_points(points) -> NewtonPolygon:
    points = tuple(sorted({(Fraction(i), Fraction(j)) for i, j in points}))
    verts = tuple(hull_vertices(points))
    intercepts, weights = _edge_data(verts)
    return NewtonPolygon(verts, intercepts, weights, points)


def newton_polygon(q: Polynomial) -> NewtonPolygon:
    """Newton polygon of ``q`` in the upper-right convention."""
    if not q:
        raise ValueError("the zero polynomial has no Newton polygon")
    return polygon_from_points(q.exponents)


def intercept(P: NewtonPolygon, k: int) -> Fraction:
    """y-intercept ``T_k`` of the line through vertices ``k`` and ``k+1``."""
    if not 1 <= k <= P.s - 1:
        raise IndexError(f"edge index {k} outside 1..{P.s - 1}")
    (n0, m0), (n1, m1) = P.vertices[k - 1], P.vertices[k]
    return m0 + n0 * (m0 - m1) / (n1 - n0)
