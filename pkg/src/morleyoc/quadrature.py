"""Quadrature rules on triangles and edges.

Triangle rules are stored in barycentric coordinates with weights
normalised to sum to one, so that ``area * sum(w * f(x))`` integrates
``f`` over any physical triangle.  Degrees 1-5 use the classical fully
symmetric rules; higher degrees use a collapsed (Duffy) product of
Gauss-Jacobi and Gauss-Legendre rules, which keeps every weight positive
and every point strictly inside the triangle.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

MIN_DEGREE = 1
MAX_DEGREE = 12


class QuadratureError(ValueError):
    pass


@dataclass(frozen=True)
class QuadRule:
    """Normalised quadrature rule in barycentric coordinates.

    Attributes
    ----------
    points : ndarray, shape (n, 3) for triangles or (n, 2) for edges
    weights : ndarray, shape (n,)
        Sum to one.
    degree : int
        Total polynomial degree integrated exactly.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __len__(self):
        return len(self.weights)

    def map_to(self, vertices):
        """Physical points of the rule on a simplex with the given vertices.

        ``vertices`` has shape (..., k, 2) where k is 3 (triangle) or 2
        (edge); the result has shape (..., n, 2).
        """
        return np.einsum("qk,...kd->...qd", self.points, np.asarray(vertices, dtype=float))


def _check_degree(degree):
    if not (MIN_DEGREE <= int(degree) <= MAX_DEGREE) or int(degree) != degree:
        raise QuadratureError(
            f"unsupported quadrature degree {degree!r}; supported range is "
            f"{MIN_DEGREE}..{MAX_DEGREE}"
        )
    return int(degree)


def _orbit(a):
    b = 1.0 - 2.0 * a
    return [(a, a, b), (a, b, a), (b, a, a)]


def _symmetric_rule(degree):
    if degree == 1:
        pts, wts = [(1 / 3, 1 / 3, 1 / 3)], [1.0]
    elif degree == 2:
        pts, wts = _orbit(1 / 6), [1 / 3] * 3
    elif degree in (3, 4):
        # Strang-Fix / Dunavant 6-point rule.
        pts = _orbit(0.445948490915965) + _orbit(0.091576213509771)
        wts = [0.223381589678011] * 3 + [0.109951743655322] * 3
    else:
        # Radon 7-point rule.
        pts = [(1 / 3, 1 / 3, 1 / 3)] + _orbit(0.470142064105115) + _orbit(0.101286507323456)
        wts = [0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3
    return np.array(pts), np.array(wts)


def _collapsed_rule(degree):
    n = (degree + 2) // 2
    t, wt = roots_jacobi(n, 1.0, 0.0)
    s, ws = roots_legendre(n)
    u = 0.5 * (1.0 + t)
    v = 0.5 * (1.0 + s)
    wu = wt / 4.0
    wv = ws / 2.0
    uu, vv = np.meshgrid(u, v, indexing="ij")
    x = uu
    y = (1.0 - uu) * vv
    w = np.outer(wu, wv) * 2.0  # reference area 1/2
    pts = np.column_stack([(1.0 - x - y).ravel(), x.ravel(), y.ravel()])
    return pts, w.ravel()


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Rule exact for polynomials of total degree <= ``degree`` on triangles."""
    degree = _check_degree(degree)
    if degree <= 5:
        pts, wts = _symmetric_rule(degree)
    else:
        pts, wts = _collapsed_rule(degree)
    # The tabulated classical weights carry 15 digits; renormalise.
    wts = wts / wts.sum()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return QuadRule(pts, wts, degree)


@lru_cache(maxsize=None)
def edge_rule(degree):
    """Gauss-Legendre rule on a segment, exact to ``degree``.

    Points are barycentric pairs ``(1 - t, t)``.
    """
    degree = _check_degree(degree)
    n = (degree + 2) // 2
    s, ws = roots_legendre(n)
    t = 0.5 * (1.0 + s)
    pts = np.column_stack([1.0 - t, t])
    wts = ws / 2.0
    pts.setflags(write=False)
    wts.setflags(write=False)
    return QuadRule(pts, wts, degree)


def triangle_area(tri):
    tri = np.asarray(tri, dtype=float)
    d1 = tri[..., 1, :] - tri[..., 0, :]
    d2 = tri[..., 2, :] - tri[..., 0, :]
    return 0.5 * (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0])


def integrate_on_triangle(f, tri, degree=10):
    """Integrate ``f`` over the triangle ``tri`` (3x2 vertex array).

    ``f`` receives an (n, 2) array of points and returns n values.
    """
    rule = triangle_rule(degree)
    tri = np.asarray(tri, dtype=float)
    x = rule.map_to(tri)
    values = np.asarray(f(x), dtype=float)
    return abs(triangle_area(tri)) * float(rule.weights @ values)


def integrate_on_edge(f, a, b, degree=10):
    rule = edge_rule(degree)
    seg = np.array([a, b], dtype=float)
    x = rule.map_to(seg)
    length = np.linalg.norm(seg[1] - seg[0])
    return length * float(rule.weights @ np.asarray(f(x), dtype=float))


def simplex_monomial_integral(a, b):
    """Exact integral of x**a * y**b over the unit right triangle."""
    return factorial(a) * factorial(b) / factorial(a + b + 2)
