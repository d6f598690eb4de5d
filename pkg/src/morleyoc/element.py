"""Bubble-enriched Morley element.

The local space on a triangle T is P2 + span{b*l1, b*l2, b*l3} where the
l_i are the barycentric coordinates and b = l1*l2*l3.  Its nine degrees
of freedom, in this order, are

* the values at the three vertices,
* the means of the value over the edges opposite vertices 0, 1, 2,
* the means of the outward normal derivative over the same edges.

Polynomials are stored as coefficient vectors over the 15 monomials of
total degree <= 4 in the centred, scaled coordinates
``xi = (x - centroid) / h_T``, which keeps the dual system well
conditioned on small triangles.  Every routine accepts either a single
triangle, shape (3, 2), or a stack of triangles, shape (nT, 3, 2).
"""

from dataclasses import dataclass

import numpy as np

from .quadrature import edge_rule

MONOMIALS = [(d - j, j) for d in range(5) for j in range(d + 1)]
N_MONO = len(MONOMIALS)
_INDEX = {e: k for k, e in enumerate(MONOMIALS)}

COND_LIMIT = 1e12
# check_unisolvence flags elements whose scaled dual matrix is worse than this
COND_WARN = 1e4


class ElementError(ValueError):
    pass


def _derivative_matrix(axis):
    D = np.zeros((N_MONO, N_MONO))
    for k, (i, j) in enumerate(MONOMIALS):
        p = (i, j)[axis]
        if p:
            target = (i - 1, j) if axis == 0 else (i, j - 1)
            D[k, _INDEX[target]] = p
    return D


def _shift_matrix(axis):
    S = np.zeros((N_MONO, N_MONO))
    for k, (i, j) in enumerate(MONOMIALS):
        target = (i + 1, j) if axis == 0 else (i, j + 1)
        if target in _INDEX:
            S[k, _INDEX[target]] = 1.0
    return S


DX = _derivative_matrix(0)
DY = _derivative_matrix(1)
DXX = DX @ DX
DXY = DX @ DY
DYY = DY @ DY
_SX = _shift_matrix(0)
_SY = _shift_matrix(1)
_EXPONENTS = np.array(MONOMIALS)


def monomials(xi):
    """Monomial values at scaled points ``xi`` (..., 2) -> (..., 15)."""
    xi = np.asarray(xi, dtype=float)
    px = xi[..., 0, None] ** _EXPONENTS[:, 0]
    py = xi[..., 1, None] ** _EXPONENTS[:, 1]
    return px * py


@dataclass(frozen=True, eq=False)
class LocalBasis:
    """Nodal basis of one triangle or of a stack of triangles.

    Attributes
    ----------
    vertices : (..., 3, 2)
    center : (..., 2)
        Centroid.
    scale : (...)
        Triangle diameter h_T.
    coeffs : (..., 9, 15)
        ``coeffs[..., j, :]`` are the monomial coefficients of basis
        function j.
    dual : (..., 9, 9)
        Dual matrix ``G[i, j] = DOF_i(generator_j)``.
    """

    vertices: np.ndarray
    center: np.ndarray
    scale: np.ndarray
    coeffs: np.ndarray
    dual: np.ndarray

    def to_scaled(self, x):
        x = np.asarray(x, dtype=float)
        return (x - self.center[..., None, :]) / self.scale[..., None, None]

    def laplacian_coeffs(self):
        """Monomial coefficients of the Laplacian of each basis function."""
        return self.coeffs @ (DXX + DYY) / self.scale[..., None, None] ** 2


def _barycentric_polys(vertices, center, scale):
    """Barycentric coordinates as affine polynomials in scaled coordinates.

    Returns (a, g) with l_i(xi) = a_i + g_i . xi; shapes (..., 3), (..., 3, 2).
    """
    v = vertices
    ones = np.ones(v.shape[:-1])
    M = np.stack([ones, v[..., 0], v[..., 1]], axis=-2)  # (..., 3 rows, 3 verts)
    Minv = np.linalg.inv(M)  # l = Minv @ (1, x, y)
    grad = Minv[..., :, 1:]  # physical gradients (..., 3, 2)
    a = Minv[..., :, 0] + np.einsum("...id,...d->...i", grad, center)
    g = grad * scale[..., None, None]
    return a, g


def _generators(vertices, center, scale):
    """Coefficients of {1, x, y, x^2, xy, y^2, b*l1, b*l2, b*l3}, shape (..., 9, 15)."""
    batch = scale.shape
    gen = np.zeros(batch + (9, N_MONO))
    for k, e in enumerate([(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]):
        gen[..., k, _INDEX[e]] = 1.0
    a, g = _barycentric_polys(vertices, center, scale)
    lam = np.zeros(batch + (3, N_MONO))
    lam[..., 0] = a
    lam[..., _INDEX[(1, 0)]] = g[..., 0]
    lam[..., _INDEX[(0, 1)]] = g[..., 1]

    def mul(p, q):
        # p arbitrary, q affine
        return (
            p * q[..., 0, None]
            + (p @ _SX) * q[..., _INDEX[(1, 0)], None]
            + (p @ _SY) * q[..., _INDEX[(0, 1)], None]
        )

    bubble = mul(mul(lam[..., 0, :], lam[..., 1, :]), lam[..., 2, :])
    for i in range(3):
        gen[..., 6 + i, :] = mul(bubble, lam[..., i, :])
    return gen


def _edge_geometry(vertices):
    """Endpoints, outward unit normals and lengths of local edges.

    Local edge i joins vertices i+1 and i+2.
    """
    start = vertices[..., [1, 2, 0], :]
    end = vertices[..., [2, 0, 1], :]
    d = end - start
    length = np.linalg.norm(d, axis=-1)
    normal = np.stack([d[..., 1], -d[..., 0]], axis=-1) / length[..., None]
    return start, end, normal, length


def dof_functionals(vertices, center, scale):
    """Rows realising the nine DOFs on monomial coefficient vectors, (..., 9, 15)."""
    rule = edge_rule(5)
    F = np.zeros(scale.shape + (9, N_MONO))
    xi_v = (vertices - center[..., None, :]) / scale[..., None, None]
    F[..., 0:3, :] = monomials(xi_v)
    start, end, normal, _ = _edge_geometry(vertices)
    # edge quadrature points, (..., 3 edges, nq, 2)
    pts = rule.points[:, 0, None] * start[..., None, :] + rule.points[:, 1, None] * end[..., None, :]
    xi = (pts - center[..., None, None, :]) / scale[..., None, None, None]
    V = monomials(xi)
    F[..., 3:6, :] = np.einsum("q,...eqm->...em", rule.weights, V)
    Vx = V @ DX.T
    Vy = V @ DY.T
    dn = Vx * normal[..., :, None, 0, None] + Vy * normal[..., :, None, 1, None]
    F[..., 6:9, :] = np.einsum("q,...eqm->...em", rule.weights, dn) / scale[..., None, None]
    return F


def _geometry(tri):
    tri = np.asarray(tri, dtype=float)
    center = tri.mean(axis=-2)
    d = tri[..., [1, 2, 0], :] - tri[..., [2, 0, 1], :]
    scale = np.linalg.norm(d, axis=-1).max(axis=-1)
    return tri, center, scale


def _scaled_dual(G, scale):
    # express normal-derivative DOFs in scaled units so that the
    # conditioning does not depend on the element size
    Gs = G.copy()
    Gs[..., 6:9, :] *= scale[..., None, None]
    return Gs


def build_nodal_basis(tri):
    """Nodal basis dual to the nine DOFs on ``tri``.

    Raises
    ------
    ElementError
        If the dual matrix of some triangle is (nearly) singular.
    """
    tri, center, scale = _geometry(tri)
    if np.any(scale <= 0):
        raise ElementError("degenerate triangle with zero diameter")
    try:
        gen = _generators(tri, center, scale)
    except np.linalg.LinAlgError:
        raise ElementError("degenerate (collinear) triangle") from None
    F = dof_functionals(tri, center, scale)
    G = np.einsum("...im,...jm->...ij", F, gen)
    cond = np.atleast_1d(np.linalg.cond(_scaled_dual(G, scale)))
    bad = np.flatnonzero(~(cond < COND_LIMIT))
    if bad.size:
        which = f"triangle {bad[0]}" if scale.ndim else "triangle"
        raise ElementError(
            f"{which} has an ill-conditioned dual matrix (cond ~ {cond[bad[0]]:.3g}); "
            f"vertices {tri.reshape(-1, 3, 2)[bad[0]].tolist()}"
        )
    Ginv = np.linalg.inv(G)
    coeffs = np.einsum("...kj,...km->...jm", Ginv, gen)
    return LocalBasis(tri, center, scale, coeffs, G)


def eval_basis(basis, x):
    """Values, gradients and Hessians of the nine basis functions.

    ``x`` has shape batch + (nq, 2), or batch + (2,) for one point per
    triangle.  Returns arrays of shape ``... + (9,)``, ``... + (9, 2)``
    and ``... + (9, 2, 2)``.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == basis.center.ndim
    if single:
        x = x[..., None, :]
    V = monomials(basis.to_scaled(x))
    s = basis.scale[..., None, None]
    C = basis.coeffs
    val = np.einsum("...qm,...jm->...qj", V, C)
    gx = np.einsum("...qm,...jm->...qj", V @ DX.T, C) / s
    gy = np.einsum("...qm,...jm->...qj", V @ DY.T, C) / s
    hxx = np.einsum("...qm,...jm->...qj", V @ DXX.T, C) / s**2
    hxy = np.einsum("...qm,...jm->...qj", V @ DXY.T, C) / s**2
    hyy = np.einsum("...qm,...jm->...qj", V @ DYY.T, C) / s**2
    grad = np.stack([gx, gy], axis=-1)
    hess = np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)
    if single:
        return val[..., 0, :], grad[..., 0, :, :], hess[..., 0, :, :, :]
    return val, grad, hess


def eval_polynomial(basis, coeffs, x):
    """Evaluate polynomials given by monomial ``coeffs`` (..., k, 15) at x (..., nq, 2)."""
    V = monomials(basis.to_scaled(x))
    return np.einsum("...qm,...jm->...qj", V, coeffs)


@dataclass(frozen=True)
class UnisolvenceReport:
    determinant: float
    condition: float
    ok: bool

    def __str__(self):
        status = "ok" if self.ok else "ILL-CONDITIONED"
        return f"det={self.determinant:.6g} cond={self.condition:.6g} [{status}]"


def check_unisolvence(tri, cond_limit=COND_WARN):
    """Determinant and condition estimate of the scale-free dual matrix."""
    tri, center, scale = _geometry(tri)
    try:
        gen = _generators(tri, center, scale)
    except np.linalg.LinAlgError:
        return UnisolvenceReport(0.0, np.inf, False)
    F = dof_functionals(tri, center, scale)
    G = _scaled_dual(F @ gen.T, scale)
    with np.errstate(all="ignore"):
        det = float(np.linalg.det(G))
        cond = float(np.linalg.cond(G))
    if not np.isfinite(cond) or det == 0.0:
        cond = np.inf
    return UnisolvenceReport(det, cond, bool(cond < cond_limit))
