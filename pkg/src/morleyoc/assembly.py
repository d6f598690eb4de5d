"""Global degrees of freedom, system matrix, load vector and the
elementwise constraint operators.

The global space glues the local elements through shared vertex
values, shared edge means of the value and shared edge means of the
normal derivative (measured along the global edge normal).  Vertex and
edge-mean DOFs on the boundary are eliminated.  Boundary normal
derivatives stay free unless ``clamped=True``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .element import build_nodal_basis, eval_basis
from .linalg import coo_to_csr
from .quadrature import edge_rule, triangle_rule

ASSEMBLY_DEGREE = 10


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DofMap:
    """Numbering of the global DOFs.

    ``vertex``, ``edge_value`` and ``edge_normal`` hold the global index
    of each entity's DOF, -1 where it is eliminated.  ``cell_dofs[t, i]``
    is the global index of local DOF i of triangle t (or -1) and
    ``signs[t, i]`` relates the local outward normal to the global one.
    """

    n_dofs: int
    vertex: np.ndarray
    edge_value: np.ndarray
    edge_normal: np.ndarray
    cell_dofs: np.ndarray
    signs: np.ndarray
    clamped: bool = False


def build_dof_map(mesh, clamped=False):
    nV, nE = mesh.n_vertices, mesh.n_edges
    vertex = -np.ones(nV, dtype=np.int64)
    interior_v = np.flatnonzero(~mesh.boundary_vertices)
    vertex[interior_v] = np.arange(len(interior_v))
    n = len(interior_v)

    edge_value = -np.ones(nE, dtype=np.int64)
    interior_e = np.flatnonzero(~mesh.boundary_edges)
    edge_value[interior_e] = n + np.arange(len(interior_e))
    n += len(interior_e)

    edge_normal = -np.ones(nE, dtype=np.int64)
    normal_e = interior_e if clamped else np.arange(nE)
    edge_normal[normal_e] = n + np.arange(len(normal_e))
    n += len(normal_e)

    t = mesh.triangles
    te = mesh.triangle_edges
    cell_dofs = np.concatenate([vertex[t], edge_value[te], edge_normal[te]], axis=1)
    # local edge i runs from vertex i+1 to i+2; its outward normal is the
    # global one exactly when that direction is high -> low
    outward_is_global = t[:, [1, 2, 0]] > t[:, [2, 0, 1]]
    signs = np.ones((mesh.n_triangles, 9))
    signs[:, 6:9] = np.where(outward_is_global, 1.0, -1.0)
    return DofMap(n, vertex, edge_value, edge_normal, cell_dofs, signs, clamped)


@dataclass(frozen=True)
class Tabulation:
    """Signed basis data at the quadrature points of every triangle."""

    points: np.ndarray  # (nT, nq, 2)
    weights: np.ndarray  # (nT, nq), include the triangle area
    values: np.ndarray  # (nT, nq, 9)
    grads: np.ndarray  # (nT, nq, 9, 2)
    hess: np.ndarray  # (nT, nq, 9, 2, 2)


@dataclass(eq=False)
class FESpace:
    """Mesh, DOF map and local bases bundled for assembly and analysis."""

    mesh: object
    clamped: bool = False
    dofmap: DofMap = field(init=False)
    basis: object = field(init=False)
    _tables: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        self.dofmap = build_dof_map(self.mesh, clamped=self.clamped)
        self.basis = build_nodal_basis(self.mesh.corners)

    @property
    def n_dofs(self):
        return self.dofmap.n_dofs

    @cached_property
    def areas(self):
        return self.mesh.areas

    def tabulate(self, degree=ASSEMBLY_DEGREE):
        if degree not in self._tables:
            rule = triangle_rule(degree)
            x = rule.map_to(self.mesh.corners)
            val, grad, hess = eval_basis(self.basis, x)
            s = self.dofmap.signs[:, None, :]
            self._tables[degree] = Tabulation(
                points=x,
                weights=self.areas[:, None] * rule.weights[None, :],
                values=val * s,
                grads=grad * s[..., None],
                hess=hess * s[..., None, None],
            )
        return self._tables[degree]

    def local_coefficients(self, y):
        """Per-triangle coefficients of the signed local basis, shape (nT, 9)."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n_dofs,):
            raise AssemblyError(f"coefficient vector has shape {y.shape}, expected ({self.n_dofs},)")
        idx = self.dofmap.cell_dofs
        return np.where(idx >= 0, y[np.maximum(idx, 0)], 0.0)

    def evaluate(self, y, degree=ASSEMBLY_DEGREE):
        """Values, gradients and Hessians of the field ``y`` at the
        quadrature points: (nT, nq), (nT, nq, 2), (nT, nq, 2, 2)."""
        tab = self.tabulate(degree)
        c = self.local_coefficients(y)
        return (
            np.einsum("tqj,tj->tq", tab.values, c),
            np.einsum("tqjd,tj->tqd", tab.grads, c),
            np.einsum("tqjde,tj->tqde", tab.hess, c),
        )

    def scatter_matrix(self, local):
        """Assemble per-triangle 9x9 blocks into a CSR matrix."""
        idx = self.dofmap.cell_dofs
        rows = np.broadcast_to(idx[:, :, None], local.shape)
        cols = np.broadcast_to(idx[:, None, :], local.shape)
        keep = (rows >= 0) & (cols >= 0)
        return coo_to_csr(self.n_dofs, rows[keep], cols[keep], local[keep])

    def scatter_vector(self, local):
        idx = self.dofmap.cell_dofs
        keep = idx >= 0
        return np.bincount(idx[keep], weights=local[keep], minlength=self.n_dofs)

    def scatter_rows(self, local):
        """Per-triangle rows (nT, 9) -> sparse (nT, N) matrix."""
        idx = self.dofmap.cell_dofs
        nT = idx.shape[0]
        rows = np.broadcast_to(np.arange(nT)[:, None], idx.shape)
        keep = idx >= 0
        return sp.csr_matrix((local[keep], (rows[keep], idx[keep])), shape=(nT, self.n_dofs))


def element_matrices(space, beta, degree=ASSEMBLY_DEGREE):
    """Local blocks of beta * (Hessian : Hessian) + mass, shape (nT, 9, 9)."""
    tab = space.tabulate(degree)
    stiff = np.einsum("tq,tqide,tqjde->tij", tab.weights, tab.hess, tab.hess)
    mass = np.einsum("tq,tqi,tqj->tij", tab.weights, tab.values, tab.values)
    return beta * stiff + mass


def curvature_matrices(space, kappa, degree=ASSEMBLY_DEGREE):
    """Local blocks of kappa * int_e dn(v) dn(w) ds over boundary edges.

    ``dn`` is the derivative along the outward normal of the edge.  For
    v, w vanishing on a smooth boundary, int (Lap v)(Lap w) equals
    int D2 v : D2 w plus this term with kappa the boundary curvature.
    """
    mesh = space.mesh
    rule = edge_rule(degree)
    be = np.flatnonzero(mesh.boundary_edges)
    t = mesh.edge_triangles[be, 0]
    ends = mesh.vertices[mesh.edges[be]]
    pts = rule.map_to(ends)  # (nB, nq, 2)
    b = space.basis
    sub = type(b)(b.vertices[t], b.center[t], b.scale[t], b.coeffs[t], b.dual[t])
    _, grad, _ = eval_basis(sub, pts)
    grad = grad * space.dofmap.signs[t][:, None, :, None]
    n = mesh.edge_normals[be]
    outward = ((ends.mean(axis=1) - mesh.centroids[t]) * n).sum(axis=1) > 0
    n = np.where(outward[:, None], n, -n)
    dn = np.einsum("eqjd,ed->eqj", grad, n)
    w = mesh.edge_lengths[be][:, None] * rule.weights[None, :]
    local = np.zeros((mesh.n_triangles, 9, 9))
    np.add.at(local, t, kappa * np.einsum("eq,eqi,eqj->eij", w, dn, dn))
    return local


def boundary_curvature(mesh):
    """1/R for meshes carrying a circular boundary tag, else 0."""
    r = mesh.boundary_radius
    return 0.0 if r is None else 1.0 / r


def assemble_system(space, problem, degree=ASSEMBLY_DEGREE, curvature=0.0):
    """Sparse matrix of A_h(v, w) = beta sum_T (D2 v : D2 w)_T + (v, w).

    A nonzero ``curvature`` adds beta * kappa * int_{boundary} dn v dn w,
    which makes the form consistent with beta (Lap v, Lap w) when the
    polygonal boundary approximates a curved one.
    """
    beta = problem if np.isscalar(problem) else problem.beta
    local = element_matrices(space, beta, degree)
    if curvature:
        local = local + beta * curvature_matrices(space, curvature, degree)
    return space.scatter_matrix(local)


def assemble_load(space, problem, degree=ASSEMBLY_DEGREE):
    """Load vector of l(v) = (y_d, v) - beta (f, Laplace_h v)."""
    tab = space.tabulate(degree)
    yd = problem.y_d(tab.points)
    f = problem.f(tab.points)
    lap = np.trace(tab.hess, axis1=-2, axis2=-1)
    local = np.einsum("tq,tq,tqj->tj", tab.weights, yd, tab.values)
    local -= problem.beta * np.einsum("tq,tq,tqj->tj", tab.weights, f, lap)
    return space.scatter_vector(local)


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Elementwise constraint operators and bounds.

    ``grad_x``, ``grad_y`` and ``lap`` are sparse (nT, N) matrices giving
    the element means of the gradient and of the Laplacian; the discrete
    control constraint reads ``lower <= -lap @ y <= upper`` and the
    gradient constraint ``|(grad_x @ y, grad_y @ y)| <= g_max``.
    """

    areas: np.ndarray
    grad_x: sp.csr_matrix
    grad_y: sp.csr_matrix
    lap: sp.csr_matrix
    lower: np.ndarray
    upper: np.ndarray
    g_max: float

    @property
    def n_elements(self):
        return len(self.areas)

    def control_means(self, y):
        return -(self.lap @ y)

    def gradient_means(self, y):
        return np.column_stack([self.grad_x @ y, self.grad_y @ y])

    def violations(self, y):
        """Max violation of the upper, lower and gradient constraints."""
        u = self.control_means(y)
        g = np.linalg.norm(self.gradient_means(y), axis=1)
        return (
            float(np.max(u - self.upper, initial=0.0)),
            float(np.max(self.lower - u, initial=0.0)),
            float(np.max(g - self.g_max, initial=0.0)),
        )

    def is_feasible(self, y, tol=0.0):
        return max(self.violations(y)) <= tol


def local_constraint_rows(space, degree=ASSEMBLY_DEGREE):
    """Element means of the signed basis gradients (nT, 9, 2) and Laplacians (nT, 9)."""
    tab = space.tabulate(degree)
    area = space.areas[:, None]
    grad = np.einsum("tq,tqjd->tjd", tab.weights, tab.grads) / area[..., None]
    lap = np.einsum("tq,tqjdd->tj", tab.weights, tab.hess) / area
    return grad, lap


def build_constraints(space, problem, degree=ASSEMBLY_DEGREE, g_max=None):
    """Constraint operators of K_h with centroid-rule element means of
    u_a + f and u_b + f as bounds."""
    grad, lap = local_constraint_rows(space, degree)
    c = space.mesh.centroids
    f = problem.f(c)
    lower = problem.u_a(c) + f
    upper = problem.u_b(c) + f
    bad = np.flatnonzero(~(lower < upper))
    if bad.size:
        t = bad[0]
        raise AssemblyError(
            f"infeasible control bounds on element {t}: lower {lower[t]:g} >= upper {upper[t]:g}"
        )
    return ConstraintSet(
        areas=space.areas.copy(),
        grad_x=space.scatter_rows(grad[..., 0]),
        grad_y=space.scatter_rows(grad[..., 1]),
        lap=space.scatter_rows(lap),
        lower=lower,
        upper=upper,
        g_max=float(problem.g_max if g_max is None else g_max),
    )
