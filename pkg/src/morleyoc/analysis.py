"""Interpolation onto the discrete space, error norms, control recovery
and empirical orders of convergence."""

from dataclasses import dataclass, asdict
import math

import numpy as np

from .assembly import ASSEMBLY_DEGREE
from .quadrature import edge_rule

ERROR_DEGREE = 10


class AnalysisError(ValueError):
    pass


def interpolate(space, xi, grad_xi, degree=10):
    """DOF vector of the interpolant: vertex values, edge means of ``xi``
    and edge means of its derivative along the global edge normal.

    Eliminated boundary DOFs are dropped.
    """
    mesh, dm = space.mesh, space.dofmap
    y = np.zeros(dm.n_dofs)
    v = dm.vertex >= 0
    y[dm.vertex[v]] = xi(mesh.vertices[v])

    rule = edge_rule(degree)
    ends = mesh.vertices[mesh.edges]  # (nE, 2, 2)
    pts = rule.map_to(ends)  # (nE, nq, 2)
    e = dm.edge_value >= 0
    means = xi(pts[e]) @ rule.weights
    y[dm.edge_value[e]] = means
    e = dm.edge_normal >= 0
    g = grad_xi(pts[e])
    dn = np.einsum("eqd,ed->eq", g, mesh.edge_normals[e])
    y[dm.edge_normal[e]] = dn @ rule.weights
    return y


def interpolate_pi_h(space, problem_or_exact):
    """Interpolate the exact state of a problem (or an ExactSolution)."""
    exact = getattr(problem_or_exact, "exact", problem_or_exact)
    _require(exact, "y", "grad")
    return interpolate(space, exact.y, exact.grad)


def _require(exact, *names):
    if exact is None:
        raise AnalysisError("no exact solution available")
    missing = [n for n in names if getattr(exact, n, None) is None]
    if missing:
        raise AnalysisError(f"exact solution is missing field(s): {', '.join(missing)}")


@dataclass
class ErrorReport:
    """One row of a convergence table."""

    level: int | None
    h: float
    n_dofs: int
    energy_err: float
    h1_err: float
    l2_err: float
    control_l2_err: float = math.nan
    eoc_energy: float = math.nan
    eoc_h1: float = math.nan
    eoc_l2: float = math.nan
    eoc_control: float = math.nan
    converged: bool = True
    outer_iterations: int = 0
    max_mu: float = 0.0
    max_lambda: float = 0.0

    def as_dict(self):
        return asdict(self)


def _norms(space, e, ge, he, beta, degree):
    w = space.tabulate(degree).weights
    l2sq = np.einsum("tq,tq->", w, e**2)
    h1sq = np.einsum("tq,tqd->", w, ge**2)
    h2sq = np.einsum("tq,tqde->", w, he**2)
    return math.sqrt(beta * h2sq + l2sq), math.sqrt(h1sq + l2sq), math.sqrt(l2sq)


def energy_norm(space, y, beta, degree=ERROR_DEGREE):
    """Mesh-dependent norm sqrt(beta sum_T |v|_{H2(T)}^2 + ||v||^2) by quadrature."""
    v, g, h = space.evaluate(y, degree)
    return _norms(space, v, g, h, beta, degree)[0]


def error_norms(space, y, problem, degree=ERROR_DEGREE, level=None):
    """Energy, broken H1 and L2 errors of ``y`` against the exact state.

    Elements cut by a jump of the exact Hessian are integrated with the
    same rule, evaluating the piecewise formulas pointwise.
    """
    exact = problem.exact
    _require(exact, "y", "grad", "hess")
    tab = space.tabulate(degree)
    v, g, h = space.evaluate(y, degree)
    e = exact.y(tab.points) - v
    ge = exact.grad(tab.points) - g
    he = exact.hess(tab.points) - h
    energy, h1, l2 = _norms(space, e, ge, he, problem.beta, degree)
    row = ErrorReport(level, space.mesh.h, space.n_dofs, energy, h1, l2)
    if exact.u is not None:
        row.control_l2_err = control_error(space, y, problem, degree)
    return row


@dataclass(frozen=True, eq=False)
class DiscreteControl:
    """u_h = -Laplace_h(y_h) - f, a quadratic per element minus the source."""

    space: object
    lap_coeffs: np.ndarray  # (nT, 15), monomials of the Laplacian of y_h
    f: object

    def __call__(self, points):
        """Values at ``points`` of shape (nT, nq, 2), one row per element."""
        from .element import eval_polynomial

        lap = eval_polynomial(self.space.basis, self.lap_coeffs[:, None, :], points)[..., 0]
        return -lap - self.f(points)

    def element_means(self, degree=ASSEMBLY_DEGREE):
        tab = self.space.tabulate(degree)
        return np.einsum("tq,tq->t", tab.weights, self(tab.points)) / self.space.areas


def recover_control(space, y, problem):
    c = space.local_coefficients(y) * space.dofmap.signs
    lap = np.einsum("tj,tjm->tm", c, space.basis.laplacian_coeffs())
    return DiscreteControl(space, lap, problem.f)


def control_error(space, y, problem, degree=ERROR_DEGREE):
    _require(problem.exact, "u")
    u_h = recover_control(space, y, problem)
    tab = space.tabulate(degree)
    diff = problem.exact.u(tab.points) - u_h(tab.points)
    return math.sqrt(np.einsum("tq,tq->", tab.weights, diff**2))


def estimate_orders(errors, hs):
    """EOC_k = log(e_{k-1} / e_k) / log(h_{k-1} / h_k); the first entry and
    any pair involving a zero or non-finite error are NaN."""
    errors = [float(e) for e in errors]
    hs = [float(h) for h in hs]
    if len(errors) != len(hs):
        raise AnalysisError("errors and mesh sizes differ in length")
    if len(errors) < 2:
        raise AnalysisError("need at least two levels to estimate orders")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise AnalysisError("mesh sizes must be strictly decreasing")
    orders = [math.nan]
    for (e0, h0), (e1, h1) in zip(zip(errors, hs), zip(errors[1:], hs[1:])):
        if e0 > 0 and e1 > 0 and math.isfinite(e0) and math.isfinite(e1):
            orders.append(math.log(e0 / e1) / math.log(h0 / h1))
        else:
            orders.append(math.nan)
    return orders


def attach_orders(rows):
    """Fill the EOC columns of consecutive ErrorReport rows in place."""
    hs = [r.h for r in rows]
    for name in ("energy", "h1", "l2", "control"):
        col = "control_l2_err" if name == "control" else f"{name}_err"
        orders = estimate_orders([getattr(r, col) for r in rows], hs)
        for r, o in zip(rows, orders):
            setattr(r, f"eoc_{name}", o)
    return rows
