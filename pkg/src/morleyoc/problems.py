"""Problem data: regularisation weight, desired state, source, control
and gradient bounds, and (optionally) the exact solution.

Scalar fields are callables mapping points of shape (..., 2) to values
of shape (...).
"""

from dataclasses import dataclass, replace
import math

import numpy as np


class ProblemError(ValueError):
    pass


def constant(c):
    c = float(c)

    def field(x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], c)

    field.value = c
    return field


@dataclass(frozen=True)
class ExactSolution:
    """Exact state with its derivatives and the exact control.

    Any entry may be None; the error routines report which one is
    missing when they need it.
    """

    y: object = None
    grad: object = None
    hess: object = None
    u: object = None


@dataclass(frozen=True)
class ProblemSpec:
    """Data of the gradient-state and control constrained problem

    minimise 1/2 ||y - y_d||^2 + beta/2 ||u||^2
    subject to -Laplace(y) = u + f, y = 0 on the boundary,
    |grad y| <= g_max, u_a <= u <= u_b.
    """

    beta: float
    y_d: object
    f: object
    u_a: object
    u_b: object
    g_max: float = 1.0
    exact: ExactSolution | None = None
    name: str = "custom"
    radius: float | None = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ProblemError(f"beta must be positive, got {self.beta}")
        if not self.g_max > 0:
            raise ProblemError(f"g_max must be positive, got {self.g_max}")

    def with_options(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    def check_bounds(self, points):
        """Raise if u_a >= u_b at any of the given sample points."""
        lo = self.u_a(points)
        hi = self.u_b(points)
        bad = np.flatnonzero(~(np.asarray(lo) < np.asarray(hi)).ravel())
        if bad.size:
            raise ProblemError(f"control bounds violate u_a < u_b at sample point {bad[0]}")


def _radius(x):
    x = np.asarray(x, dtype=float)
    return np.hypot(x[..., 0], x[..., 1])


def _disk_state(x):
    r = _radius(x)
    inner = 0.25 + 0.5 * math.log(2.0) - 0.25 * r**2
    with np.errstate(divide="ignore"):
        outer = 0.5 * math.log(2.0) - 0.5 * np.log(np.where(r > 0, r, 1.0))
    return np.where(r <= 1.0, inner, outer)


def _disk_grad(x):
    x = np.asarray(x, dtype=float)
    r2 = (x**2).sum(axis=-1)
    inner = -0.5 * x
    outer = -0.5 * x / np.where(r2 > 0, r2, 1.0)[..., None]
    return np.where((r2 <= 1.0)[..., None], inner, outer)


def _disk_hess(x):
    x = np.asarray(x, dtype=float)
    r2 = (x**2).sum(axis=-1)
    eye = np.eye(2)
    inner = np.broadcast_to(-0.5 * eye, x.shape[:-1] + (2, 2))
    safe = np.where(r2 > 0, r2, 1.0)
    xx = np.einsum("...i,...j->...ij", x, x) / safe[..., None, None]
    outer = -(eye - 2.0 * xx) / (2.0 * safe[..., None, None])
    return np.where((r2 <= 1.0)[..., None, None], inner, outer)


def _disk_source(x):
    return np.where(_radius(x) <= 1.0, 2.0, 0.0)


def _disk_control(x):
    return np.where(_radius(x) <= 1.0, -1.0, 0.0)


def schiela_disk(beta=1.0, g_max=1.0):
    """Disk of radius 2 with y_d equal to the exact state.

    The state is radial with a kink in its Laplacian at |x| = 1, the
    source is 2 inside the unit disk, the control is -1 there and 0
    outside, and the control bounds are -2 and 2.
    """
    return ProblemSpec(
        beta=beta,
        y_d=_disk_state,
        f=_disk_source,
        u_a=constant(-2.0),
        u_b=constant(2.0),
        g_max=g_max,
        exact=ExactSolution(_disk_state, _disk_grad, _disk_hess, _disk_control),
        name="schiela-disk",
        radius=2.0,
    )


PROBLEMS = {
    "schiela-disk": schiela_disk,
}


def builtin_problem(name, **options):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ProblemError(
            f"unknown problem {name!r}; registered problems: {', '.join(sorted(PROBLEMS))}"
        ) from None
    return factory(**{k: v for k, v in options.items() if v is not None})


def register_problem(name, factory):
    PROBLEMS[name] = factory
