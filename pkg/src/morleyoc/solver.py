"""Uzawa iteration for the discrete constrained minimisation.

The Lagrangian is

    1/2 y'Ay - b'y
      + sum_T |T| lam_plus_T  (-L_T y - upper_T)
      + sum_T |T| lam_minus_T (lower_T + L_T y)
      + sum_T |T| mu_T        (|G_T y|^2 - g_max^2)

with L_T the element mean of the Laplacian and G_T the element mean
of the gradient.  Each outer step minimises it in y for fixed
multipliers (an SPD linear solve) and then takes a projected ascent
step on the multipliers.
"""

from dataclasses import dataclass, field
import csv
import logging
import math

import numpy as np
import scipy.sparse as sp

from .linalg import DEFAULT_TOL, spd_solve

logger = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    """Step sizes and tolerances; ``None`` steps default to beta."""

    rho_ctrl: float | None = None
    rho_grad: float | None = None
    tol_feas: float = 1e-8
    tol_stat: float = 1e-8
    tol_comp: float = 1e-8
    max_outer: int = 5000
    inner_tol: float = DEFAULT_TOL
    inner_max_iter: int | None = None
    log_path: str | None = None

    def __post_init__(self):
        for name in ("tol_feas", "tol_stat", "tol_comp", "inner_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")
        for name in ("rho_ctrl", "rho_grad"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")

    def steps(self, beta):
        return (
            beta if self.rho_ctrl is None else self.rho_ctrl,
            beta if self.rho_grad is None else self.rho_grad,
        )


@dataclass
class UzawaState:
    lam_plus: np.ndarray
    lam_minus: np.ndarray
    mu: np.ndarray
    y: np.ndarray | None = None
    iterations: int = 0
    converged: bool = False
    history: list = field(default_factory=list)

    @classmethod
    def zeros(cls, n_elements):
        z = np.zeros(n_elements)
        return cls(z.copy(), z.copy(), z.copy())


@dataclass
class KktReport:
    stationarity: float
    feas_upper: float
    feas_lower: float
    feas_grad: float
    comp_upper: float
    comp_lower: float
    comp_grad: float
    max_lam_plus: float = 0.0
    max_lam_minus: float = 0.0
    max_mu: float = 0.0

    @property
    def feasibility(self):
        return max(self.feas_upper, self.feas_lower, self.feas_grad)

    @property
    def complementarity(self):
        return max(self.comp_upper, self.comp_lower, self.comp_grad)

    def __str__(self):
        return (
            f"stationarity {self.stationarity:.3e}  feasibility {self.feasibility:.3e} "
            f"(ctrl+ {self.feas_upper:.2e}, ctrl- {self.feas_lower:.2e}, grad {self.feas_grad:.2e})  "
            f"complementarity {self.complementarity:.3e}  "
            f"max multipliers: lam+ {self.max_lam_plus:.3e} lam- {self.max_lam_minus:.3e} mu {self.max_mu:.3e}"
        )


def multiplier_operator(A, constraints, mu):
    """A(mu) = A + sum_T 2|T| mu_T G_T' G_T."""
    if not np.any(mu):
        return A
    w = sp.diags(2.0 * constraints.areas * mu)
    Gx, Gy = constraints.grad_x, constraints.grad_y
    return (A + Gx.T @ w @ Gx + Gy.T @ w @ Gy).tocsr()


def multiplier_load(b, constraints, lam_plus, lam_minus):
    """b(lam) = b + L' (|T| (lam_plus - lam_minus))."""
    if not (np.any(lam_plus) or np.any(lam_minus)):
        return b
    return b + constraints.lap.T @ (constraints.areas * (lam_plus - lam_minus))


def dual_value(A, b, constraints, state, y):
    """Lagrangian at (y, multipliers); equals the dual function when y
    minimises it for those multipliers."""
    u = constraints.control_means(y)
    g2 = (constraints.gradient_means(y) ** 2).sum(axis=1)
    a = constraints.areas
    return float(
        0.5 * y @ (A @ y)
        - b @ y
        + np.sum(a * state.lam_plus * (u - constraints.upper))
        + np.sum(a * state.lam_minus * (constraints.lower - u))
        + np.sum(a * state.mu * (g2 - constraints.g_max**2))
    )


def kkt_report(y, state, A, b, constraints):
    u = constraints.control_means(y)
    g2 = (constraints.gradient_means(y) ** 2).sum(axis=1)
    gmax2 = constraints.g_max**2
    Amu = multiplier_operator(A, constraints, state.mu)
    blam = multiplier_load(b, constraints, state.lam_plus, state.lam_minus)
    r = Amu @ y - blam
    nb = np.linalg.norm(b)
    stat = float(np.linalg.norm(r) / nb) if nb > 0 else float(np.linalg.norm(r))
    feas_u, feas_l, _ = constraints.violations(y)
    g = np.sqrt(g2)
    return KktReport(
        stationarity=stat,
        feas_upper=feas_u,
        feas_lower=feas_l,
        feas_grad=float(np.max(g - constraints.g_max, initial=0.0)),
        comp_upper=float(np.max(np.abs(state.lam_plus * (u - constraints.upper)), initial=0.0)),
        comp_lower=float(np.max(np.abs(state.lam_minus * (constraints.lower - u)), initial=0.0)),
        comp_grad=float(np.max(np.abs(state.mu * (g2 - gmax2)), initial=0.0)),
        max_lam_plus=float(np.max(state.lam_plus, initial=0.0)),
        max_lam_minus=float(np.max(state.lam_minus, initial=0.0)),
        max_mu=float(np.max(state.mu, initial=0.0)),
    )


def uzawa_solve(A, b, constraints, config=None, beta=1.0, state=None):
    """Solve min 1/2 y'Ay - b'y subject to the elementwise constraints.

    Starts from the unconstrained minimiser with zero multipliers unless
    ``state`` is given.  Hitting ``max_outer`` is reported through
    ``state.converged`` rather than raised.

    Returns
    -------
    y : ndarray
    state : UzawaState
    report : KktReport
    """
    config = SolverConfig() if config is None else config
    rho_c, rho_g = config.steps(beta)
    state = UzawaState.zeros(constraints.n_elements) if state is None else state
    gmax2 = constraints.g_max**2
    log_rows = []
    y = state.y
    for it in range(1, config.max_outer + 1):
        Amu = multiplier_operator(A, constraints, state.mu)
        blam = multiplier_load(b, constraints, state.lam_plus, state.lam_minus)
        y = spd_solve(Amu, blam, tol=config.inner_tol, max_iter=config.inner_max_iter, x0=y)
        state.y = y
        state.iterations = it

        u = constraints.control_means(y)
        g2 = (constraints.gradient_means(y) ** 2).sum(axis=1)
        up = u - constraints.upper
        lo = constraints.lower - u
        gr = g2 - gmax2
        feas = max(np.max(up, initial=0.0), np.max(lo, initial=0.0), np.max(np.sqrt(g2) - constraints.g_max, initial=0.0))
        comp = max(
            np.max(np.abs(state.lam_plus * up), initial=0.0),
            np.max(np.abs(state.lam_minus * lo), initial=0.0),
            np.max(np.abs(state.mu * gr), initial=0.0),
        )
        dual = dual_value(A, b, constraints, state, y)
        state.history.append({"iter": it, "feas": float(feas), "comp": float(comp), "dual": dual})
        if config.log_path:
            rep = kkt_report(y, state, A, b, constraints)
            log_rows.append((it, rep.stationarity, max(rep.feas_upper, rep.feas_lower), rep.feas_grad, rep.complementarity))
        if feas <= config.tol_feas and comp <= config.tol_comp:
            state.converged = True
            break

        state.lam_plus = np.maximum(0.0, state.lam_plus + rho_c * up)
        state.lam_minus = np.maximum(0.0, state.lam_minus + rho_c * lo)
        state.mu = np.maximum(0.0, state.mu + rho_g * gr)
    else:
        logger.warning(
            "Uzawa iteration stopped after %d steps (feasibility %.3e, complementarity %.3e)",
            config.max_outer, feas, comp,
        )

    if config.log_path:
        with open(config.log_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "stationarity", "feas_ctrl", "feas_grad", "comp"])
            for row in log_rows:
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    return y, state, kkt_report(y, state, A, b, constraints)
