"""Experiment orchestration: one solve on one mesh, a single-level run
with artifacts on disk, and a convergence study over refinement levels.
"""

from dataclasses import dataclass, field, replace
import logging
import math
import os

import numpy as np

from .analysis import attach_orders, error_norms, recover_control
from .assembly import (
    FESpace,
    assemble_load,
    assemble_system,
    boundary_curvature,
    build_constraints,
)
from .export import export_vtk, write_error_table, write_solution
from .mesh import build_disk_mesh, load_mesh, refine_uniform
from .problems import builtin_problem
from .solver import SolverConfig, uzawa_solve

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid run configuration (a usage error on the command line)."""


@dataclass
class RunConfig:
    """Everything needed to reproduce a run.

    ``mesh`` is a ``.tmesh`` path or None for the built-in disk; levels
    count uniform refinements of that coarse mesh.  ``rho`` sets both
    Uzawa steps and ``tol`` both the feasibility and complementarity
    tolerances.  ``curvature`` adds the boundary-curvature term to the
    system matrix on meshes tagged with a circular boundary.
    """

    problem: str = "schiela-disk"
    mesh: str | None = None
    levels: list = field(default_factory=lambda: [2])
    beta: float | None = None
    g_max: float | None = None
    rho: float | None = None
    tol: float = 1e-8
    max_outer: int = 5000
    out: str = "out"
    vtk: bool = False
    log: bool = False
    curvature: bool = True

    def __post_init__(self):
        self.levels = [int(k) for k in self.levels]
        if not self.levels:
            raise ConfigError("levels must be non-empty")
        if any(k < 0 for k in self.levels):
            raise ConfigError("levels must be non-negative")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ConfigError("levels must be strictly increasing")
        if self.rho is not None and not self.rho > 0:
            raise ConfigError("rho must be positive")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.max_outer < 1:
            raise ConfigError("max-outer must be at least 1")

    def solver_config(self, log_path=None):
        return SolverConfig(
            rho_ctrl=self.rho,
            rho_grad=self.rho,
            tol_feas=self.tol,
            tol_comp=self.tol,
            tol_stat=self.tol,
            max_outer=self.max_outer,
            log_path=log_path,
        )

    def make_problem(self):
        return builtin_problem(self.problem, beta=self.beta, g_max=self.g_max)

    def coarse_mesh(self):
        if self.mesh is None:
            return build_disk_mesh(2.0, 0)
        return load_mesh(self.mesh)


@dataclass
class LevelResult:
    """Outcome of one discrete solve."""

    space: FESpace
    y: np.ndarray
    state: object
    kkt: object
    errors: object = None
    level: int | None = None

    @property
    def mesh(self):
        return self.space.mesh


def solve_on_mesh(problem, mesh, solver_config=None, curvature=True, level=None):
    """Assemble and solve the discrete problem on ``mesh``.

    Errors against the exact solution are attached when the problem
    carries one.
    """
    space = FESpace(mesh)
    kappa = boundary_curvature(mesh) if curvature else 0.0
    A = assemble_system(space, problem, curvature=kappa)
    b = assemble_load(space, problem)
    constraints = build_constraints(space, problem)
    y, state, kkt = uzawa_solve(A, b, constraints, solver_config, beta=problem.beta)
    result = LevelResult(space, y, state, kkt, level=level)
    if problem.exact is not None:
        row = error_norms(space, y, problem, level=level)
        row.converged = state.converged
        row.outer_iterations = state.iterations
        row.max_mu = kkt.max_mu
        row.max_lambda = float(np.max(state.lam_plus + state.lam_minus, initial=0.0))
        result.errors = row
    return result


def refined_meshes(coarse, levels):
    """Yield (level, mesh) for the requested refinement levels of ``coarse``."""
    mesh, current = coarse, 0
    for k in levels:
        while current < k:
            mesh = refine_uniform(mesh)
            current += 1
        yield k, mesh


def _ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror}") from None
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory is not writable: {path}")


def run_solve(config):
    """Solve on the finest requested level and write its artifacts.

    Writes ``solution.csv``, ``kkt.txt``, ``errors.csv`` (when an exact
    solution exists) and optionally ``solution.vtk`` and
    ``uzawa_log.csv`` into ``config.out``.
    """
    problem = config.make_problem()
    _ensure_dir(config.out)
    level, mesh = list(refined_meshes(config.coarse_mesh(), config.levels[-1:]))[0]
    log_path = os.path.join(config.out, "uzawa_log.csv") if config.log else None
    res = solve_on_mesh(problem, mesh, config.solver_config(log_path), config.curvature, level)

    write_solution(os.path.join(config.out, "solution.csv"), res.space, res.y)
    with open(os.path.join(config.out, "kkt.txt"), "w") as fh:
        fh.write(_kkt_text(res))
    if res.errors is not None:
        write_error_table(os.path.join(config.out, "errors.csv"), [res.errors])
    if config.vtk:
        write_result_vtk(os.path.join(config.out, "solution.vtk"), res, problem)
    return res


def write_result_vtk(path, result, problem):
    u_h = recover_control(result.space, result.y, problem)
    st = result.state
    return export_vtk(result.space, result.y, u_h.element_means(), st.mu, st.lam_plus, st.lam_minus, path)


def _kkt_text(res):
    st = res.state
    lines = [
        f"level {res.level}",
        f"dofs {res.space.n_dofs}",
        f"triangles {res.mesh.n_triangles}",
        f"h {res.mesh.h!r}",
        f"converged {st.converged}",
        f"outer_iterations {st.iterations}",
        str(res.kkt),
    ]
    return "\n".join(lines) + "\n"


def run_convergence(config):
    """Solve on every level, attach empirical orders and write
    ``convergence.csv`` and ``summary.txt``.

    A level whose Uzawa loop hits ``max_outer`` is flagged in the
    ``converged`` column; the study continues.
    """
    if len(config.levels) < 2:
        raise ConfigError("a convergence study needs at least two levels")
    problem = config.make_problem()
    if problem.exact is None:
        raise ConfigError(f"problem {problem.name!r} has no exact solution to measure errors against")
    _ensure_dir(config.out)
    rows, results = [], []
    for level, mesh in refined_meshes(config.coarse_mesh(), config.levels):
        log_path = os.path.join(config.out, f"uzawa_log_L{level}.csv") if config.log else None
        res = solve_on_mesh(problem, mesh, config.solver_config(log_path), config.curvature, level)
        if not res.state.converged:
            logger.warning("level %d: Uzawa loop not converged", level)
        logger.info("level %d: N = %d, energy error %.4e", level, res.space.n_dofs, res.errors.energy_err)
        rows.append(res.errors)
        results.append(res)
        if config.vtk:
            write_result_vtk(os.path.join(config.out, f"solution_L{level}.vtk"), res, problem)
    attach_orders(rows)
    write_error_table(os.path.join(config.out, "convergence.csv"), rows)
    text = convergence_summary(rows, problem)
    with open(os.path.join(config.out, "summary.txt"), "w") as fh:
        fh.write(text)
    return rows


def convergence_summary(rows, problem=None):
    """Human-readable table plus a comparison of the finest-pair orders
    with the expected behaviour (energy order below 1 because the exact
    Hessian jumps across a curve, H1 and L2 orders near or above 1)."""
    head = f"{'level':>5} {'h':>9} {'N':>7} {'energy':>10} {'eoc':>5} {'H1':>10} {'eoc':>5} {'L2':>10} {'eoc':>5} {'control':>10} {'eoc':>5} {'conv':>5} {'iters':>6} {'max mu':>9} {'max lam':>9}"
    out = []
    if problem is not None:
        out.append(f"problem {problem.name}  beta {problem.beta:g}  g_max {problem.g_max:g}")
    out.append(head)

    def fmt(v):
        return "  nan" if not math.isfinite(v) else f"{v:5.2f}"

    for r in rows:
        out.append(
            f"{r.level!s:>5} {r.h:9.4f} {r.n_dofs:7d} {r.energy_err:10.4e} {fmt(r.eoc_energy)} "
            f"{r.h1_err:10.4e} {fmt(r.eoc_h1)} {r.l2_err:10.4e} {fmt(r.eoc_l2)} "
            f"{r.control_l2_err:10.4e} {fmt(r.eoc_control)} {str(r.converged):>5} {r.outer_iterations:6d} "
            f"{r.max_mu:9.2e} {r.max_lambda:9.2e}"
        )
    last = rows[-1]
    out.append(
        f"finest-pair orders: energy {last.eoc_energy:.3f} (expected in (0, 1)), "
        f"H1 {last.eoc_h1:.3f} (expected about 1), L2 {last.eoc_l2:.3f} (expected >= 1)"
    )
    ctrl = [r.control_l2_err for r in rows[-3:]]
    mono = all(b < a for a, b in zip(ctrl, ctrl[1:]))
    out.append(f"control error decreasing over the last {len(ctrl)} levels: {mono}")
    if not all(r.converged for r in rows):
        out.append("warning: some levels did not converge; see the converged column")
    return "\n".join(out) + "\n"


def with_overrides(config, **changes):
    """Copy of ``config`` with the non-None entries of ``changes`` applied."""
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
