"""Bubble-enriched Morley finite elements for elliptic optimal control
with pointwise gradient-state and control constraints.

The reduced problem is a fourth-order variational inequality in the
state: minimise 1/2 A_h(y, y) - l(y) over the discrete set K_h of states
whose elementwise mean gradient is bounded and whose elementwise mean
control -Lap_h y - f lies between the bounds.  It is solved with a
Uzawa multiplier iteration.
"""

from .analysis import (
    ErrorReport,
    attach_orders,
    energy_norm,
    error_norms,
    estimate_orders,
    interpolate_pi_h,
    recover_control,
)
from .assembly import (
    FESpace,
    assemble_load,
    assemble_system,
    boundary_curvature,
    build_constraints,
    build_dof_map,
)
from .element import build_nodal_basis, check_unisolvence, eval_basis
from .export import export_vtk
from .linalg import SolveError, csr_from_triplets, spd_solve
from .mesh import Mesh, build_adjacency, build_disk_mesh, load_mesh, refine_uniform, save_mesh
from .pipeline import RunConfig, run_convergence, run_solve, solve_on_mesh
from .problems import ExactSolution, ProblemSpec, builtin_problem, schiela_disk
from .quadrature import edge_rule, integrate_on_triangle, triangle_rule
from .solver import SolverConfig, UzawaState, kkt_report, uzawa_solve

__version__ = "0.1.0"
