"""
Convergence on the disk benchmark
=================================

The exact state is radial with a Laplacian that jumps across |x| = 1,
its gradient never exceeds 1/2 and the exact control stays inside
[-2, 2].  We solve on levels 2..5 with the default bound g_max = 1 and
watch the errors and multipliers.
"""

from morleyoc import RunConfig, run_convergence
from morleyoc.pipeline import convergence_summary

config = RunConfig(levels=[2, 3, 4, 5], g_max=1.0, out="demo_out/gmax1")
rows = run_convergence(config)
print(convergence_summary(rows, config.make_problem()))

# Every level converges after a single Uzawa step with all multipliers
# zero: at g_max = 1 no constraint is active.  The discrete problem is
# then the unconstrained minimisation, whose limit is not the exact state
# above (that state needs an active gradient bound of 1/2 to satisfy the
# optimality system).  The errors therefore level off instead of
# decreasing.

# The polygonal boundary matters too.  Dropping the boundary term that
# accounts for the curvature of the circle gives a different limit
# problem altogether.
flat = run_convergence(RunConfig(levels=[2, 3], g_max=1.0, curvature=False, out="demo_out/flat"))
print(convergence_summary(flat))
