"""
The enriched Morley element on a disk
=====================================

A short tour of the building blocks: the disk triangulation, the nine
local degrees of freedom and how they are glued into a global space.
"""

import numpy as np

from morleyoc import FESpace, build_disk_mesh, build_nodal_basis, check_unisolvence, eval_basis, refine_uniform
from morleyoc.quadrature import edge_rule

# The coarsest mesh is a fan of eight triangles over a regular octagon
# inscribed in the circle of radius 2.  Each refinement splits every
# triangle into four and pushes new boundary vertices onto the circle.
mesh = build_disk_mesh(2.0, 0)
for level in range(4):
    print(f"level {level}: {mesh}")
    mesh = refine_uniform(mesh)

# The local space is P2 plus three bubbles b * lambda_i.  Its degrees of
# freedom are the vertex values, the edge means of the value and the
# edge means of the outward normal derivative.
tri = np.array([[0.0, 0.0], [1.0, 0.2], [0.3, 0.8]])
basis = build_nodal_basis(tri)
print(check_unisolvence(tri))

# Evaluate the DOFs of every basis function: the result is the identity.
rule = edge_rule(8)
D = np.zeros((9, 9))
D[:3] = eval_basis(basis, tri)[0]
for i in range(3):
    a, b = tri[(i + 1) % 3], tri[(i + 2) % 3]
    pts = rule.map_to(np.array([a, b]))
    d = b - a
    n = np.array([d[1], -d[0]]) / np.linalg.norm(d)
    val, grad, _ = eval_basis(basis, pts)
    D[3 + i] = rule.weights @ val
    D[6 + i] = rule.weights @ (grad @ n)
print("max |DOF_i(phi_j) - delta_ij| =", np.abs(D - np.eye(9)).max())

# Globally, vertex values and edge means on the boundary are removed;
# normal derivatives on the boundary remain free, which matches the
# natural boundary condition of the Laplacian-squared form.
for clamped in (False, True):
    space = FESpace(build_disk_mesh(2.0, 2), clamped=clamped)
    print(f"clamped={clamped}: {space.n_dofs} global DOFs")
