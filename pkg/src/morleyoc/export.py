"""CSV tables and legacy ASCII VTK output."""

import csv
import math
import os

import numpy as np

ERROR_COLUMNS = [
    "level",
    "h",
    "N",
    "energy_err",
    "eoc_energy",
    "h1_err",
    "eoc_h1",
    "l2_err",
    "eoc_l2",
    "control_l2_err",
    "eoc_control",
    "converged",
]


def fmt_float(v):
    """17 significant digits, '.' decimal; NaN and infinities spelled out."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _error_row(r):
    return [
        "" if r.level is None else str(r.level),
        fmt_float(r.h),
        str(r.n_dofs),
        fmt_float(r.energy_err),
        fmt_float(r.eoc_energy),
        fmt_float(r.h1_err),
        fmt_float(r.eoc_h1),
        fmt_float(r.l2_err),
        fmt_float(r.eoc_l2),
        fmt_float(r.control_l2_err),
        fmt_float(r.eoc_control),
        str(int(bool(r.converged))),
    ]


def write_error_table(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERROR_COLUMNS)
        for r in rows:
            w.writerow(_error_row(r))


def read_error_table(path):
    """Rows of a table written by :func:`write_error_table` as dicts of floats."""
    with open(path, newline="") as fh:
        return [{k: float(v) if v else math.nan for k, v in row.items()} for row in csv.DictReader(fh)]


def write_solution(path, space, y):
    """DOF vector with the entity each DOF belongs to.

    Columns: dof, kind (vertex, edge_value, edge_normal), entity index,
    x, y of the entity (vertex or edge midpoint), value.
    """
    mesh, dm = space.mesh, space.dofmap
    mid = mesh.vertices[mesh.edges].mean(axis=1)
    rows = []
    for kind, table, where in (
        ("vertex", dm.vertex, mesh.vertices),
        ("edge_value", dm.edge_value, mid),
        ("edge_normal", dm.edge_normal, mid),
    ):
        for ent in np.flatnonzero(table >= 0):
            rows.append((int(table[ent]), kind, int(ent), where[ent, 0], where[ent, 1]))
    rows.sort()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dof", "kind", "entity", "x", "y", "value"])
        for dof, kind, ent, px, py in rows:
            w.writerow([dof, kind, ent, fmt_float(px), fmt_float(py), fmt_float(y[dof])])


def vertex_values(space, y):
    """Nodal values of y_h at every mesh vertex (zero on the boundary)."""
    dm = space.dofmap
    out = np.zeros(space.mesh.n_vertices)
    keep = dm.vertex >= 0
    out[keep] = np.asarray(y)[dm.vertex[keep]]
    return out


def export_vtk(space, y, u_means, mu, lam_plus, lam_minus, path):
    """Write a legacy ASCII VTK unstructured grid.

    Point data: vertex values of y_h.  Cell data: element means of u_h
    and the multipliers mu, lambda+ and lambda-.  ``.vtk`` is appended
    when ``path`` has no extension.  Returns the path written.
    """
    mesh = space.mesh
    nV, nT = mesh.n_vertices, mesh.n_triangles
    cells = {"u_h": u_means, "mu": mu, "lambda_plus": lam_plus, "lambda_minus": lam_minus}
    for name, arr in cells.items():
        if np.shape(arr) != (nT,):
            raise ValueError(f"cell field {name} has shape {np.shape(arr)}, expected ({nT},)")
    if not os.path.splitext(str(path))[1]:
        path = f"{path}.vtk"

    lines = [
        "# vtk DataFile Version 3.0",
        "morleyoc discrete state",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {nV} double",
    ]
    lines += [f"{fmt_float(x)} {fmt_float(yv)} 0" for x, yv in mesh.vertices.tolist()]
    lines.append(f"CELLS {nT} {4 * nT}")
    lines += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines.append(f"CELL_TYPES {nT}")
    lines += ["5"] * nT
    lines += [f"POINT_DATA {nV}", "SCALARS y_h double 1", "LOOKUP_TABLE default"]
    lines += [fmt_float(v) for v in vertex_values(space, y)]
    lines.append(f"CELL_DATA {nT}")
    for name, arr in cells.items():
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [fmt_float(v) for v in np.asarray(arr, dtype=float)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_vtk_scalars(path):
    """Minimal reader for files written by :func:`export_vtk`.

    Returns ``(points, cells, point_data, cell_data)``.
    """
    with open(path) as fh:
        tokens = fh.read().split("\n")
    it = iter(tokens)
    points, cells, pdata, cdata = None, None, {}, {}
    section = None
    for line in it:
        parts = line.split()
        if not parts:
            continue
        key = parts[0]
        if key == "POINTS":
            n = int(parts[1])
            points = np.array([[float(s) for s in next(it).split()] for _ in range(n)])
        elif key == "CELLS":
            n = int(parts[1])
            cells = np.array([[int(s) for s in next(it).split()][1:] for _ in range(n)])
        elif key == "POINT_DATA":
            section, size = pdata, int(parts[1])
        elif key == "CELL_DATA":
            section, size = cdata, int(parts[1])
        elif key == "SCALARS":
            next(it)  # LOOKUP_TABLE
            section[parts[1]] = np.array([float(next(it)) for _ in range(size)])
    return points, cells, pdata, cdata
