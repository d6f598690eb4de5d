"""Triangulations of polygonal domains and of polygonal approximations
of the disk.

Edges are stored with the lower vertex index first; that orientation
fixes the global edge normal (the direction rotated by +90 degrees),
which the assembly uses to share normal-derivative degrees of freedom
between neighbouring triangles.
"""

from dataclasses import dataclass
import os

import numpy as np


class MeshError(ValueError):
    pass


class MeshParseError(MeshError):
    def __init__(self, message, lineno=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"line {lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.lineno = lineno


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangle mesh with edge adjacency.

    Attributes
    ----------
    vertices : (nV, 2) float array
    triangles : (nT, 3) int array, counterclockwise
    edges : (nE, 2) int array, ``edges[:, 0] < edges[:, 1]``
    edge_triangles : (nE, 2) int array
        Adjacent triangles; the second entry is -1 on the boundary.
    triangle_edges : (nT, 3) int array
        ``triangle_edges[t, i]`` is the edge opposite local vertex i.
    boundary_vertices, boundary_edges : bool arrays
    boundary_radius : float or None
        When set, the boundary approximates the circle of this radius
        centred at the origin and refinement projects new boundary
        vertices onto it.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray
    edge_triangles: np.ndarray
    triangle_edges: np.ndarray
    boundary_vertices: np.ndarray
    boundary_edges: np.ndarray
    boundary_radius: float | None = None

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def corners(self):
        """Vertex coordinates per triangle, shape (nT, 3, 2)."""
        return self.vertices[self.triangles]

    @property
    def areas(self):
        c = self.corners
        d1 = c[:, 1] - c[:, 0]
        d2 = c[:, 2] - c[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def edge_lengths(self):
        p = self.vertices[self.edges]
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)

    @property
    def diameters(self):
        """Longest edge of every triangle."""
        return self.edge_lengths[self.triangle_edges].max(axis=1)

    @property
    def h(self):
        return float(self.diameters.max())

    @property
    def edge_normals(self):
        """Unit normals of the global edge orientation (low -> high, +90 deg)."""
        p = self.vertices[self.edges]
        d = p[:, 1] - p[:, 0]
        d = d / np.linalg.norm(d, axis=1)[:, None]
        return np.column_stack([-d[:, 1], d[:, 0]])

    @property
    def centroids(self):
        return self.corners.mean(axis=1)

    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_triangles

    def __repr__(self):
        return (
            f"Mesh(nV={self.n_vertices}, nE={self.n_edges}, "
            f"nT={self.n_triangles}, h={self.h:.4g})"
        )


def build_adjacency(vertices, triangles, boundary_radius=None):
    """Compute edges, edge-triangle adjacency and boundary flags.

    Edges are numbered lexicographically by their sorted vertex pair.

    Raises
    ------
    MeshError
        If an edge is shared by more than two triangles or a triangle
        has non-positive signed area.
    """
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
    triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    nT = len(triangles)
    if nT and (triangles.min() < 0 or triangles.max() >= len(vertices)):
        raise MeshError("triangle references a vertex index out of range")

    c = vertices[triangles]
    d1 = c[:, 1] - c[:, 0]
    d2 = c[:, 2] - c[:, 0]
    signed = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    bad = np.flatnonzero(signed <= 0)
    if bad.size:
        raise MeshError(f"triangle {bad[0]} has non-positive signed area {0.5 * signed[bad[0]]:g}")

    # local edge i is opposite local vertex i
    local = triangles[:, [[1, 2], [2, 0], [0, 1]]].reshape(-1, 2)
    local = np.sort(local, axis=1)
    edges, inverse, counts = np.unique(local, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if counts.size and counts.max() > 2:
        e = int(np.argmax(counts))
        raise MeshError(
            f"non-manifold edge ({edges[e, 0]}, {edges[e, 1]}) shared by {counts[e]} triangles"
        )
    triangle_edges = inverse.reshape(nT, 3)

    edge_triangles = -np.ones((len(edges), 2), dtype=np.int64)
    owner = np.repeat(np.arange(nT), 3)
    order = np.argsort(inverse, kind="stable")
    sorted_edges = inverse[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = sorted_edges[1:] != sorted_edges[:-1]
    edge_triangles[sorted_edges[first], 0] = owner[order[first]]
    edge_triangles[sorted_edges[~first], 1] = owner[order[~first]]

    boundary_edges = edge_triangles[:, 1] < 0
    boundary_vertices = np.zeros(len(vertices), dtype=bool)
    boundary_vertices[edges[boundary_edges].ravel()] = True

    return Mesh(
        vertices=_frozen(vertices, float),
        triangles=_frozen(triangles, np.int64),
        edges=_frozen(edges, np.int64),
        edge_triangles=_frozen(edge_triangles, np.int64),
        triangle_edges=_frozen(triangle_edges, np.int64),
        boundary_vertices=_frozen(boundary_vertices, bool),
        boundary_edges=_frozen(boundary_edges, bool),
        boundary_radius=None if boundary_radius is None else float(boundary_radius),
    )


def refine_uniform(mesh):
    """Split every triangle into four through its edge midpoints.

    Boundary midpoints are pushed onto the circle when the mesh carries
    a ``boundary_radius``.
    """
    nV = mesh.n_vertices
    p = mesh.vertices[mesh.edges]
    mid = 0.5 * (p[:, 0] + p[:, 1])
    if mesh.boundary_radius is not None:
        b = mesh.boundary_edges
        mid[b] *= mesh.boundary_radius / np.linalg.norm(mid[b], axis=1)[:, None]
    vertices = np.vstack([mesh.vertices, mid])

    t = mesh.triangles
    m = nV + mesh.triangle_edges  # m[:, i] is the midpoint opposite vertex i
    triangles = np.concatenate(
        [
            np.column_stack([t[:, 0], m[:, 2], m[:, 1]]),
            np.column_stack([t[:, 1], m[:, 0], m[:, 2]]),
            np.column_stack([t[:, 2], m[:, 1], m[:, 0]]),
            np.column_stack([m[:, 0], m[:, 1], m[:, 2]]),
        ]
    )
    return build_adjacency(vertices, triangles, boundary_radius=mesh.boundary_radius)


def build_disk_mesh(radius=2.0, level=0, n_sides=8):
    """Fan triangulation of the regular ``n_sides``-gon inscribed in the
    circle of the given radius, refined ``level`` times.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if level < 0:
        raise ValueError(f"level must be non-negative, got {level}")
    theta = 2.0 * np.pi * np.arange(n_sides) / n_sides
    vertices = np.vstack([[0.0, 0.0], radius * np.column_stack([np.cos(theta), np.sin(theta)])])
    i = np.arange(n_sides)
    triangles = np.column_stack([np.zeros(n_sides, dtype=int), 1 + i, 1 + (i + 1) % n_sides])
    mesh = build_adjacency(vertices, triangles, boundary_radius=radius)
    for _ in range(level):
        mesh = refine_uniform(mesh)
    return mesh


# comment line carrying the circular-boundary tag; other readers skip it
_RADIUS_PRAGMA = "# boundary_radius"


def save_mesh(mesh, path):
    """Write ``mesh`` in the ``.tmesh`` text format.

    ``v x y b`` per vertex (``b`` = 1 on the boundary), ``t i j k`` per
    triangle, 0-based indices.  Coordinates use ``repr`` so a round trip
    is exact.  A circular boundary tag is kept in a comment line.
    """
    lines = [f"# tmesh: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles"]
    if mesh.boundary_radius is not None:
        lines.append(f"{_RADIUS_PRAGMA} {mesh.boundary_radius!r}")
    for (x, y), b in zip(mesh.vertices.tolist(), mesh.boundary_vertices.tolist()):
        lines.append(f"v {x!r} {y!r} {int(b)}")
    for i, j, k in mesh.triangles.tolist():
        lines.append(f"t {i} {j} {k}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path, boundary_radius=None):
    """Read a ``.tmesh`` file.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    MeshParseError
        On malformed content; the message names the offending line.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"mesh file not found: {path}")
    vertices = []
    triangles = []
    tri_lines = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if raw.startswith(_RADIUS_PRAGMA) and boundary_radius is None:
                try:
                    boundary_radius = float(raw[len(_RADIUS_PRAGMA):])
                except ValueError:
                    raise MeshParseError("malformed boundary radius", lineno, path) from None
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            tag = parts[0]
            try:
                if tag == "v":
                    if len(parts) not in (3, 4):
                        raise MeshParseError("vertex line needs 'v x y [b]'", lineno, path)
                    vertices.append((float(parts[1]), float(parts[2])))
                    if len(parts) == 4 and parts[3] not in ("0", "1"):
                        raise MeshParseError(f"boundary flag must be 0 or 1, got {parts[3]!r}", lineno, path)
                elif tag == "t":
                    if len(parts) != 4:
                        raise MeshParseError("triangle line needs 't i j k'", lineno, path)
                    triangles.append(tuple(int(s) for s in parts[1:]))
                    tri_lines.append(lineno)
                else:
                    raise MeshParseError(f"unknown record type {tag!r}", lineno, path)
            except ValueError as exc:
                if isinstance(exc, MeshParseError):
                    raise
                raise MeshParseError(f"cannot parse number ({exc})", lineno, path) from None
    if not vertices:
        raise MeshParseError("no vertices", path=path)
    if not triangles:
        raise MeshParseError("no triangles", path=path)
    nV = len(vertices)
    for tri, lineno in zip(triangles, tri_lines):
        for idx in tri:
            if not 0 <= idx < nV:
                raise MeshParseError(f"vertex index {idx} out of range (have {nV} vertices)", lineno, path)
    try:
        return build_adjacency(vertices, triangles, boundary_radius=boundary_radius)
    except MeshError as exc:
        raise MeshParseError(str(exc), path=path) from None
