import numpy as np
import pytest
from scipy import integrate

from morleyoc.mesh import build_adjacency, build_disk_mesh


def duffy_rule(n=12):
    """Collapsed Gauss-Legendre rule on the reference triangle, built
    independently of the package's quadrature module.

    Returns barycentric-free reference points (n*n, 2) and weights that
    sum to 1/2.
    """
    t, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    x = u
    y = v * (1.0 - u)
    return np.column_stack([x.ravel(), y.ravel()]), (wu * wv * (1.0 - u)).ravel()


def integrate_independent(f, tri, n=12):
    """Integral of ``f`` (points (m, 2) -> (m,) or (m, ...)) over ``tri``."""
    tri = np.asarray(tri, dtype=float)
    ref, w = duffy_rule(n)
    J = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
    pts = tri[0] + ref @ J.T
    vals = np.asarray(f(pts))
    return abs(np.linalg.det(J)) * np.tensordot(w, vals, axes=(0, 0))


def edge_mean_quad(f, a, b):
    """(1/|e|) int_e f ds by adaptive scipy quadrature."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    val, _ = integrate.quad(lambda s: float(f((1 - s) * a + s * b)), 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def square_mesh(n=2):
    """Unit square split into n x n cells, each cut along its diagonal."""
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    verts = np.column_stack([X.ravel(), Y.ravel()])
    idx = lambda i, j: i * (n + 1) + j
    tris = []
    for i in range(n):
        for j in range(n):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            tris += [[a, b, c], [a, c, d]]
    return build_adjacency(verts, tris)


def random_triangle(rng, min_angle_deg=15.0):
    while True:
        tri = rng.uniform(-1.0, 1.0, size=(3, 2)) * rng.uniform(0.01, 10.0)
        tri += rng.uniform(-5, 5, size=2)
        e = np.roll(tri, -1, axis=0) - tri
        area2 = e[0, 0] * e[1, 1] - e[0, 1] * e[1, 0]
        if area2 < 0:
            tri = tri[[0, 2, 1]]
        angles = []
        for i in range(3):
            u = tri[(i + 1) % 3] - tri[i]
            v = tri[(i + 2) % 3] - tri[i]
            angles.append(np.degrees(np.arccos(u @ v / np.linalg.norm(u) / np.linalg.norm(v))))
        if min(angles) > min_angle_deg:
            return tri


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture(scope="session")
def disk_meshes():
    meshes = [build_disk_mesh(2.0, 0)]
    for _ in range(3):
        from morleyoc.mesh import refine_uniform

        meshes.append(refine_uniform(meshes[-1]))
    return meshes
