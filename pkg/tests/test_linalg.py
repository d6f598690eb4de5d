import numpy as np
import pytest
import scipy.sparse as sp

from morleyoc.assembly import FESpace, assemble_load, assemble_system
from morleyoc.linalg import SolveError, csr_from_triplets, relative_residual, rounding_floor, spd_solve
from morleyoc.problems import schiela_disk


def test_duplicates_summed():
    A = csr_from_triplets(2, [(0, 0, 1.0), (0, 0, 2.0)])
    assert A.nnz == 1 and A[0, 0] == 3.0


def test_empty_triplets_give_zero_matrix():
    A = csr_from_triplets(3, [])
    assert A.shape == (3, 3) and A.nnz == 0


def test_sorted_unique_columns(rng):
    trip = [(int(i), int(j), float(v)) for i, j, v in zip(rng.integers(0, 10, 200), rng.integers(0, 10, 200), rng.normal(size=200))]
    A = csr_from_triplets(10, trip)
    for r in range(10):
        cols = A.indices[A.indptr[r] : A.indptr[r + 1]]
        assert np.all(np.diff(cols) > 0)


def test_random_matvec_against_dense(rng):
    n = 50
    rows, cols = rng.integers(0, n, 400), rng.integers(0, n, 400)
    vals = rng.normal(size=400)
    dense = np.zeros((n, n))
    np.add.at(dense, (rows, cols), vals)
    A = csr_from_triplets(n, zip(rows, cols, vals))
    x = rng.normal(size=n)
    assert np.abs(A @ x - dense @ x).max() <= 1e-13 * max(1.0, np.abs(dense @ x).max())


def test_index_out_of_range():
    with pytest.raises(IndexError):
        csr_from_triplets(2, [(0, 2, 1.0)])
    with pytest.raises(IndexError):
        csr_from_triplets(2, [(-1, 0, 1.0)])


def test_identity_solve(rng):
    b = rng.normal(size=7)
    np.testing.assert_allclose(spd_solve(sp.identity(7, format="csr"), b), b, rtol=1e-12)


def test_two_by_two():
    A = csr_from_triplets(2, [(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)])
    np.testing.assert_allclose(spd_solve(A, [1.0, 2.0]), [1 / 11, 7 / 11], rtol=1e-10)


def test_zero_rhs():
    A = sp.identity(3, format="csr") * 2.0
    assert np.array_equal(spd_solve(A, np.zeros(3)), np.zeros(3))


def test_invalid_diagonal():
    A = csr_from_triplets(2, [(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0)])
    with pytest.raises(SolveError, match="diagonal"):
        spd_solve(A, [1.0, 1.0])
    B = csr_from_triplets(2, [(0, 0, np.nan), (1, 1, 1.0)])
    with pytest.raises(SolveError):
        spd_solve(B, [1.0, 1.0])


def test_non_convergence_carries_residual(rng):
    n = 200
    main = 2.0 + 1e-4 * np.arange(n)
    A = sp.diags([main, -np.ones(n - 1), -np.ones(n - 1)], [0, -1, 1], format="csr")
    with pytest.raises(SolveError) as exc:
        spd_solve(A, rng.normal(size=n), tol=1e-12, max_iter=3)
    assert exc.value.residual is not None and exc.value.residual > 1e-12
    assert "residual" in str(exc.value)


def test_rounding_floor_accepted(rng):
    # b = A x is tiny next to |A||x|, so a residual of 1e-10 relative to
    # b is below what double precision can resolve
    n = 30
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    A = sp.csr_matrix((Q * np.logspace(0, 7, n)) @ Q.T)
    A = (A + A.T) / 2
    x = Q[:, 0]
    b = A @ x
    assert rounding_floor(A, x, b) > 1e-9
    y = spd_solve(A, b)
    assert relative_residual(A, y, b) <= rounding_floor(A, y, b)
    assert np.linalg.norm(y - x) < 1e-8


def test_matvec_linear(rng):
    n = 30
    A = csr_from_triplets(n, zip(rng.integers(0, n, 100), rng.integers(0, n, 100), rng.normal(size=100)))
    x, y = rng.normal(size=n), rng.normal(size=n)
    a, b = 1.7, -0.3
    lhs = A @ (a * x + b * y)
    rhs = a * (A @ x) + b * (A @ y)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


def test_disk_level2_residual(disk_meshes):
    space = FESpace(disk_meshes[2])
    problem = schiela_disk()
    A = assemble_system(space, problem)
    b = assemble_load(space, problem)
    x = spd_solve(A, b, tol=1e-10)
    # recompute the residual without the library helper
    r = np.linalg.norm(A.toarray() @ x - b) / np.linalg.norm(b)
    assert r <= 1e-10 * 1.0001
    assert relative_residual(A, x, b) == pytest.approx(r, rel=1e-6)


def test_deterministic(disk_meshes):
    space = FESpace(disk_meshes[1])
    problem = schiela_disk()
    A = assemble_system(space, problem)
    b = assemble_load(space, problem)
    assert np.array_equal(spd_solve(A, b), spd_solve(A, b))
