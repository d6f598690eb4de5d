import math

import numpy as np
import pytest

from morleyoc.problems import ProblemError, ProblemSpec, builtin_problem, constant, schiela_disk


@pytest.fixture
def disk():
    return builtin_problem("schiela-disk")


def sample_disk(rng, n, rmin=0.0, rmax=2.0):
    r = np.sqrt(rng.uniform(rmin**2, rmax**2, n))
    t = rng.uniform(0, 2 * np.pi, n)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def test_defaults(disk):
    assert disk.beta == 1.0 and disk.g_max == 1.0 and disk.radius == 2.0
    x = np.zeros((3, 2))
    assert np.all(disk.u_a(x) == -2.0) and np.all(disk.u_b(x) == 2.0)
    # the desired state is the exact state
    pts = np.array([[0.3, 0.1], [1.5, -0.2]])
    np.testing.assert_array_equal(disk.y_d(pts), disk.exact.y(pts))


def test_state_equation_both_regions(disk, rng):
    for lo, hi in [(0.05, 0.95), (1.05, 2.0)]:
        x = sample_disk(rng, 50, lo, hi)
        lap = np.trace(disk.exact.hess(x), axis1=-2, axis2=-1)
        np.testing.assert_allclose(-lap, disk.exact.u(x) + disk.f(x), atol=1e-13)


def test_values(disk):
    e = disk.exact
    circle = np.array([[2.0, 0.0], [0.0, -2.0], [math.sqrt(2), math.sqrt(2)]])
    np.testing.assert_allclose(e.y(circle), 0.0, atol=1e-15)
    assert e.y(np.zeros((1, 2)))[0] == pytest.approx(0.25 + 0.5 * math.log(2))
    assert e.u(np.array([[0.5, 0.0], [1.5, 0.0]])).tolist() == [-1.0, 0.0]
    assert disk.f(np.array([[0.5, 0.0], [1.5, 0.0]])).tolist() == [2.0, 0.0]


def test_c1_across_interface(disk):
    e = disk.exact
    theta = np.linspace(0, 2 * np.pi, 7)
    inner = 0.999999 * np.column_stack([np.cos(theta), np.sin(theta)])
    outer = 1.000001 * np.column_stack([np.cos(theta), np.sin(theta)])
    np.testing.assert_allclose(e.y(inner), e.y(outer), atol=1e-6)
    np.testing.assert_allclose(e.grad(inner), e.grad(outer), atol=1e-5)


def test_gradient_bound(disk, rng):
    x = sample_disk(rng, 5000)
    g = np.linalg.norm(disk.exact.grad(x), axis=1)
    assert g.max() <= 0.5 + 1e-15
    r = np.linspace(0.0, 2.0, 20001)
    pts = np.column_stack([r, np.zeros_like(r)])
    g = np.linalg.norm(disk.exact.grad(pts), axis=1)
    assert g.max() == pytest.approx(0.5, abs=1e-12)
    assert r[np.argmax(g)] == pytest.approx(1.0, abs=1e-3)


def test_derivatives_by_finite_differences(disk, rng):
    e = disk.exact
    x = np.concatenate([sample_disk(rng, 20, 0.1, 0.9), sample_disk(rng, 20, 1.1, 1.9)])
    eps = 1e-6
    for d in range(2):
        step = np.zeros(2)
        step[d] = eps
        fd = (e.y(x + step) - e.y(x - step)) / (2 * eps)
        np.testing.assert_allclose(fd, e.grad(x)[:, d], atol=1e-8)
        fdg = (e.grad(x + step) - e.grad(x - step)) / (2 * eps)
        np.testing.assert_allclose(fdg, e.hess(x)[:, d, :], atol=1e-7)


def test_unknown_problem_lists_registered():
    with pytest.raises(ProblemError, match="schiela-disk"):
        builtin_problem("nope")


def test_options_and_validation():
    p = schiela_disk(g_max=0.5)
    assert p.g_max == 0.5
    assert p.with_options(beta=2.0, g_max=None).beta == 2.0
    with pytest.raises(ProblemError):
        schiela_disk(beta=0.0)
    with pytest.raises(ProblemError):
        schiela_disk(g_max=-1.0)
    bad = ProblemSpec(1.0, constant(0.0), constant(0.0), constant(1.0), constant(1.0))
    with pytest.raises(ProblemError, match="u_a < u_b"):
        bad.check_bounds(np.zeros((2, 2)))
