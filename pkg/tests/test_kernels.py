"""Backend parity and linear-solver correctness for the hot kernels."""

import numpy as np
import pytest

from forchflow import _accel
from forchflow import _kernels_numpy as knp

if _accel.NUMBA_AVAILABLE:
    from forchflow import _kernels_numba as knb

    BACKENDS = [knp, knb]
else:
    BACKENDS = [knp]

ALPHAS = np.array([0.0, 0.5, 1.0, 3.0])
COEFFS = np.array([0.7, 1.3, 0.4, 2.1])


@pytest.fixture(scope="module")
def xi_samples():
    rng = np.random.default_rng(11)
    return np.concatenate([[0.0, 1e-300, 1e300], 10.0 ** rng.uniform(-10, 10, 400)])


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND_NAME)
def test_solve_residual_contract(impl, xi_samples):
    s = impl.solve_s(ALPHAS, COEFFS, xi_samples)
    g = impl.g_eval(ALPHAS, COEFFS, s)
    assert np.all(np.abs(s * g - xi_samples) <= 1e-12 * np.maximum(xi_samples, 1.0))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="numba unavailable")
def test_backend_parity(xi_samples):
    out_np = knp.conductivity(ALPHAS, COEFFS, xi_samples)
    out_nb = knb.conductivity(ALPHAS, COEFFS, xi_samples)
    for a, b in zip(out_np, out_nb):
        assert np.allclose(a, b, rtol=1e-13, atol=1e-300, equal_nan=True)
    h_np = knp.h_quad(ALPHAS, COEFFS, xi_samples[:80], 1e-9)
    h_nb = knb.h_quad(ALPHAS, COEFFS, xi_samples[:80], 1e-9)
    assert np.allclose(h_np, h_nb, rtol=1e-12)
    hc_np = knp.h_closed(ALPHAS, COEFFS, out_np[0])
    hc_nb = knb.h_closed(ALPHAS, COEFFS, out_nb[0])
    assert np.allclose(hc_np, hc_nb, rtol=1e-13)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND_NAME)
def test_thomas_against_dense(impl):
    rng = np.random.default_rng(5)
    n = 30
    lower = rng.uniform(-1.0, 0.0, n - 1)
    upper = rng.uniform(-1.0, 0.0, n - 1)
    diag = rng.uniform(2.5, 4.0, n)
    rhs = rng.standard_normal(n)
    A = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
    x = impl.thomas_solve(lower, diag, upper, rhs)
    assert np.allclose(A @ x, rhs, atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND_NAME)
def test_cg_against_dense(impl):
    rng = np.random.default_rng(6)
    nx, ny = 6, 5
    wx = rng.uniform(0.5, 2.0, (nx - 1, ny))
    wy = rng.uniform(0.5, 2.0, (nx, ny - 1))
    rhs = rng.standard_normal((nx, ny))
    dcell = 2.0

    # dense assembly of the same SPD operator
    n = nx * ny
    A = dcell * np.eye(n)

    def idx(i, j):
        return i * ny + j

    for i in range(nx - 1):
        for j in range(ny):
            a, b = idx(i, j), idx(i + 1, j)
            A[a, a] += wx[i, j]
            A[b, b] += wx[i, j]
            A[a, b] -= wx[i, j]
            A[b, a] -= wx[i, j]
    for i in range(nx):
        for j in range(ny - 1):
            a, b = idx(i, j), idx(i, j + 1)
            A[a, a] += wy[i, j]
            A[b, b] += wy[i, j]
            A[a, b] -= wy[i, j]
            A[b, a] -= wy[i, j]

    x, iters = impl.cg_solve(dcell, wx, wy, rhs, 1e-13, 2000)
    expect = np.linalg.solve(A, rhs.ravel()).reshape(nx, ny)
    assert iters > 0
    assert np.allclose(x, expect, atol=1e-10)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND_NAME)
def test_cg_zero_rhs(impl):
    x, iters = impl.cg_solve(1.0, np.ones((1, 2)), np.ones((2, 1)), np.zeros((2, 2)), 1e-12, 100)
    assert iters == 0 and np.all(x == 0.0)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND_NAME)
def test_h_quad_meets_tolerance_against_closed_form(impl):
    rng = np.random.default_rng(9)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        alphas = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 4.0, n))])
        coeffs = rng.uniform(0.1, 10.0, n + 1)
        xi = np.array([10.0 ** rng.uniform(-6, 8)])
        s = impl.solve_s(alphas, coeffs, xi)
        closed = impl.h_closed(alphas, coeffs, s)
        quad = impl.h_quad(alphas, coeffs, xi, 1e-9)
        assert np.allclose(quad, closed, rtol=1e-8)
