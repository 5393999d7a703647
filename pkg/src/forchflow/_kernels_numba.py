"""Numba @njit loop implementations of the hot numeric kernels.

Same contracts as ``_kernels_numpy``; selected by default when numba is
importable (see ``_accel``).  All kernels are nogil so independent runs can
be dispatched on threads.
"""

import numpy as np
from numba import njit

BACKEND_NAME = "numba"

_EPS = float(np.finfo(np.float64).eps)


@njit(cache=True, nogil=True)
def _pow_term(s, a):
    # the common laws carry small integer exponents; skip the libm pow
    if a == 1.0:
        return s
    if a == 2.0:
        return s * s
    if a == 3.0:
        return s * s * s
    return s**a


@njit(cache=True, nogil=True)
def _g_and_u_scalar(alphas, coeffs, s):
    # g(s) and u = s*g'(s) share the per-term powers; u stays finite at
    # s = 0 even for sub-linear first exponents
    g = 0.0
    u = 0.0
    for j in range(alphas.shape[0]):
        a = alphas[j]
        if a == 0.0:
            g += coeffs[j]
        elif s > 0.0:
            term = coeffs[j] * _pow_term(s, a)
            g += term
            u += a * term
    return g, u


@njit(cache=True, nogil=True)
def _g_scalar(alphas, coeffs, s):
    g, _ = _g_and_u_scalar(alphas, coeffs, s)
    return g


@njit(cache=True, nogil=True)
def _u_scalar(alphas, coeffs, s):
    _, u = _g_and_u_scalar(alphas, coeffs, s)
    return u


@njit(cache=True, nogil=True)
def _solve_scalar(alphas, coeffs, x):
    if x <= 0.0:
        return 0.0
    lo = 0.0
    # tighter of the two valid upper brackets (via the a0 and aN terms)
    hi = min(x / coeffs[0], (x / coeffs[-1]) ** (1.0 / (1.0 + alphas[-1])))
    cur = hi
    tol = 8.0 * _EPS * x
    for _ in range(200):
        g, u = _g_and_u_scalar(alphas, coeffs, cur)
        resid = cur * g - x
        if resid < 0.0:
            lo = cur
        elif resid > 0.0:
            hi = cur
        if abs(resid) <= tol or (hi - lo) <= 4.0 * _EPS * hi:
            return cur
        nxt = cur - resid / (g + u)
        if not np.isfinite(nxt) or nxt <= lo or nxt >= hi:
            nxt = 0.5 * (lo + hi)
        cur = nxt
    return np.nan


@njit(cache=True, nogil=True)
def _g_eval_flat(alphas, coeffs, s, out):
    for i in range(s.shape[0]):
        out[i] = _g_scalar(alphas, coeffs, s[i])


@njit(cache=True, nogil=True)
def _u_eval_flat(alphas, coeffs, s, out):
    for i in range(s.shape[0]):
        out[i] = _u_scalar(alphas, coeffs, s[i])


@njit(cache=True, nogil=True)
def _solve_flat(alphas, coeffs, xi, out):
    for i in range(xi.shape[0]):
        out[i] = _solve_scalar(alphas, coeffs, xi[i])


@njit(cache=True, nogil=True)
def _conductivity_flat(alphas, coeffs, xi, s, K, xikp):
    for i in range(xi.shape[0]):
        sv = _solve_scalar(alphas, coeffs, xi[i])
        g, u = _g_and_u_scalar(alphas, coeffs, sv)
        s[i] = sv
        K[i] = 1.0 / g
        xikp[i] = -u / (g * (g + u))


@njit(cache=True, nogil=True)
def _h_closed_flat(alphas, coeffs, s, out):
    for i in range(s.shape[0]):
        tot = 0.0
        sv = s[i]
        for j in range(alphas.shape[0]):
            a = alphas[j]
            tot += (2.0 * coeffs[j] * (1.0 + a) / (2.0 + a)) * _pow_term(sv, 2.0 + a)
        out[i] = tot


@njit(cache=True, nogil=True)
def _h_quad_scalar(alphas, coeffs, x, rtol):
    # split at v = 1; degenerate tail integrated in log space
    if x <= 0.0:
        return 0.0
    v0 = min(x, 1.0)
    lx = np.log(x) if x > 1.0 else 0.0
    prev = 0.0
    have = False
    n = 8
    while n <= (1 << 16):
        h = 1.0 / n
        tot = 0.0
        tot_tail = 0.0
        for i in range(n + 1):
            if i == 0 or i == n:
                wgt = 1.0
            elif i % 2 == 1:
                wgt = 4.0
            else:
                wgt = 2.0
            tau = i * h
            v = v0 * tau
            sv = _solve_scalar(alphas, coeffs, v)
            tot += wgt * 2.0 * v / _g_scalar(alphas, coeffs, sv)
            if x > 1.0:
                vt = np.exp(lx * tau)
                st = _solve_scalar(alphas, coeffs, vt)
                tot_tail += wgt * 2.0 * vt * vt / _g_scalar(alphas, coeffs, st)
        S = tot * v0 * h / 3.0 + tot_tail * lx * h / 3.0
        if have and abs(S - prev) <= rtol * abs(S):
            return S
        prev = S
        have = True
        n *= 2
    return prev


@njit(cache=True, nogil=True)
def _h_quad_flat(alphas, coeffs, xi, rtol, out):
    for i in range(xi.shape[0]):
        out[i] = _h_quad_scalar(alphas, coeffs, xi[i], rtol)


def _flat_call(fn, alphas, coeffs, arr, *extra):
    arr = np.asarray(arr, dtype=np.float64)
    shape = arr.shape
    flat = np.ascontiguousarray(arr).ravel()
    out = np.empty(flat.size)
    fn(alphas, coeffs, flat, *extra, out)
    return out.reshape(shape)


def g_eval(alphas, coeffs, s):
    return _flat_call(_g_eval_flat, alphas, coeffs, s)


def sgprime_eval(alphas, coeffs, s):
    return _flat_call(_u_eval_flat, alphas, coeffs, s)


def solve_s(alphas, coeffs, xi):
    return _flat_call(_solve_flat, alphas, coeffs, xi)


def conductivity(alphas, coeffs, xi):
    arr = np.asarray(xi, dtype=np.float64)
    shape = arr.shape
    flat = np.ascontiguousarray(arr).ravel()
    s = np.empty(flat.size)
    K = np.empty(flat.size)
    xikp = np.empty(flat.size)
    _conductivity_flat(alphas, coeffs, flat, s, K, xikp)
    return s.reshape(shape), K.reshape(shape), xikp.reshape(shape)


def h_closed(alphas, coeffs, s):
    return _flat_call(_h_closed_flat, alphas, coeffs, s)


def h_quad(alphas, coeffs, xi, rtol=1e-9):
    return _flat_call(_h_quad_flat, alphas, coeffs, xi, rtol)


@njit(cache=True, nogil=True)
def thomas_solve(lower, diag, upper, rhs):
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0] if n > 1 else 0.0
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / m
        else:
            cp[i] = 0.0
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / m
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


@njit(cache=True, nogil=True)
def _apply_2d(dcell, wx, wy, x, out):
    nx, ny = x.shape
    for i in range(nx):
        for j in range(ny):
            out[i, j] = dcell * x[i, j]
    for i in range(nx - 1):
        for j in range(ny):
            t = wx[i, j] * (x[i + 1, j] - x[i, j])
            out[i + 1, j] += t
            out[i, j] -= t
    for i in range(nx):
        for j in range(ny - 1):
            t = wy[i, j] * (x[i, j + 1] - x[i, j])
            out[i, j + 1] += t
            out[i, j] -= t


@njit(cache=True, nogil=True)
def cg_solve(dcell, wx, wy, rhs, tol=1e-12, maxiter=10000):
    nx, ny = rhs.shape
    mdiag = np.full((nx, ny), dcell)
    for i in range(nx - 1):
        for j in range(ny):
            mdiag[i, j] += wx[i, j]
            mdiag[i + 1, j] += wx[i, j]
    for i in range(nx):
        for j in range(ny - 1):
            mdiag[i, j] += wy[i, j]
            mdiag[i, j + 1] += wy[i, j]

    x = np.zeros((nx, ny))
    r = rhs.copy()
    bnorm = 0.0
    for i in range(nx):
        for j in range(ny):
            bnorm += rhs[i, j] * rhs[i, j]
    bnorm = np.sqrt(bnorm)
    if bnorm == 0.0:
        return x, 0
    z = r / mdiag
    p = z.copy()
    rz = np.sum(r * z)
    ap = np.empty((nx, ny))
    it = 0
    while it < maxiter:
        rnorm = np.sqrt(np.sum(r * r))
        if rnorm <= tol * bnorm:
            break
        _apply_2d(dcell, wx, wy, p, ap)
        alpha = rz / np.sum(p * ap)
        for i in range(nx):
            for j in range(ny):
                x[i, j] += alpha * p[i, j]
                r[i, j] -= alpha * ap[i, j]
        z = r / mdiag
        rz_new = np.sum(r * z)
        beta = rz_new / rz
        for i in range(nx):
            for j in range(ny):
                p[i, j] = z[i, j] + beta * p[i, j]
        rz = rz_new
        it += 1
    return x, it
