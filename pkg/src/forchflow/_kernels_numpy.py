"""Vectorized numpy implementations of the hot numeric kernels.

This is the fallback path used when numba is unavailable or disabled via
``FORCHFLOW_NUMBA=0``.  The numba twin in ``_kernels_numba`` implements the
same contracts with explicit loops; ``tests/test_kernels.py`` checks the two
against each other.

Conventions: momentum polynomials are passed as a pair of float64 arrays
``(alphas, coeffs)`` with ``alphas[0] == 0`` and alphas strictly increasing.
Powers use the convention ``0**0 == 1`` and ``0**positive == 0``.
"""

import numpy as np

BACKEND_NAME = "numpy"

_EPS = np.finfo(np.float64).eps


def _pow_term(s, a):
    # the common laws carry small integer exponents; skip the libm pow
    if a == 1.0:
        return s
    if a == 2.0:
        return s * s
    if a == 3.0:
        return s * s * s
    return s**a


def _g_u_eval(alphas, coeffs, s):
    """g(s) and u = s*g'(s) sharing the per-term powers."""
    g = np.zeros_like(s)
    u = np.zeros_like(s)
    for a, c in zip(alphas, coeffs):
        if a == 0.0:
            g += c
        else:
            term = c * _pow_term(s, a)
            g += term
            u += a * term
    return g, u


def g_eval(alphas, coeffs, s):
    """Momentum polynomial g(s) = sum_j coeffs[j] * s**alphas[j]."""
    s = np.asarray(s, dtype=np.float64)
    with np.errstate(over="ignore"):
        return _g_u_eval(alphas, coeffs, s)[0]


def sgprime_eval(alphas, coeffs, s):
    """The product s * g'(s), finite for s -> 0 even when g'(0) diverges."""
    s = np.asarray(s, dtype=np.float64)
    with np.errstate(over="ignore"):
        return _g_u_eval(alphas, coeffs, s)[1]


def solve_s(alphas, coeffs, xi):
    """Invert s*g(s) = xi elementwise (bisection-safeguarded Newton).

    Converges to the rounding floor of the residual, far inside the
    1e-12 relative contract.  Returns NaN for entries that fail to
    converge within the iteration cap (does not happen for valid input).
    """
    xi_arr = np.asarray(xi, dtype=np.float64)
    shape = xi_arr.shape
    x = xi_arr.ravel()
    s_out = np.zeros_like(x)
    pos = x > 0.0
    if not pos.any():
        return s_out.reshape(shape)

    xv = x[pos]
    lo = np.zeros_like(xv)
    # both xi/a0 and (xi/aN)^(1/(1+alphaN)) bracket the root from above
    # (s*g(s) >= a0*s and >= aN*s^(1+alphaN)); take the tighter one
    hi = np.minimum(xv / coeffs[0], (xv / coeffs[-1]) ** (1.0 / (1.0 + alphas[-1])))
    cur = hi.copy()
    tol = 8.0 * _EPS * xv
    done = np.zeros(xv.shape, dtype=bool)

    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(200):
            g, u = _g_u_eval(alphas, coeffs, cur)
            resid = cur * g - xv
            lo = np.where(resid < 0.0, cur, lo)
            hi = np.where(resid > 0.0, cur, hi)
            done |= np.abs(resid) <= tol
            done |= (hi - lo) <= 4.0 * _EPS * hi
            if done.all():
                break
            step = resid / (g + u)
            nxt = cur - step
            bad = ~np.isfinite(nxt) | (nxt <= lo) | (nxt >= hi)
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            cur = np.where(done, cur, nxt)

    cur = np.where(done, cur, np.nan)
    s_out[pos] = cur
    return s_out.reshape(shape)


def conductivity(alphas, coeffs, xi):
    """Return (s, K, xi*K') at each xi.

    K = 1/g(s(xi)); the derivative is consumed in the stable product form
    xi*K'(xi) = -u / (g*(g+u)) with u = s*g'(s).
    """
    xi_arr = np.asarray(xi, dtype=np.float64)
    s = solve_s(alphas, coeffs, xi_arr)
    with np.errstate(over="ignore"):
        g, u = _g_u_eval(alphas, coeffs, s)
        K = 1.0 / g
        xikp = -u / (g * (g + u))
    return s, K, xikp


def h_closed(alphas, coeffs, s):
    """Closed form of the energy density H in terms of s = s(xi).

    Substituting xi = s*g(s) into the defining integral of H gives
    H = sum_j 2*c_j*(1+alpha_j)/(2+alpha_j) * s**(2+alpha_j), exact for
    every momentum polynomial.  Used on the bulk field path; the
    quadrature twin below is cross-checked against it.
    """
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    with np.errstate(over="ignore"):
        for a, c in zip(alphas, coeffs):
            out += (2.0 * c * (1.0 + a) / (2.0 + a)) * _pow_term(s, 2.0 + a)
    return out


def _simpson_weights(n):
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def h_quad(alphas, coeffs, xi, rtol=1e-9):
    """Energy density H(xi) by Simpson quadrature of 2*v*K(v) on [0, xi].

    The integration variable is v = sqrt of the defining integral's dummy
    variable, which removes the endpoint weight.  The range is split at
    v = 1 with the degenerate tail integrated in log space, where the
    conductivity varies on a uniform relative scale; panels are doubled
    until the total changes by less than rtol.
    """
    xi_arr = np.asarray(xi, dtype=np.float64)
    shape = xi_arr.shape
    x = xi_arr.ravel()
    out = np.zeros_like(x)
    active_idx = np.nonzero(x > 0.0)[0]
    if active_idx.size == 0:
        return out.reshape(shape)

    prev = None
    n = 8
    with np.errstate(over="ignore", invalid="ignore"):
        while active_idx.size and n <= 1 << 16:
            xv = x[active_idx]
            v0 = np.minimum(xv, 1.0)
            tau = np.linspace(0.0, 1.0, n + 1)
            w = _simpson_weights(n)
            nodes = v0[:, None] * tau[None, :]
            _, K, _ = conductivity(alphas, coeffs, nodes.ravel())
            f = 2.0 * nodes * K.reshape(nodes.shape)
            S = (v0 / (3.0 * n)) * (f @ w)
            tail = xv > 1.0
            if tail.any():
                lx = np.log(xv[tail])
                wn = lx[:, None] * tau[None, :]
                vn = np.exp(wn)
                _, Kt, _ = conductivity(alphas, coeffs, vn.ravel())
                ft = 2.0 * vn * vn * Kt.reshape(vn.shape)
                S[tail] += (lx / (3.0 * n)) * (ft @ w)
            if prev is not None:
                conv = np.abs(S - prev) <= rtol * np.abs(S)
                out[active_idx[conv]] = S[conv]
                keep = ~conv
                active_idx = active_idx[keep]
                prev = S[keep]
            else:
                prev = S
            n *= 2
    out[active_idx] = prev if prev is not None else 0.0  # accept last refinement
    return out.reshape(shape)


def thomas_solve(lower, diag, upper, rhs):
    """Direct tridiagonal solve (Thomas algorithm)."""
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0] if n > 1 else 0.0
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i - 1] * cp[i - 1]
        cp[i] = upper[i] / m if i < n - 1 else 0.0
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / m
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def _apply_2d(dcell, wx, wy, x):
    y = dcell * x
    if wx.size:
        t = wx * (x[1:, :] - x[:-1, :])
        y[1:, :] += t
        y[:-1, :] -= t
    if wy.size:
        t = wy * (x[:, 1:] - x[:, :-1])
        y[:, 1:] += t
        y[:, :-1] -= t
    return y


def cg_solve(dcell, wx, wy, rhs, tol=1e-12, maxiter=10000):
    """Jacobi-preconditioned CG for the SPD 5-point system.

    The operator is x -> dcell*x plus face-weighted difference couplings
    (wx on faces between x-neighbors, wy between y-neighbors).  Returns
    (solution, iterations).
    """
    mdiag = dcell * np.ones_like(rhs)
    if wx.size:
        mdiag[1:, :] += wx
        mdiag[:-1, :] += wx
    if wy.size:
        mdiag[:, 1:] += wy
        mdiag[:, :-1] += wy

    x = np.zeros_like(rhs)
    r = rhs.copy()
    bnorm = np.sqrt(np.sum(rhs * rhs))
    if bnorm == 0.0:
        return x, 0
    z = r / mdiag
    p = z.copy()
    rz = np.sum(r * z)
    it = 0
    while it < maxiter:
        rnorm = np.sqrt(np.sum(r * r))
        if rnorm <= tol * bnorm:
            break
        ap = _apply_2d(dcell, wx, wy, p)
        alpha = rz / np.sum(p * ap)
        x += alpha * p
        r -= alpha * ap
        z = r / mdiag
        rz_new = np.sum(r * z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    return x, it
