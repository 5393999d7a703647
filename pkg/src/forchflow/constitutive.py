"""Momentum law polynomials and the implicitly defined conductivity.

A generalized Forchheimer momentum law relates velocity magnitude s to the
pressure-gradient response through g(s) = a0*s^alpha0 + ... + aN*s^alphaN
with alpha0 = 0.  Inverting s*g(s) = xi defines s(xi), and the nonlinear
conductivity K(xi) = 1/g(s(xi)) turns the momentum law into a Darcy-type
flux u = -K(|grad p|) grad p.  K is positive, decreasing, and degenerates
like xi^(-a) at infinity with a = alphaN/(1+alphaN).

Everything in this module is a pure function of its inputs and safe to call
from multiple threads.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels


class RootSolveError(RuntimeError):
    """Inversion of s*g(s) = xi failed to converge (should not happen for
    valid input); carries the offending xi and the last bracket."""

    def __init__(self, xi, bracket):
        self.xi = xi
        self.bracket = bracket
        super().__init__(f"velocity root solve failed at xi={xi!r}, bracket={bracket!r}")


@dataclass(frozen=True)
class ForchheimerPolynomial:
    """Momentum polynomial g(s) with exponent vector ``exponents`` (alpha,
    starting at 0, strictly increasing) and coefficient vector
    ``coefficients`` (first and last strictly positive, middle nonnegative).

    A single-term law (N = 0) is the Darcy degenerate case and is flagged
    by ``is_darcy``.
    """

    exponents: tuple
    coefficients: tuple

    def __post_init__(self):
        exps = tuple(float(e) for e in self.exponents)
        coefs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coefficients", coefs)
        if len(exps) != len(coefs):
            raise ValueError("exponent and coefficient vectors must have equal length")
        if len(exps) == 0:
            raise ValueError("at least one term required")
        if exps[0] != 0.0:
            raise ValueError("first exponent must be 0")
        if any(e2 <= e1 for e1, e2 in zip(exps, exps[1:])):
            raise ValueError("exponents must be strictly increasing")
        if coefs[0] <= 0.0:
            raise ValueError("a0 must be positive")
        if coefs[-1] <= 0.0:
            raise ValueError("aN must be positive")
        if any(c < 0.0 for c in coefs[1:-1]):
            raise ValueError("middle coefficients must be nonnegative")

    @classmethod
    def from_pairs(cls, pairs):
        """Build from the shared (exponent, coefficient) pair list format."""
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def to_pairs(self):
        return [[e, c] for e, c in zip(self.exponents, self.coefficients)]

    @cached_property
    def _alphas(self):
        return np.array(self.exponents, dtype=np.float64)

    @cached_property
    def _coeffs(self):
        return np.array(self.coefficients, dtype=np.float64)

    @property
    def n_terms(self):
        """The integer N of the class FP(N, alpha): term count minus one."""
        return len(self.exponents) - 1

    @property
    def is_darcy(self):
        return self.n_terms == 0

    @property
    def degree(self):
        return self.exponents[-1]

    @property
    def a(self):
        """Degeneracy exponent alphaN / (1 + alphaN); 0 for Darcy."""
        d = self.degree
        return d / (1.0 + d)

    @property
    def b(self):
        return self.a / (2.0 - self.a)

    @property
    def chi(self):
        cs = self.coefficients
        return max(max(cs), 1.0 / cs[0], 1.0 / cs[-1])

    def conductivity_arrays(self, xi):
        """Vectorized (s, K, xi*K') over an array of gradient magnitudes."""
        s, K, xikp = kernels.conductivity(self._alphas, self._coeffs, xi)
        bad = ~np.isfinite(np.atleast_1d(s))
        if bad.any():
            x = np.atleast_1d(np.asarray(xi, dtype=np.float64)).ravel()[bad.ravel()][0]
            raise RootSolveError(float(x), (0.0, float(x) / self.coefficients[0]))
        return s, K, xikp

    def h_arrays(self, s):
        """Vectorized closed-form H given precomputed velocity magnitudes."""
        return kernels.h_closed(self._alphas, self._coeffs, s)


@dataclass(frozen=True)
class DegeneracyExponents:
    """Derived exponents of a momentum law: a in (0,1), b = a/(2-a), and the
    coefficient-magnitude envelope chi >= 1.  Darcy yields a = b = 0."""

    a: float
    b: float
    chi: float

    @classmethod
    def of(cls, poly: ForchheimerPolynomial):
        return cls(a=poly.a, b=poly.b, chi=poly.chi)


@dataclass(frozen=True)
class KernelEvaluation:
    """Pointwise conductivity evaluation at gradient magnitude xi.

    ``xiKprime`` is the numerically stable product xi*K'(xi); ``Kprime``
    itself may be -inf at xi = 0 when the first positive exponent is
    sub-linear (the product form is what downstream consumers use).
    """

    xi: float
    s: float
    K: float
    Kprime: float
    xiKprime: float


# Physics-law presets: single-term, two-term, three-term and power laws.
def darcy(a0=1.0):
    return ForchheimerPolynomial((0.0,), (a0,))


def two_term(alpha=1.0, beta=1.0):
    return ForchheimerPolynomial((0.0, 1.0), (alpha, beta))


def three_term(alpha=1.0, beta=1.0, gamma=1.0):
    return ForchheimerPolynomial((0.0, 1.0, 2.0), (alpha, beta, gamma))


def power_law(alpha=1.0, gamma_m=1.0, m=2.0):
    if m <= 1.0:
        raise ValueError("power law needs m > 1")
    return ForchheimerPolynomial((0.0, m - 1.0), (alpha, gamma_m))


PRESETS = {
    "darcy": darcy,
    "two_term": two_term,
    "three_term": three_term,
    "power_law": power_law,
}


def eval_g(poly: ForchheimerPolynomial, s):
    """Evaluate g(s) for s >= 0 (scalar in, scalar out)."""
    s = float(s)
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    return float(kernels.g_eval(poly._alphas, poly._coeffs, s))


def solve_s(poly: ForchheimerPolynomial, xi):
    """Unique s >= 0 with s*g(s) = xi; relative residual <= 1e-12."""
    xi = float(xi)
    if xi < 0.0:
        raise ValueError("xi must be nonnegative")
    s = float(kernels.solve_s(poly._alphas, poly._coeffs, xi))
    if not np.isfinite(s):
        raise RootSolveError(xi, (0.0, xi / poly.coefficients[0]))
    return s


def eval_K(poly: ForchheimerPolynomial, xi):
    """Conductivity evaluation at xi >= 0, with K' via the implicit closed
    form (never finite differences)."""
    xi = float(xi)
    if xi < 0.0:
        raise ValueError("xi must be nonnegative")
    s, K, xikp = poly.conductivity_arrays(xi)
    s, K, xikp = (float(np.asarray(v).ravel()[0]) for v in (s, K, xikp))
    if xi > 0.0:
        kprime = xikp / xi
    else:
        kprime = _kprime_at_zero(poly)
    return KernelEvaluation(xi=xi, s=s, K=K, Kprime=kprime, xiKprime=xikp)


def _kprime_at_zero(poly):
    if poly.is_darcy:
        return 0.0
    a0 = poly.coefficients[0]
    alpha1 = poly.exponents[1]
    a1 = poly.coefficients[1]
    if alpha1 > 1.0 or a1 == 0.0:
        return 0.0
    if alpha1 == 1.0:
        return -a1 / a0**3
    return -np.inf


def eval_H(poly: ForchheimerPolynomial, xi, rtol=1e-9):
    """Energy density H(xi): quadrature of the defining integral (relative
    tolerance ``rtol``).  Satisfies K(xi)*xi^2 <= H(xi) <= 2*K(xi)*xi^2."""
    xi = float(xi)
    if xi < 0.0:
        raise ValueError("xi must be nonnegative")
    return float(kernels.h_quad(poly._alphas, poly._coeffs, xi, rtol))


def flux_jacobian(poly: ForchheimerPolynomial, y):
    """Derivative tensor of the flux map y -> K(|y|) y.

    Returns K(xi)*I + (xi*K'(xi)) * (yhat outer yhat); its smallest
    eigenvalue is at least (1-a)*K(|y|) > 0.  For |y| below 1e-12 the
    isotropic limit K(0)*I is returned.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    xi = float(np.sqrt(np.sum(y * y)))
    if xi < 1e-12:
        _, K, _ = poly.conductivity_arrays(0.0)
        return float(K) * np.eye(n)
    _, K, xikp = poly.conductivity_arrays(xi)
    yhat = y / xi
    return float(K) * np.eye(n) + float(xikp) * np.outer(yhat, yhat)


@dataclass(frozen=True)
class DegreeCondition:
    satisfies_dc: bool
    satisfies_sdc: bool


def degree_condition(poly: ForchheimerPolynomial, n: int) -> DegreeCondition:
    """Dimension-dependent caps on deg(g): the plain condition requires
    deg(g) <= 4/(n-2), the strict one deg(g) < 4/(n-2); both hold vacuously
    for n <= 2."""
    if n < 1:
        raise ValueError("spatial dimension must be >= 1")
    if n <= 2:
        return DegreeCondition(True, True)
    cap = 4.0 / (n - 2.0)
    d = poly.degree
    return DegreeCondition(d <= cap, d < cap)


def monotonicity_gap(poly1: ForchheimerPolynomial, poly2: ForchheimerPolynomial, y, yp):
    """Both sides of the (perturbed) monotonicity inequality for the flux map.

    lhs  = (K(|y|, a1) y - K(|y'|, a2) y') . (y - y')
    rhs_coercive = (1-a) * K(|y| v |y'|, a1 v a2) * |y - y'|^2
    rhs_perturb  = N * max(chi1, chi2) * |a1 - a2|_inf
                   * K(|y| v |y'|, a1 ^ a2) * (|y| v |y'|) * |y - y'|

    With poly1 == poly2 the perturbation term vanishes and
    lhs >= rhs_coercive holds.
    """
    if poly1.exponents != poly2.exponents:
        raise ValueError("momentum laws must share the exponent vector")
    y = np.asarray(y, dtype=np.float64)
    yp = np.asarray(yp, dtype=np.float64)
    xi1 = float(np.sqrt(np.sum(y * y)))
    xi2 = float(np.sqrt(np.sum(yp * yp)))
    ximax = max(xi1, xi2)

    _, K1, _ = poly1.conductivity_arrays(xi1)
    _, K2, _ = poly2.conductivity_arrays(xi2)
    diff = y - yp
    lhs = float(np.dot(float(K1) * y - float(K2) * yp, diff))

    cmax = tuple(max(c1, c2) for c1, c2 in zip(poly1.coefficients, poly2.coefficients))
    cmin = tuple(min(c1, c2) for c1, c2 in zip(poly1.coefficients, poly2.coefficients))
    pmax = ForchheimerPolynomial(poly1.exponents, cmax)
    pmin = ForchheimerPolynomial(poly1.exponents, cmin)
    a = pmax.a
    _, Kvee, _ = pmax.conductivity_arrays(ximax)
    dsq = float(np.sum(diff * diff))
    rhs_coercive = (1.0 - a) * float(Kvee) * dsq

    da = max(abs(c1 - c2) for c1, c2 in zip(poly1.coefficients, poly2.coefficients))
    if da == 0.0:
        rhs_perturb = 0.0
    else:
        _, Kwedge, _ = pmin.conductivity_arrays(ximax)
        rhs_perturb = (
            poly1.n_terms
            * max(poly1.chi, poly2.chi)
            * da
            * float(Kwedge)
            * ximax
            * np.sqrt(dsq)
        )
    return {"lhs": lhs, "rhs_coercive": rhs_coercive, "rhs_perturb": rhs_perturb}
