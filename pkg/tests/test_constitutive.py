"""Conductivity kernel: closed-form oracles and the structural inequalities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import forchflow as ff
from forchflow.constitutive import DegeneracyExponents

from conftest import random_poly


def quadratic_root_s(xi):
    # independent oracle for g(s) = 1 + s: s*(1+s) = xi has root
    # s = (-1 + sqrt(1+4 xi))/2
    return 0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * xi))


class TestEvalG:
    def test_darcy_constant(self):
        assert ff.eval_g(ff.darcy(1.0), 5.0) == 1.0

    def test_two_term(self):
        assert ff.eval_g(ff.two_term(), 1.0) == 2.0

    def test_three_term(self):
        assert ff.eval_g(ff.three_term(), 2.0) == 7.0

    def test_negative_s_rejected(self):
        with pytest.raises(ValueError):
            ff.eval_g(ff.two_term(), -1.0)

    def test_zero_s_sublinear_exponent(self):
        p = ff.ForchheimerPolynomial((0.0, 0.5), (1.0, 2.0))
        assert ff.eval_g(p, 0.0) == 1.0


class TestSolveS:
    def test_two_term_quadratic_oracle(self):
        p = ff.two_term()
        assert ff.solve_s(p, 2.0) == pytest.approx(quadratic_root_s(2.0), abs=1e-14)
        assert ff.solve_s(p, 2.0) == pytest.approx(1.0, abs=1e-14)

    def test_zero(self):
        assert ff.solve_s(random_poly(np.random.default_rng(3)), 0.0) == 0.0

    def test_cubic_exact_point(self):
        p = ff.ForchheimerPolynomial((0.0, 2.0), (1.0, 1.0))  # g = 1 + s^2
        assert ff.solve_s(p, 10.0) == pytest.approx(2.0, abs=1e-13)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ff.solve_s(ff.two_term(), -0.5)

    @given(xi=st.floats(min_value=0.0, max_value=1e12),
           a1=st.floats(min_value=0.1, max_value=5.0),
           alpha=st.floats(min_value=0.1, max_value=4.0))
    @settings(max_examples=200, deadline=None)
    def test_residual_contract(self, xi, a1, alpha):
        p = ff.ForchheimerPolynomial((0.0, alpha), (1.0, a1))
        s = ff.solve_s(p, xi)
        assert abs(s * ff.eval_g(p, s) - xi) <= 1e-12 * max(xi, 1.0)


class TestEvalK:
    def test_darcy(self):
        for xi in (0.0, 1.0, 100.0):
            ev = ff.eval_K(ff.darcy(2.0), xi)
            assert ev.K == pytest.approx(0.5, abs=1e-15)
            assert ev.Kprime == 0.0
            assert ev.xiKprime == 0.0

    def test_two_term_closed_form(self):
        ev = ff.eval_K(ff.two_term(), 2.0)
        assert ev.s == pytest.approx(1.0, abs=1e-14)
        assert ev.K == pytest.approx(0.5, abs=1e-14)
        # xi K' = -u/(g(g+u)) with u = s g'(s) = 1, g = 2
        assert ev.xiKprime == pytest.approx(-1.0 / 6.0, abs=1e-14)

    def test_large_xi_degeneracy_bracket(self):
        # for g = 1+s: K(xi) ~ xi^(-1/2); the compensated ratio stays in a
        # fixed positive bracket
        p = ff.two_term()
        for xi in (1e3, 1e6):
            ev = ff.eval_K(p, xi)
            ratio = ev.K * math.sqrt(1.0 + xi)
            assert 0.5 <= ratio <= 2.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ff.eval_K(ff.two_term(), -1.0)

    def test_kprime_finite_difference_order(self):
        # central differences of K converge to Kprime at second order;
        # points chosen away from roundoff-dominated regimes
        # points where K''' is strong enough that the h^2 term stays above
        # the subtraction rounding floor at h = 1e-5
        cases = [
            (ff.two_term(), 0.3),
            (ff.two_term(), 0.7),
            (ff.three_term(), 0.5),
            (ff.ForchheimerPolynomial((0.0, 1.5), (0.8, 2.0)), 0.5),
            (ff.power_law(1.0, 1.0, 3.0), 0.3),
        ]
        for poly, xi in cases:
            errs = []
            for h in (1e-4, 1e-5):
                fd = (ff.eval_K(poly, xi + h).K - ff.eval_K(poly, xi - h).K) / (2.0 * h)
                errs.append(abs(fd - ff.eval_K(poly, xi).Kprime))
            order = math.log10(errs[0] / errs[1])
            assert order >= 1.8, (poly, xi, errs)

    def test_kernel_invariants_random(self, rng):
        for _ in range(300):
            p = random_poly(rng)
            xi = 10.0 ** rng.uniform(-6, 6)
            ev = ff.eval_K(p, xi)
            a = p.a
            assert abs(ev.s * ff.eval_g(p, ev.s) - xi) <= 1e-12 * max(xi, 1.0)
            assert 0.0 < ev.K <= 1.0 / p.coefficients[0] * (1 + 1e-14)
            assert -a * ev.K * (1 + 1e-12) <= ev.xiKprime <= 0.0


class TestEvalH:
    def test_darcy_closed_form(self):
        p = ff.darcy(2.0)
        assert ff.eval_H(p, 3.0) == pytest.approx(9.0 / 2.0, rel=1e-8)

    def test_zero(self):
        assert ff.eval_H(ff.two_term(), 0.0) == 0.0

    def test_sandwich_two_term(self):
        p = ff.two_term()
        h = ff.eval_H(p, 2.0)
        K = ff.eval_K(p, 2.0).K
        assert K * 4.0 <= h <= 2.0 * K * 4.0
        assert h == pytest.approx(7.0 / 3.0, rel=1e-8)  # s^2 + (4/3) s^3 at s = 1

    def test_quadrature_matches_closed_form(self, rng):
        for _ in range(60):
            p = random_poly(rng)
            xi = 10.0 ** rng.uniform(-4, 5)
            s = ff.solve_s(p, xi)
            closed = float(p.h_arrays(np.array([s]))[0])
            assert ff.eval_H(p, xi) == pytest.approx(closed, rel=1e-8)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            ff.eval_H(ff.two_term(), -2.0)


class TestFluxJacobian:
    def test_darcy_isotropic(self):
        J = ff.flux_jacobian(ff.darcy(2.0), np.array([3.0, -4.0]))
        assert np.allclose(J, 0.5 * np.eye(2))

    def test_two_term_axis_vector(self):
        J = ff.flux_jacobian(ff.two_term(), np.array([2.0, 0.0]))
        evals = np.sort(np.linalg.eigvalsh(J))
        assert evals[0] == pytest.approx(1.0 / 3.0, abs=1e-13)  # K + xi K' = 1/2 - 1/6
        assert evals[1] == pytest.approx(0.5, abs=1e-13)
        assert evals[0] >= (1.0 - 0.5) * 0.5 - 1e-13

    def test_zero_vector_limit(self):
        J = ff.flux_jacobian(ff.two_term(), np.zeros(2))
        assert np.allclose(J, np.eye(2))

    def test_eigenvalue_bound_random(self, rng):
        for _ in range(300):
            p = random_poly(rng)
            y = rng.standard_normal(2) * 10.0 ** rng.uniform(-3, 3)
            J = ff.flux_jacobian(p, y)
            lam_min = np.linalg.eigvalsh(J)[0]
            K = ff.eval_K(p, float(np.hypot(*y))).K
            assert lam_min >= (1.0 - p.a) * K * (1.0 - 1e-12)


class TestDegreeCondition:
    def test_strict_in_3d(self):
        p = ff.ForchheimerPolynomial((0.0, 2.0), (1.0, 1.0))
        dc = ff.degree_condition(p, 3)
        assert dc.satisfies_dc and dc.satisfies_sdc

    def test_boundary_case(self):
        p = ff.ForchheimerPolynomial((0.0, 4.0), (1.0, 1.0))
        dc = ff.degree_condition(p, 3)
        assert dc.satisfies_dc and not dc.satisfies_sdc

    def test_low_dimension_unconstrained(self):
        p = ff.ForchheimerPolynomial((0.0, 50.0), (1.0, 1.0))
        dc = ff.degree_condition(p, 2)
        assert dc.satisfies_dc and dc.satisfies_sdc


class TestMonotonicityGap:
    def test_zero_difference(self):
        p = ff.two_term()
        y = np.array([1.0, 2.0])
        gap = ff.monotonicity_gap(p, p, y, y)
        assert gap["lhs"] == 0.0
        assert gap["rhs_coercive"] == 0.0

    def test_two_term_closed_form(self):
        p = ff.two_term()
        gap = ff.monotonicity_gap(p, p, np.array([1.0, 0.0]), np.zeros(2))
        K1 = ff.eval_K(p, 1.0).K
        assert gap["lhs"] == pytest.approx(K1, abs=1e-14)
        assert gap["rhs_coercive"] == pytest.approx(0.5 * K1, abs=1e-14)
        assert gap["lhs"] >= gap["rhs_coercive"]

    def test_same_law_coercivity_random(self, rng):
        for _ in range(500):
            p = random_poly(rng)
            y = rng.standard_normal(2) * 10.0 ** rng.uniform(-2, 2)
            yp = rng.standard_normal(2) * 10.0 ** rng.uniform(-2, 2)
            gap = ff.monotonicity_gap(p, p, y, yp)
            scale = 1.0 + abs(gap["lhs"]) + gap["rhs_coercive"]
            assert gap["lhs"] >= gap["rhs_coercive"] - 1e-12 * scale

    def test_perturbed_law_random(self, rng):
        for _ in range(500):
            p1 = random_poly(rng)
            coeffs2 = tuple(c * rng.uniform(0.5, 2.0) for c in p1.coefficients)
            p2 = ff.ForchheimerPolynomial(p1.exponents, coeffs2)
            y = rng.standard_normal(2) * 10.0 ** rng.uniform(-2, 2)
            yp = rng.standard_normal(2) * 10.0 ** rng.uniform(-2, 2)
            gap = ff.monotonicity_gap(p1, p2, y, yp)
            scale = 1.0 + abs(gap["lhs"]) + gap["rhs_coercive"] + gap["rhs_perturb"]
            assert gap["lhs"] >= gap["rhs_coercive"] - gap["rhs_perturb"] - 1e-12 * scale

    def test_mismatched_exponents_rejected(self):
        with pytest.raises(ValueError):
            ff.monotonicity_gap(ff.two_term(), ff.three_term(), np.ones(2), np.zeros(2))


class TestPolynomialValidation:
    def test_zero_a0_rejected(self):
        with pytest.raises(ValueError, match="a0 must be positive"):
            ff.ForchheimerPolynomial((0.0, 1.0), (0.0, 1.0))

    def test_nonzero_first_exponent_rejected(self):
        with pytest.raises(ValueError, match="first exponent"):
            ff.ForchheimerPolynomial((0.5, 1.0), (1.0, 1.0))

    def test_unordered_exponents_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            ff.ForchheimerPolynomial((0.0, 2.0, 1.0), (1.0, 1.0, 1.0))

    def test_darcy_flagged(self):
        assert ff.darcy().is_darcy
        assert not ff.two_term().is_darcy

    def test_pairs_round_trip(self):
        p = ff.three_term(1.0, 2.0, 3.0)
        assert ff.ForchheimerPolynomial.from_pairs(p.to_pairs()) == p

    def test_degeneracy_exponents(self):
        p = ff.two_term()
        d = DegeneracyExponents.of(p)
        assert d.a == pytest.approx(0.5)
        assert d.b == pytest.approx(1.0 / 3.0)
        assert d.chi == 1.0
        p2 = ff.ForchheimerPolynomial((0.0, 1.0), (0.25, 8.0))
        assert p2.chi == 8.0


class TestMonotoneStructure:
    def test_K_decreasing_and_Kxim_increasing(self, rng):
        for _ in range(400):
            p = random_poly(rng)
            x1 = 10.0 ** rng.uniform(-4, 5)
            x2 = x1 * rng.uniform(1.0, 10.0)
            K1 = ff.eval_K(p, x1).K
            K2 = ff.eval_K(p, x2).K
            assert K1 >= K2 * (1.0 - 1e-12)
            for m in (1.0, 2.0):
                assert K1 * x1**m <= K2 * x2**m * (1.0 + 1e-12)

    def test_growth_bracket_recorded(self, rng):
        # the compensated ratio K(xi) (1+xi)^a must stay inside a fixed
        # positive bracket over the whole range; the bracket itself is
        # law-dependent and only recorded
        for _ in range(25):
            p = random_poly(rng)
            xis = np.concatenate([[0.0], np.logspace(-6, 6, 40)])
            _, K, _ = p.conductivity_arrays(xis)
            ratio = K * (1.0 + xis) ** p.a
            assert np.all(ratio > 0.0) and np.all(np.isfinite(ratio))
            bracket = (float(ratio.min()), float(ratio.max()))
            assert bracket[0] > 0.0 and bracket[1] < math.inf
