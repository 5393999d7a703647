"""Verification targets: flux envelopes, report checks, identities."""

import math

import numpy as np
import pytest

import forchflow as ff
from forchflow import estimates as est
from forchflow.grid import ScalarField
from forchflow.solver import ObserverSpec, SolverConfig, make_initial, run


def small_run(poly, flux, n=48, t_end=2.0, dt=5e-3, epochs=25, s_values=(2.0, 4.0), deltas=(0.25,)):
    g = ff.Grid(dim=1, cells=(n,), extents=(1.0,))
    p0 = make_initial(g, family="cosine", amplitude=1.0)
    obs = ObserverSpec(epochs=tuple(np.linspace(t_end / epochs, t_end, epochs)),
                       s_values=s_values, deltas=deltas if not poly.is_darcy else ())
    return g, run(p0, poly, flux, SolverConfig(dt=dt), t_end, obs)


class TestTheoryExponents:
    def test_sup_exponent_formula(self):
        e = est.TheoryExponents(a=0.5, n=2)
        assert e.sup_exponent == pytest.approx(4.0 / (1.5 * (4.0 - 0.5 * 4.0)))
        assert e.b == pytest.approx(1.0 / 3.0)

    def test_embedding_chain_2d(self):
        e = est.TheoryExponents(a=0.5, n=2)
        # critical exponent of 2-a in 2d: 2(2-a)/a = 6; p = 4(1 - 1/6) = 10/3
        assert e.sobolev_p == pytest.approx(10.0 / 3.0)
        assert e.gain == pytest.approx(1.0 - 2.0 / (10.0 / 3.0))
        assert 0.0 < e.gamma1() < 1.0

    def test_one_dimensional_limit(self):
        e = est.TheoryExponents(a=0.5, n=1)
        assert e.sobolev_p == 4.0
        assert e.gain == pytest.approx(0.5)

    def test_gamma1_requires_admissible_mu(self):
        e = est.TheoryExponents(a=0.5, n=2)
        with pytest.raises(ValueError):
            e.gamma1(mu=1.0 / e.gain)


class TestFluxFunctionals:
    def test_constant_flux_half_exponent(self):
        # a = 1/2: (2-a)/(1-a) = 3, so psi = 1 gives f = 1 + 1 = 2
        flux = ff.BoundaryFlux(family="constant", amplitude=1.0)
        fn = est.flux_functionals(flux, 0.5, np.linspace(0.0, 5.0, 11))
        assert np.allclose(fn.f, 2.0)
        assert np.allclose(fn.f_tilde, 0.0)
        assert fn.A_hat == pytest.approx(2.0)
        assert fn.beta_hat == 0.0

    def test_decaying_flux_tail_vanishes(self):
        flux = ff.BoundaryFlux(family="decaying_exp", amplitude=1.0, rate=1.0)
        fn = est.flux_functionals(flux, 0.5, np.linspace(0.0, 40.0, 81))
        assert fn.A_hat <= 1e-12
        assert fn.decays_to_zero and fn.envelope_integrable
        assert np.all(np.diff(fn.M_f) <= 0.0 + 1e-15)  # f decreasing => majorant flat

    def test_growing_flux_beta_zero(self):
        flux = ff.BoundaryFlux(family="power_growth", amplitude=1.0, exponent=0.2)
        fn = est.flux_functionals(flux, 0.5, np.linspace(0.0, 10.0, 21))
        assert fn.beta_hat == 0.0  # f increasing: negative part of f' vanishes
        assert not fn.bounded

    def test_no_derivative_marked_unavailable(self):
        class Stub:
            has_time_derivative = False
            decays_to_zero = False
            psi_t_vanishes = False
            bounded = True
            envelope_integrable = False

            def sup_norm(self, t):
                return np.ones_like(np.asarray(t, dtype=float))

        fn = est.flux_functionals(Stub(), 0.5, np.linspace(0.0, 1.0, 5))
        assert fn.f_tilde is None and fn.beta_hat is None


class TestComputeJH:
    def test_constant_field_zero(self):
        g = ff.Grid(dim=1, cells=(16,), extents=(1.0,))
        assert est.compute_JH(ff.two_term(), ScalarField(g, np.full(16, 3.0))) == 0.0

    def test_darcy_linear_field(self):
        g = ff.Grid(dim=1, cells=(32,), extents=(1.0,))
        f = ScalarField(g, g.centers(0).copy())
        assert est.compute_JH(ff.darcy(), f) == pytest.approx(1.0, abs=1e-12)

    def test_sandwich_on_random_fields(self, rng):
        g = ff.Grid(dim=2, cells=(12, 12), extents=(1.0, 1.0))
        poly = ff.two_term()
        for _ in range(20):
            f = ScalarField(g, rng.standard_normal(g.cells))
            jh = est.compute_JH(poly, f)
            from forchflow.grid import cell_gradient_magnitude

            mag = cell_gradient_magnitude(f)
            _, K, _ = poly.conductivity_arrays(mag)
            kg2 = float(np.sum(K * mag**2)) * g.cell_volume
            assert kg2 * (1 - 1e-12) <= jh <= 2 * kg2 * (1 + 1e-12)


class TestChecks:
    def test_decay_applicable_and_passes(self):
        g, res = small_run(ff.two_term(), ff.BoundaryFlux(family="decaying_exp", amplitude=0.5, rate=1.0),
                           t_end=8.0, dt=1e-2, epochs=40)
        fn = est.flux_functionals(ff.BoundaryFlux(family="decaying_exp", amplitude=0.5, rate=1.0),
                                  0.5, res.log.t)
        entry = est.check_decay(res.log, fn)
        assert entry.applicable and entry.passed

    def test_decay_not_applicable_for_constant_flux(self):
        flux = ff.BoundaryFlux(family="constant", amplitude=1.0)
        g, res = small_run(ff.two_term(), flux, t_end=1.0, epochs=10)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        entry = est.check_decay(res.log, fn)
        assert not entry.applicable

    def test_pt_decay_applicable_and_passes(self):
        flux = ff.BoundaryFlux(family="decaying_exp", amplitude=1.0, rate=1.0, offset=1.0)
        g, res = small_run(ff.two_term(), flux, t_end=10.0, dt=1e-2, epochs=50)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        entry = est.check_pt_decay(res.log, fn)
        assert entry.applicable and entry.passed

    def test_pt_decay_not_applicable_for_sinusoidal(self):
        flux = ff.BoundaryFlux(family="sinusoidal", amplitude=1.0, omega=3.0)
        g, res = small_run(ff.two_term(), flux, t_end=1.0, epochs=10)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        assert not est.check_pt_decay(res.log, fn).applicable

    def test_uniform_boundedness_constant_flux(self):
        flux = ff.BoundaryFlux(family="constant", amplitude=0.5)
        g, res = small_run(ff.two_term(), flux, t_end=6.0, dt=1e-2, epochs=30)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        entry = est.check_uniform_boundedness(res.log, fn, est.TheoryExponents(a=0.5, n=1))
        assert entry.applicable and entry.passed

    def test_uniform_boundedness_growing_flux(self):
        # |pbar|_inf grows with the flux, but the ratio against the
        # structural majorant stays bounded
        flux = ff.BoundaryFlux(family="power_growth", amplitude=1.0, exponent=0.2)
        g, res = small_run(ff.two_term(), flux, t_end=6.0, dt=1e-2, epochs=30)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        entry = est.check_uniform_boundedness(res.log, fn, est.TheoryExponents(a=0.5, n=1))
        assert entry.applicable and entry.passed

    def test_gradient_hessian_plateau_decaying_flux(self):
        flux = ff.BoundaryFlux(family="decaying_exp", amplitude=0.5, rate=1.0)
        g, res = small_run(ff.two_term(), flux, t_end=8.0, dt=1e-2, epochs=40)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        entries = est.check_gradient_and_hessian_boundedness(
            res.log, fn, g, s_values=(2.0, 4.0), deltas=(0.25,))
        assert len(entries) == 3
        for e in entries:
            assert e.applicable and e.passed, (e.target, e.statistic)

    def test_gradient_not_applicable_when_unbounded(self):
        flux = ff.BoundaryFlux(family="power_growth", amplitude=0.5, exponent=0.3)
        g, res = small_run(ff.two_term(), flux, t_end=2.0, epochs=10)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        entries = est.check_gradient_and_hessian_boundedness(
            res.log, fn, g, s_values=(2.0,), deltas=(0.25,))
        assert all(not e.applicable for e in entries)

    def test_identity_entries(self):
        flux = ff.BoundaryFlux(family="decaying_exp", amplitude=0.5, rate=1.0)
        g, res = small_run(ff.two_term(), flux, t_end=1.0, epochs=10)
        e_mass = est.check_mass_balance(res.log, res.state.initial_mass)
        assert e_mass.passed and e_mass.statistic <= 1e-12
        e_energy = est.check_energy_identity(res.log)
        assert e_energy.passed and e_energy.statistic <= 1e-9
        e_jh = est.check_jh_sandwich(res.log)
        assert e_jh.passed
        assert 1.0 <= e_jh.details["min_ratio"] <= e_jh.details["max_ratio"] <= 2.0

    def test_dissipation_entry(self):
        g, res = small_run(ff.two_term(), ff.zero_flux(), t_end=0.5, epochs=5)
        entry = est.check_dissipation(res.log)
        assert entry.applicable and entry.passed
        flux = ff.BoundaryFlux(family="constant", amplitude=1.0)
        g2, res2 = small_run(ff.two_term(), flux, t_end=0.5, epochs=5)
        assert not est.check_dissipation(res2.log).applicable

    def test_standard_report_serializes(self):
        flux = ff.BoundaryFlux(family="decaying_exp", amplitude=0.5, rate=1.0)
        g, res = small_run(ff.two_term(), flux, t_end=8.0, dt=1e-2, epochs=40)
        fn = est.flux_functionals(flux, 0.5, res.log.t)
        report = est.standard_report(res.log, fn, est.TheoryExponents(a=0.5, n=1), g,
                                     initial_mass=res.state.initial_mass,
                                     s_values=(2.0, 4.0), deltas=(0.25,))
        d = report.to_json_dict()
        assert d["pass"] is True
        assert all("anchor" in t and "mode" in t for t in d["targets"])
        modes = {t["mode"] for t in d["targets"]}
        assert modes <= {"decay", "boundedness", "scaling-order"}
