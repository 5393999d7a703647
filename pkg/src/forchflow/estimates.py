"""Verification targets evaluated on observation logs.

Every long-time bound of interest carries an unknowable constant, so the
checks here are constant-free: decay targets, plateau (non-growth) targets,
exact discrete identities, and sandwich inequalities.  Scaling-order targets
live in the stability module.  All checks are pure post-processing over
immutable logs and are deterministic for a fixed configuration.
"""

from dataclasses import dataclass, field

import numpy as np

from .constitutive import ForchheimerPolynomial
from .grid import BoundaryFlux, ScalarField, hessian_interior_cell_count
from .solver import RunLog, _weighted_gradient_integrals


@dataclass(frozen=True)
class VerificationThresholds:
    """Fixed, config-visible thresholds for all constant-free checks."""

    plateau_growth_factor: float = 1.05
    decay_fraction: float = 0.02
    pt_decay_fraction: float = 0.02
    tail_window: float = 0.25
    flux_decay_cut: float = 1e-3
    energy_identity_rel: float = 1e-6
    mass_balance_rel: float = 1e-10
    sandwich_rel: float = 1e-12
    flux_order_min: float = 0.9
    darcy_order_tol: float = 1e-3
    coeff_order_min: float = 0.45
    grad_order_min: float = 0.2
    linf_order_margin: float = 0.1
    min_hessian_cells: int = 8


DEFAULT_THRESHOLDS = VerificationThresholds()


@dataclass(frozen=True)
class TheoryExponents:
    """Exponents entering the report formulas, derived from the degeneracy
    exponent a and the spatial dimension (embedding exponents use the
    critical-range convention; for n = 1 the critical exponent is +inf)."""

    a: float
    n: int

    @property
    def b(self):
        return self.a / (2.0 - self.a)

    @property
    def sup_exponent(self):
        # exponent on the flux majorant in the uniform sup bound
        return 4.0 / ((2.0 - self.a) * (4.0 - self.a * (self.n + 2)))

    @property
    def sobolev_p(self):
        r = 2.0 - self.a
        if self.n > r:
            rstar = self.n * r / (self.n - r)
            return 4.0 * (1.0 - 1.0 / rstar)
        return 4.0

    @property
    def gain(self):
        return 1.0 - 2.0 / self.sobolev_p

    @property
    def weight_exponent(self):
        return 2.0 / (self.sobolev_p * (2.0 - self.a))

    @property
    def default_mu(self):
        return 2.0 * max(1.0 / self.gain, (2.0 - self.a) / (2.0 * (1.0 - self.a)))

    def gamma1(self, mu=None):
        mu = self.default_mu if mu is None else mu
        if mu <= 1.0 / self.gain:
            raise ValueError("mu must exceed 1/gain")
        return self.gain - 1.0 / mu


@dataclass(frozen=True)
class FluxFunctionals:
    """Scalar envelopes of the boundary flux driving the long-time bounds:
    f = |psi|_sup^2 + |psi|_sup^((2-a)/(1-a)), f_tilde the same functional
    of psi_t, M_f a running majorant, A_hat/beta_hat tail estimators."""

    t: np.ndarray
    f: np.ndarray
    f_tilde: np.ndarray | None
    M_f: np.ndarray
    A_hat: float
    beta_hat: float | None
    a: float
    sup_psi: np.ndarray
    sup_psi_t: np.ndarray | None
    decays_to_zero: bool
    psi_t_vanishes: bool
    bounded: bool
    envelope_integrable: bool


def flux_functionals(flux: BoundaryFlux, a, epochs) -> FluxFunctionals:
    if not (0.0 <= a < 1.0):
        raise ValueError("a must lie in [0, 1)")
    t = np.asarray(epochs, dtype=np.float64)
    p = (2.0 - a) / (1.0 - a)
    m = np.asarray(flux.sup_norm(t))
    f = m**2 + m**p
    M_f = np.maximum.accumulate(f)
    tail = t >= t[0] + (1.0 - DEFAULT_THRESHOLDS.tail_window) * (t[-1] - t[0])
    A_hat = float(f[tail].max())

    if flux.has_time_derivative:
        mt = np.asarray(flux.sup_norm_dt(t))
        f_tilde = mt**2 + mt**p
        # f' through the envelope: d|phi|/dt = sign(phi) * phi'
        phi = np.asarray(flux.phi(t))
        mprime = np.sign(phi) * np.asarray(flux.phi_t(t))
        with np.errstate(invalid="ignore"):
            fprime = (2.0 * m + p * m ** (p - 1.0)) * mprime
        fprime = np.where(np.isfinite(fprime), fprime, 0.0)
        beta_hat = float(np.maximum(-fprime, 0.0)[tail].max())
    else:
        f_tilde = None
        mt = None
        beta_hat = None

    return FluxFunctionals(
        t=t,
        f=f,
        f_tilde=f_tilde,
        M_f=M_f,
        A_hat=A_hat,
        beta_hat=beta_hat,
        a=a,
        sup_psi=m,
        sup_psi_t=mt,
        decays_to_zero=flux.decays_to_zero,
        psi_t_vanishes=flux.psi_t_vanishes,
        bounded=flux.bounded,
        envelope_integrable=flux.envelope_integrable,
    )


def compute_JH(poly: ForchheimerPolynomial, f: ScalarField):
    """Integral of the energy density H over the full domain (closed-form H
    on the cell-aggregated gradient magnitudes)."""
    jh, _, _, _ = _weighted_gradient_integrals(poly, f, (), f.grid.interior_slices)
    return jh


@dataclass
class ReportEntry:
    target: str
    anchor: str
    mode: str
    statistic: float
    threshold: float
    passed: bool
    applicable: bool = True
    details: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {
            "target": self.target,
            "anchor": self.anchor,
            "mode": self.mode,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "pass": bool(self.passed),
            "applicable": bool(self.applicable),
            "details": self.details,
        }


@dataclass
class EstimateReport:
    entries: list

    def all_passed(self):
        return all(e.passed for e in self.entries if e.applicable)

    def to_json_dict(self):
        return {"targets": [e.to_json_dict() for e in self.entries], "pass": self.all_passed()}


def _not_applicable(target, anchor, mode, reason):
    return ReportEntry(
        target=target,
        anchor=anchor,
        mode=mode,
        statistic=float("nan"),
        threshold=float("nan"),
        passed=True,
        applicable=False,
        details={"reason": reason},
    )


def _halves(t):
    mid = t[0] + 0.5 * (t[-1] - t[0])
    first = t <= mid
    second = t >= mid
    return first, second


def check_uniform_boundedness(
    log: RunLog, fn: FluxFunctionals, exponents: TheoryExponents, thresholds=DEFAULT_THRESHOLDS
) -> ReportEntry:
    """Sup-pressure bound: the ratio of |pbar|_inf to its structural majorant
    1 + |pbar0|_inf + |pbar0|_2^(mu(2-a)) + M_f^mu must not grow (the
    unknown constant in front is never asserted)."""
    t = log.t
    linf = log.series("Linf_pbar")
    mu = exponents.sup_exponent
    denom = 1.0 + linf[0] + log.series("L2_pbar")[0] ** (mu * (2.0 - exponents.a)) + fn.M_f**mu
    ratio = linf / denom
    first, second = _halves(t)
    stat = float(ratio[second].max() / max(ratio[first].max(), 1e-300))
    return ReportEntry(
        target="pressure-sup-bound",
        anchor="uniform-sup-estimate",
        mode="boundedness",
        statistic=stat,
        threshold=thresholds.plateau_growth_factor,
        passed=bool(np.isfinite(ratio).all() and stat <= thresholds.plateau_growth_factor),
        details={"max_ratio": float(ratio.max()), "sup_exponent": mu},
    )


def check_decay(log: RunLog, fn: FluxFunctionals, thresholds=DEFAULT_THRESHOLDS) -> ReportEntry:
    """Vanishing flux forces the shifted pressure to vanish in sup norm."""
    target, anchor, mode = "pressure-decay", "vanishing-flux-decay", "decay"
    if not fn.decays_to_zero:
        return _not_applicable(target, anchor, mode, "flux profile does not decay to zero")
    psi0 = float(fn.sup_psi[0])
    if psi0 > 0.0 and float(fn.sup_psi[-1]) >= thresholds.flux_decay_cut * psi0:
        return _not_applicable(target, anchor, mode, "horizon too short: flux not yet negligible")
    linf = log.series("Linf_pbar")
    stat = float(linf[-1])
    threshold = thresholds.decay_fraction * (float(linf[0]) + float(linf.max()))
    return ReportEntry(
        target=target,
        anchor=anchor,
        mode=mode,
        statistic=stat,
        threshold=threshold,
        passed=bool(stat <= threshold),
        details={"running_max": float(linf.max())},
    )


def check_pt_decay(log: RunLog, fn: FluxFunctionals, thresholds=DEFAULT_THRESHOLDS) -> ReportEntry:
    """Bounded flux with vanishing time derivative forces the interior sup
    norm of pbar_t to vanish."""
    target, anchor, mode = "pressure-rate-decay", "time-derivative-decay", "decay"
    if not (fn.bounded and fn.psi_t_vanishes):
        return _not_applicable(target, anchor, mode, "flux hypothesis fails (needs bounded psi, psi_t -> 0)")
    t = log.t
    rate = log.series("Linf_pbar_t")
    valid = np.isfinite(rate)
    if valid.sum() < 4:
        return _not_applicable(target, anchor, mode, "insufficient samples")
    first, _ = _halves(t)
    early = rate[valid & first]
    if early.size == 0 or early.max() <= 0.0:
        return _not_applicable(target, anchor, mode, "no early-time activity to compare against")
    stat = float(rate[valid][-1])
    threshold = thresholds.pt_decay_fraction * float(early.max())
    return ReportEntry(
        target=target,
        anchor=anchor,
        mode=mode,
        statistic=stat,
        threshold=threshold,
        passed=bool(stat <= threshold),
        details={"early_max": float(early.max())},
    )


def _cumulative(t, series):
    return np.concatenate([[0.0], np.cumsum(0.5 * (series[1:] + series[:-1]) * np.diff(t))])


def check_gradient_and_hessian_boundedness(
    log: RunLog,
    fn: FluxFunctionals,
    grid,
    s_values,
    deltas,
    thresholds=DEFAULT_THRESHOLDS,
) -> list:
    """Plateau targets for the interior weighted-gradient integrals and the
    interior Hessian norms under an integrable, bounded flux envelope."""
    t = log.t
    entries = []
    first, second = _halves(t)
    t_mid = t[0] + 0.5 * (t[-1] - t[0])

    for s in s_values:
        target = f"weighted-gradient-plateau-s{s:g}"
        anchor = "interior-weighted-gradient-integral"
        series = log.series(f"Kgrad_{s:g}")
        if fn.envelope_integrable:
            cum = _cumulative(t, series)
            mid_val = float(np.interp(t_mid, t, cum))
            stat = float(cum[-1] / max(mid_val, 1e-300))
        elif fn.bounded:
            cum = _cumulative(t, series)
            mid_val = float(np.interp(t_mid, t, cum)) / max(t_mid - t[0], 1e-300)
            stat = float(cum[-1] / (t[-1] - t[0]) / max(mid_val, 1e-300))
        else:
            entries.append(_not_applicable(target, anchor, "boundedness", "flux envelope unbounded"))
            continue
        entries.append(
            ReportEntry(
                target=target,
                anchor=anchor,
                mode="boundedness",
                statistic=stat,
                threshold=thresholds.plateau_growth_factor,
                passed=bool(stat <= thresholds.plateau_growth_factor),
                details={"cumulative_final": float(cum[-1])},
            )
        )

    for d in deltas:
        target = f"hessian-plateau-delta{d:g}"
        anchor = "interior-hessian-bound"
        if hessian_interior_cell_count(grid) < thresholds.min_hessian_cells:
            entries.append(_not_applicable(target, anchor, "boundedness", "insufficient resolution for hessian stencil"))
            continue
        if not (fn.bounded and fn.envelope_integrable):
            entries.append(_not_applicable(target, anchor, "boundedness", "flux envelope not bounded+integrable"))
            continue
        series = log.series(f"hess_norm_{d:g}") ** (2.0 - d)  # raw integral
        if not np.isfinite(series[1:]).all():
            entries.append(_not_applicable(target, anchor, "boundedness", "hessian series unavailable"))
            continue
        sup1 = float(series[first & np.isfinite(series)].max())
        sup2 = float(series[second].max())
        stat = sup2 / max(sup1, 1e-300)
        entries.append(
            ReportEntry(
                target=target,
                anchor=anchor,
                mode="boundedness",
                statistic=stat,
                threshold=thresholds.plateau_growth_factor,
                passed=bool(stat <= thresholds.plateau_growth_factor),
                details={"sup_first_half": sup1, "sup_second_half": sup2},
            )
        )
    return entries


def check_energy_identity(log: RunLog, thresholds=DEFAULT_THRESHOLDS) -> ReportEntry:
    """The per-step discrete energy balance (time-difference of the shifted
    energy + implicit-step dissipation + conductive dissipation + boundary
    work) must vanish to rounding at every epoch."""
    resid = log.series("energy_residual")[1:]
    stat = float(resid.max()) if resid.size else 0.0
    return ReportEntry(
        target="energy-identity",
        anchor="discrete-energy-balance",
        mode="boundedness",
        statistic=stat,
        threshold=thresholds.energy_identity_rel,
        passed=bool(stat <= thresholds.energy_identity_rel),
        details={"continuum_form_max": float(log.series("energy_residual_continuum")[1:].max()) if resid.size else 0.0},
    )


def check_mass_balance(log: RunLog, initial_mass, thresholds=DEFAULT_THRESHOLDS) -> ReportEntry:
    stat = float(log.summary["max_mass_residual"]) / (1.0 + abs(initial_mass))
    return ReportEntry(
        target="mass-balance",
        anchor="boundary-flux-mass-identity",
        mode="boundedness",
        statistic=stat,
        threshold=thresholds.mass_balance_rel,
        passed=bool(stat <= thresholds.mass_balance_rel),
        details={"raw_max_residual": float(log.summary["max_mass_residual"])},
    )


def check_dissipation(log: RunLog) -> ReportEntry:
    target, anchor = "dissipation", "zero-flux-energy-monotonicity"
    if not log.summary.get("dissipation_checked"):
        return _not_applicable(target, anchor, "boundedness", "flux not identically zero")
    v = int(log.summary["dissipation_violations"])
    return ReportEntry(
        target=target,
        anchor=anchor,
        mode="boundedness",
        statistic=float(v),
        threshold=0.0,
        passed=v == 0,
        details={"max_violation": float(log.summary["max_dissipation_violation"])},
    )


def check_jh_sandwich(log: RunLog, thresholds=DEFAULT_THRESHOLDS) -> ReportEntry:
    """K(xi) xi^2 <= H(xi) <= 2 K(xi) xi^2 integrated over the domain."""
    jh = log.series("JH")
    kg = log.series("Kgrad2")
    mask = kg > 0.0
    if mask.any():
        ratio = jh[mask] / kg[mask]
        lo, hi = float(ratio.min()), float(ratio.max())
    else:
        lo, hi = 1.0, 1.0
    tol = thresholds.sandwich_rel
    passed = lo >= 1.0 - tol and hi <= 2.0 + tol
    return ReportEntry(
        target="jh-sandwich",
        anchor="energy-density-comparison",
        mode="boundedness",
        statistic=hi,
        threshold=2.0 + tol,
        passed=bool(passed),
        details={"min_ratio": lo, "max_ratio": hi},
    )


def standard_report(
    log: RunLog,
    fn: FluxFunctionals,
    exponents: TheoryExponents,
    grid,
    initial_mass,
    s_values=(),
    deltas=(),
    thresholds=DEFAULT_THRESHOLDS,
) -> EstimateReport:
    """The full battery of constant-free checks for a single run."""
    entries = [
        check_mass_balance(log, initial_mass, thresholds),
        check_energy_identity(log, thresholds),
        check_jh_sandwich(log, thresholds),
        check_dissipation(log),
        check_uniform_boundedness(log, fn, exponents, thresholds),
        check_decay(log, fn, thresholds),
        check_pt_decay(log, fn, thresholds),
    ]
    entries += check_gradient_and_hessian_boundedness(log, fn, grid, s_values, deltas, thresholds)
    return EstimateReport(entries=entries)
