"""Paired-run experiments: continuous dependence on boundary data and on
momentum-law coefficients, quantified by log-log order fits.

A perturbation sweep runs a geometric ladder of perturbation sizes against a
shared base scenario (same grid, time step and observation epochs), logs the
difference norms per epoch, and fits the growth order of the sup-in-time
norms.  Order acceptance thresholds sit slightly below the guaranteed
exponents because the bounds are upper bounds and discretization adds noise.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .constitutive import ForchheimerPolynomial
from .estimates import DEFAULT_THRESHOLDS, ReportEntry, TheoryExponents
from .grid import ScalarField, cell_gradient
from .solver import RunResult, RunSpec


@dataclass
class PairResult:
    """Per-epoch difference diagnostics between two runs on one grid."""

    t: np.ndarray
    l2_Pbar: np.ndarray
    linf_Pbar_interior: np.ndarray
    grad_norm: dict  # delta -> L^(2-delta)(U') norm series of grad P
    weighted_grad: np.ndarray  # integral over U' of K(xi_max) |grad P|^2
    holder_lhs: dict  # delta -> raw interior integral of |grad P|^(2-delta)
    holder_rhs: dict  # delta -> exact Hoelder majorant via the K weight
    holder_rhs_envelope: dict  # delta -> diagnostic majorant via (1+xi)^a growth
    run1: RunResult
    run2: RunResult


def _vee_poly(p1: ForchheimerPolynomial, p2: ForchheimerPolynomial):
    if p1.exponents != p2.exponents:
        raise ValueError("paired runs must share the exponent vector")
    if p1.coefficients == p2.coefficients:
        return p1
    cmax = tuple(max(a, b) for a, b in zip(p1.coefficients, p2.coefficients))
    return ForchheimerPolynomial(p1.exponents, cmax)


def collect_pair(spec1: RunSpec, res1: RunResult, spec2: RunSpec, res2: RunResult, deltas=()) -> PairResult:
    grid = spec1.grid
    if spec2.grid != grid:
        raise ValueError("paired runs must share the grid")
    if spec1.observer.epochs != spec2.observer.epochs:
        raise ValueError("paired runs must share observation epochs")
    if spec1.config.dt != spec2.config.dt:
        raise ValueError("paired runs must share dt")
    if not (res1.log.pbar_fields and res2.log.pbar_fields):
        raise ValueError("paired runs need keep_fields=True observers")

    kpoly = _vee_poly(spec1.poly, spec2.poly)
    a = kpoly.a
    vol = grid.cell_volume
    inner = grid.interior_slices
    t = res1.log.t

    n = len(res1.log.pbar_fields)
    l2 = np.empty(n)
    linf_i = np.empty(n)
    weighted = np.empty(n)
    gnorm = {d: np.empty(n) for d in deltas}
    hl = {d: np.empty(n) for d in deltas}
    hr = {d: np.empty(n) for d in deltas}
    hre = {d: np.empty(n) for d in deltas}

    for k in range(n):
        f1 = res1.log.pbar_fields[k]
        f2 = res2.log.pbar_fields[k]
        dvals = f1.values - f2.values
        l2[k] = np.sqrt(np.sum(dvals**2) * vol)
        linf_i[k] = np.abs(dvals[inner]).max()

        g1 = cell_gradient(f1)
        g2 = cell_gradient(f2)
        mag1 = np.sqrt(np.sum(g1 * g1, axis=-1))
        mag2 = np.sqrt(np.sum(g2 * g2, axis=-1))
        dmagsq = np.sum((g1 - g2) ** 2, axis=-1)
        ximax = np.maximum(mag1, mag2)
        _, K, _ = kpoly.conductivity_arrays(ximax)

        Ki = K[inner]
        di = dmagsq[inner]
        weighted[k] = float(np.sum(Ki * di)) * vol
        for d in deltas:
            p = 2.0 - d
            lhs = float(np.sum(di ** (p / 2.0))) * vol
            gnorm[d][k] = lhs ** (1.0 / p)
            hl[d][k] = lhs
            neg_weight = float(np.sum(Ki ** (-p / d))) * vol
            hr[d][k] = (weighted[k] ** (p / 2.0)) * (neg_weight ** (d / 2.0))
            env = float(np.sum((1.0 + mag1[inner] + mag2[inner]) ** (a * p / d))) * vol
            hre[d][k] = (weighted[k] ** (p / 2.0)) * (env ** (d / 2.0))

    return PairResult(
        t=t,
        l2_Pbar=l2,
        linf_Pbar_interior=linf_i,
        grad_norm=gnorm,
        weighted_grad=weighted,
        holder_lhs=hl,
        holder_rhs=hr,
        holder_rhs_envelope=hre,
        run1=res1,
        run2=res2,
    )


def _with_fields(spec: RunSpec) -> RunSpec:
    return replace(spec, observer=replace(spec.observer, keep_fields=True))


def run_pair(spec1: RunSpec, spec2: RunSpec, deltas=()) -> PairResult:
    """Run both scenarios (shared grid/epochs enforced) and collect the
    difference time series."""
    spec1 = _with_fields(spec1)
    spec2 = _with_fields(spec2)
    return collect_pair(spec1, spec1.run(), spec2, spec2.run(), deltas)


def gradient_difference_norms(pair: PairResult, delta):
    """Weighted gradient-difference integral, the interior L^(2-delta) norm,
    and the Hoelder split diagnostics for one delta."""
    if delta not in pair.grad_norm:
        raise ValueError(f"delta {delta!r} was not collected for this pair")
    return {
        "t": pair.t,
        "weighted": pair.weighted_grad,
        "grad_norm": pair.grad_norm[delta],
        "holder_lhs": pair.holder_lhs[delta],
        "holder_rhs": pair.holder_rhs[delta],
        "holder_rhs_envelope": pair.holder_rhs_envelope[delta],
    }


# ---------------------------------------------------------------------------
# Perturbation sweeps


@dataclass
class PerturbationSweep:
    axis: str  # flux_amplitude | coefficient_vector | initial_data
    base: RunSpec
    epsilons: tuple
    magnitudes: tuple  # perturbation size entering the order fit
    pairs: list
    sup_l2: np.ndarray
    sup_linf_interior: np.ndarray
    sup_grad: dict  # delta -> array over epsilons
    is_darcy: bool


@dataclass(frozen=True)
class OrderFit:
    exponent: float
    r2: float
    window: tuple


def fit_order(magnitudes, sups) -> OrderFit:
    """Least-squares slope of log sup-norm against log perturbation size."""
    mags = np.asarray(magnitudes, dtype=np.float64)
    vals = np.asarray(sups, dtype=np.float64)
    keep = vals > 1e-13 * vals.max()
    mags, vals = mags[keep], vals[keep]
    if mags.size < 4:
        raise ValueError("order fit needs at least 4 usable ladder points")
    x = np.log(mags)
    y = np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return OrderFit(exponent=float(slope), r2=r2, window=tuple(float(m) for m in mags))


def _max_threads():
    env = os.environ.get("FORCHFLOW_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _run_ladder(base: RunSpec, make_perturbed, epsilons, deltas):
    base = _with_fields(base)
    base_res = base.run()
    specs = [_with_fields(make_perturbed(e)) for e in epsilons]
    threads = _max_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: s.run(), specs))
    else:
        results = [s.run() for s in specs]
    return [collect_pair(base, base_res, s, r, deltas) for s, r in zip(specs, results)]


def _assemble(axis, base, epsilons, magnitudes, pairs, deltas):
    return PerturbationSweep(
        axis=axis,
        base=base,
        epsilons=tuple(epsilons),
        magnitudes=tuple(magnitudes),
        pairs=pairs,
        sup_l2=np.array([p.l2_Pbar.max() for p in pairs]),
        sup_linf_interior=np.array([p.linf_Pbar_interior.max() for p in pairs]),
        sup_grad={d: np.array([p.grad_norm[d].max() for p in pairs]) for d in deltas},
        is_darcy=base.poly.is_darcy,
    )


def sweep_flux_amplitude(base: RunSpec, epsilons, deltas=(), param="amplitude") -> PerturbationSweep:
    """Perturb one flux profile parameter by each epsilon (same family), so
    the flux difference is exactly epsilon times a fixed profile."""
    if param not in ("amplitude", "offset"):
        raise ValueError("flux perturbation parameter must be amplitude or offset")

    def make(eps):
        kwargs = {param: getattr(base.flux, param) + eps}
        return base.with_flux(replace(base.flux, **kwargs))

    pairs = _run_ladder(base, make, epsilons, deltas)
    return _assemble("flux_amplitude", base, epsilons, epsilons, pairs, deltas)


def sweep_coefficients(base: RunSpec, direction, epsilons, deltas=()) -> PerturbationSweep:
    """Perturb the coefficient vector along ``direction`` by each epsilon;
    the fitted magnitude is the max-norm of the coefficient difference."""
    direction = np.asarray(direction, dtype=np.float64)
    if direction.shape != (len(base.poly.coefficients),):
        raise ValueError("direction length must match the coefficient vector")
    if not np.any(direction):
        raise ValueError("direction must be nonzero")

    def make(eps):
        coeffs = tuple(np.asarray(base.poly.coefficients) + eps * direction)
        try:
            poly = ForchheimerPolynomial(base.poly.exponents, coeffs)
        except ValueError as exc:
            raise ValueError(f"perturbation leaves the admissible coefficient set: {exc}") from exc
        return base.with_poly(poly)

    for eps in epsilons:
        make(eps)  # validate the whole ladder up front
    pairs = _run_ladder(base, make, epsilons, deltas)
    mags = [eps * float(np.abs(direction).max()) for eps in epsilons]
    return _assemble("coefficient_vector", base, epsilons, mags, pairs, deltas)


def sweep_initial_data(base: RunSpec, perturbation: ScalarField, epsilons, deltas=()) -> PerturbationSweep:
    if perturbation.grid != base.grid:
        raise ValueError("perturbation field must live on the base grid")

    def make(eps):
        vals = base.initial.values + eps * perturbation.values
        return base.with_initial(ScalarField(base.grid, vals))

    pairs = _run_ladder(base, make, epsilons, deltas)
    mags = [eps * float(np.abs(perturbation.values).max()) for eps in epsilons]
    return _assemble("initial_data", base, epsilons, mags, pairs, deltas)


# ---------------------------------------------------------------------------
# Order targets


def flux_dependence_order(sweep: PerturbationSweep, exponents: TheoryExponents | None = None,
                          thresholds=DEFAULT_THRESHOLDS):
    """Fit the flux-difference orders.  The L2 bound guarantees first-order
    growth up to constants; the interior sup bound allows the reduced
    exponent gamma1/(gamma1+1)."""
    if sweep.axis != "flux_amplitude":
        raise ValueError("sweep axis must be flux_amplitude")
    fit_l2 = fit_order(sweep.magnitudes, sweep.sup_l2)
    entries = []
    if sweep.is_darcy:
        entries.append(
            ReportEntry(
                target="flux-difference-order-l2-darcy",
                anchor="flux-difference-sup-l2",
                mode="scaling-order",
                statistic=fit_l2.exponent,
                threshold=thresholds.darcy_order_tol,
                passed=bool(abs(fit_l2.exponent - 1.0) <= thresholds.darcy_order_tol),
                details={"r2": fit_l2.r2, "expected": 1.0},
            )
        )
    else:
        entries.append(
            ReportEntry(
                target="flux-difference-order-l2",
                anchor="flux-difference-sup-l2",
                mode="scaling-order",
                statistic=fit_l2.exponent,
                threshold=thresholds.flux_order_min,
                passed=bool(fit_l2.exponent >= thresholds.flux_order_min),
                details={"r2": fit_l2.r2},
            )
        )
    fits = {"l2": fit_l2}
    if exponents is not None:
        fit_li = fit_order(sweep.magnitudes, sweep.sup_linf_interior)
        g1 = exponents.gamma1()
        bound = g1 / (g1 + 1.0) - thresholds.linf_order_margin
        entries.append(
            ReportEntry(
                target="flux-difference-order-linf",
                anchor="flux-difference-interior-sup",
                mode="scaling-order",
                statistic=fit_li.exponent,
                threshold=bound,
                passed=bool(fit_li.exponent >= bound),
                details={"r2": fit_li.r2, "gamma1": g1},
            )
        )
        fits["linf_interior"] = fit_li
    return fits, entries


def coefficient_dependence_order(sweep: PerturbationSweep, thresholds=DEFAULT_THRESHOLDS):
    """Fit the coefficient-difference orders: the sup-L2 bound guarantees
    exponent 1/2 in the coefficient distance; interior gradient differences
    carry a further square root."""
    if sweep.axis != "coefficient_vector":
        raise ValueError("sweep axis must be coefficient_vector")
    fit_l2 = fit_order(sweep.magnitudes, sweep.sup_l2)
    entries = [
        ReportEntry(
            target="coefficient-difference-order-l2",
            anchor="coefficient-difference-sup-l2",
            mode="scaling-order",
            statistic=fit_l2.exponent,
            threshold=thresholds.coeff_order_min,
            passed=bool(fit_l2.exponent >= thresholds.coeff_order_min),
            details={"r2": fit_l2.r2},
        )
    ]
    fits = {"l2": fit_l2}
    for d, sups in sweep.sup_grad.items():
        fit_g = fit_order(sweep.magnitudes, sups)
        entries.append(
            ReportEntry(
                target=f"coefficient-gradient-order-delta{d:g}",
                anchor="coefficient-difference-interior-gradient",
                mode="scaling-order",
                statistic=fit_g.exponent,
                threshold=thresholds.grad_order_min,
                passed=bool(fit_g.exponent >= thresholds.grad_order_min),
                details={"r2": fit_g.r2},
            )
        )
        fits[f"grad_delta{d:g}"] = fit_g
    return fits, entries
