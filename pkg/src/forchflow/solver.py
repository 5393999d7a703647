"""Conservative implicit finite-volume solver for the degenerate pressure
equation p_t = div(K(|grad p|) grad p) with prescribed boundary flux.

Backward Euler in time, two-point fluxes with face conductivity evaluated at
the reconstructed full gradient magnitude, Newton linearization built from
the flux derivative at each face (positive definite by the conductivity
eigenvalue bound).  The discrete mass balance

    integral p(t) = integral p(0) - accumulated boundary outflow

holds to rounding at every accepted step: the boundary-flux accumulator uses
the same right-endpoint quadrature the fully implicit scheme induces, and
each step ends with a uniform-constant projection that removes the residual
mass drift left by the finite Newton tolerance (the shifted solution is
unchanged by it).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .constitutive import ForchheimerPolynomial
from .grid import (
    BoundaryFlux,
    Grid,
    ScalarField,
    cell_gradient_magnitude,
    face_gradient,
    field_integral,
    hessian_norm,
    norm_Ls,
    zero_mean_shift,
)

_EPS = float(np.finfo(np.float64).eps)


class StepFailure(RuntimeError):
    """Newton stagnation that survived all dt halvings."""

    def __init__(self, time, dt, halvings, residual):
        self.time = time
        self.dt = dt
        self.halvings = halvings
        self.residual = residual
        super().__init__(
            f"time step failed at t={time:.6g} (dt reduced to {dt:.3g} "
            f"after {halvings} halvings, residual {residual:.3g})"
        )


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    linear_tol: float = 1e-12
    max_dt_halvings: int = 10

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.newton_tol <= 0.0 or self.linear_tol <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class StepDiagnostics:
    newton_iters: int = 0
    residual: float = 0.0
    dt_used: float = 0.0
    halvings: int = 0
    mass_residual: float = 0.0
    energy_residual: float = 0.0
    energy_residual_continuum: float = 0.0
    l2_pbar: float = 0.0


@dataclass(frozen=True)
class SolverState:
    time: float
    pressure: ScalarField
    accumulated_boundary_outflow: float
    initial_mass: float
    step_diagnostics: StepDiagnostics = field(default_factory=StepDiagnostics)
    _acc_comp: float = 0.0  # Kahan compensation for the outflow accumulator

    @property
    def mass_residual(self):
        m = field_integral(self.pressure)
        return abs(m - self.initial_mass + self.accumulated_boundary_outflow)


def initial_state(initial: ScalarField) -> SolverState:
    return SolverState(
        time=0.0,
        pressure=initial.copy(),
        accumulated_boundary_outflow=0.0,
        initial_mass=field_integral(initial),
    )


# ---------------------------------------------------------------------------
# Residual assembly


def _face_pack(poly: ForchheimerPolynomial, grid: Grid, c: np.ndarray):
    """Interior-face gradient data plus conductivity at each face."""
    fg = face_gradient(ScalarField(grid, c))
    Ks = []
    xikps = []
    for d in range(grid.dim):
        _, K, xikp = poly.conductivity_arrays(fg.magnitude[d])
        Ks.append(K)
        xikps.append(xikp)
    return fg, tuple(Ks), tuple(xikps)


def _divergence(grid: Grid, flux: BoundaryFlux, fg, Ks, t_new):
    """div(K grad c) per cell, with boundary faces carrying the prescribed
    normal flux (outward flux psi)."""
    h = grid.spacing
    div = np.zeros(grid.cells)
    for d in range(grid.dim):
        F = Ks[d] * fg.normal[d]
        psi_min = flux.side_values(grid, d, False, t_new)
        psi_max = flux.side_values(grid, d, True, t_new)
        if grid.dim == 1:
            full = np.empty(grid.cells[0] + 1)
            full[1:-1] = F
            full[0] = psi_min
            full[-1] = -psi_max
            div += np.diff(full) / h[d]
        else:
            shp = list(grid.cells)
            shp[d] += 1
            full = np.empty(shp)
            sl_mid = [slice(None)] * 2
            sl_mid[d] = slice(1, -1)
            full[tuple(sl_mid)] = F
            sl_lo = [slice(None)] * 2
            sl_lo[d] = 0
            full[tuple(sl_lo)] = psi_min
            sl_hi = [slice(None)] * 2
            sl_hi[d] = shp[d] - 1
            full[tuple(sl_hi)] = -psi_max
            div += np.diff(full, axis=d) / h[d]
    return div


def _residual_values(grid, poly, flux, c, p_old, dt, t_new):
    fg, Ks, xikps = _face_pack(poly, grid, c)
    div = _divergence(grid, flux, fg, Ks, t_new)
    r = (c - p_old) / dt - div
    return r, div, (fg, Ks, xikps)


def residual(state: SolverState, candidate: ScalarField, dt, poly, flux, t_new) -> ScalarField:
    """Backward-Euler residual of a candidate field against state.pressure.

    Summed against cell volumes the interior fluxes telescope, so the total
    equals (integral(candidate) - integral(old))/dt + boundary outflow.
    """
    grid = state.pressure.grid
    if candidate.grid != grid:
        raise ValueError("candidate grid does not match state grid")
    r, _, _ = _residual_values(grid, poly, flux, candidate.values, state.pressure.values, dt, t_new)
    return ScalarField(grid, r)


def _l2(grid: Grid, arr):
    return math.sqrt(float(np.sum(arr * arr)) * grid.cell_volume)


def _face_weights(fg, Ks, xikps, d):
    """Flux derivative with respect to the normal difference at each face:
    K + (xi K') (gn/|grad|)^2, reducing to K at zero-gradient faces."""
    gn = fg.normal[d]
    mag = fg.magnitude[d]
    K = Ks[d]
    xikp = xikps[d]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(mag > 0.0, (gn / np.where(mag > 0.0, mag, 1.0)) ** 2, 0.0)
    return K + xikp * frac


def _linear_solve(grid: Grid, cfg: SolverConfig, weights, rhs, dt):
    h = grid.spacing
    if grid.dim == 1:
        wf = weights[0] / h[0] ** 2
        n = grid.cells[0]
        diag = np.full(n, 1.0 / dt)
        diag[:-1] += wf
        diag[1:] += wf
        off = -wf
        return kernels.thomas_solve(off, diag, off, rhs)
    wx = np.ascontiguousarray(weights[0] / h[0] ** 2)
    wy = np.ascontiguousarray(weights[1] / h[1] ** 2)
    x, _ = kernels.cg_solve(1.0 / dt, wx, wy, np.ascontiguousarray(rhs), cfg.linear_tol, 20000)
    return x


def _attempt_step(grid, poly, flux, cfg, p_old, dt, t_new):
    """One backward-Euler solve; returns (c, iters, rnorm, pack, converged)."""
    c = p_old.copy()
    r, div, pack = _residual_values(grid, poly, flux, c, p_old, dt, t_new)
    rnorm = _l2(grid, r)
    best = rnorm
    stall = 0
    iters = 0
    while True:
        floor = 64.0 * _EPS * (_l2(grid, (c - p_old) / dt) + _l2(grid, div) + 1e-300)
        if rnorm <= max(cfg.newton_tol, floor):
            return c, iters, rnorm, pack, True
        if iters >= cfg.newton_max_iter:
            return c, iters, rnorm, pack, False
        fg, Ks, xikps = pack
        weights = tuple(_face_weights(fg, Ks, xikps, d) for d in range(grid.dim))
        delta = _linear_solve(grid, cfg, weights, -r, dt)
        if grid.dim == 1:
            delta = delta.reshape(grid.cells)
        scale = 1.0
        accepted = False
        for _ in range(5):
            c_try = c + scale * delta
            r_try, div_try, pack_try = _residual_values(grid, poly, flux, c_try, p_old, dt, t_new)
            rnorm_try = _l2(grid, r_try)
            if rnorm_try < rnorm or scale <= 0.0625:
                c, r, div, pack, rnorm = c_try, r_try, div_try, pack_try, rnorm_try
                accepted = True
                break
            scale *= 0.5
        iters += 1
        if not accepted or rnorm > 0.9 * best:
            stall += 1
            if stall >= 5:
                return c, iters, rnorm, pack, False
        else:
            stall = 0
        best = min(best, rnorm)


def _energy_terms(grid, flux, pack, p_old, c, dt, t_new):
    """Discrete energy balance of the accepted step, tested with the new
    shifted iterate.  The backward-Euler dissipation 0.5*||dpbar||^2/dt is
    part of the exact discrete identity."""
    vol = grid.cell_volume
    pbar_old = p_old - p_old.mean()
    pbar_new = c - c.mean()
    e_old = 0.5 * float(np.sum(pbar_old**2)) * vol
    e_new = 0.5 * float(np.sum(pbar_new**2)) * vol
    de = (e_new - e_old) / dt
    dp = pbar_new - pbar_old
    be = 0.5 * float(np.sum(dp * dp)) * vol / dt

    fg, Ks, _ = pack
    diss = 0.0
    for d in range(grid.dim):
        diss += float(np.sum(Ks[d] * fg.normal[d] ** 2)) * vol

    bnd = 0.0
    for d in range(grid.dim):
        if grid.dim == 1:
            area = 1.0
            bnd += float(flux.side_values(grid, d, False, t_new)) * pbar_new[0] * area
            bnd += float(flux.side_values(grid, d, True, t_new)) * pbar_new[-1] * area
        else:
            area = grid.spacing[1 - d]
            lo = [slice(None)] * 2
            lo[d] = 0
            hi = [slice(None)] * 2
            hi[d] = grid.cells[d] - 1
            bnd += float(np.sum(flux.side_values(grid, d, False, t_new) * pbar_new[tuple(lo)])) * area
            bnd += float(np.sum(flux.side_values(grid, d, True, t_new) * pbar_new[tuple(hi)])) * area

    scale = max(abs(de), be, diss, abs(bnd), 1e-300)
    exact = abs(de + be + diss + bnd) / scale
    continuum = abs(de + diss + bnd) / scale
    return exact, continuum


def newton_step(state: SolverState, dt, poly, flux, config: SolverConfig | None = None) -> SolverState:
    """Advance one implicit step of nominal size dt.

    On Newton stagnation the step is retried with halved dt (up to the
    configured number of halvings); the returned state advances by whatever
    step size succeeded.  Raises StepFailure after the last halving.
    """
    cfg = config if config is not None else SolverConfig(dt=dt)
    grid = state.pressure.grid
    p_old = state.pressure.values
    dt_try = float(dt)
    halvings = 0
    while True:
        t_new = state.time + dt_try
        c, iters, rnorm, pack, ok = _attempt_step(grid, poly, flux, cfg, p_old, dt_try, t_new)
        if ok:
            break
        halvings += 1
        if halvings > cfg.max_dt_halvings:
            raise StepFailure(state.time, dt_try, halvings - 1, rnorm)
        dt_try *= 0.5

    # boundary outflow accumulator matches the implicit scheme's quadrature
    inc = dt_try * flux.boundary_integral(grid, t_new)
    y = inc - state._acc_comp
    acc_new = state.accumulated_boundary_outflow + y
    comp_new = (acc_new - state.accumulated_boundary_outflow) - y

    # uniform projection: pin the discrete mass balance to rounding level
    expected_mass = state.initial_mass - acc_new
    shift = (expected_mass - float(c.sum()) * grid.cell_volume) / grid.domain_volume
    c = c + shift

    e_exact, e_cont = _energy_terms(grid, flux, pack, p_old, c, dt_try, t_new)
    mass_resid = abs(float(c.sum()) * grid.cell_volume - expected_mass)
    pbar = c - c.mean()
    diag = StepDiagnostics(
        newton_iters=iters,
        residual=rnorm,
        dt_used=dt_try,
        halvings=halvings,
        mass_residual=mass_resid,
        energy_residual=e_exact,
        energy_residual_continuum=e_cont,
        l2_pbar=_l2(grid, pbar),
    )
    return SolverState(
        time=t_new,
        pressure=ScalarField(grid, c),
        accumulated_boundary_outflow=acc_new,
        initial_mass=state.initial_mass,
        step_diagnostics=diag,
        _acc_comp=comp_new,
    )


# ---------------------------------------------------------------------------
# Runs with observation logs


@dataclass(frozen=True)
class ObserverSpec:
    epochs: tuple
    s_values: tuple = ()
    deltas: tuple = ()
    keep_fields: bool = False

    def __post_init__(self):
        eps = tuple(float(t) for t in self.epochs)
        object.__setattr__(self, "epochs", eps)
        if not eps:
            raise ValueError("at least one observation epoch required")
        if any(t2 <= t1 for t1, t2 in zip(eps, eps[1:])) or eps[0] <= 0.0:
            raise ValueError("epochs must be strictly increasing and positive")
        object.__setattr__(self, "s_values", tuple(float(s) for s in self.s_values))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))


@dataclass
class RunLog:
    columns: dict
    pbar_fields: list
    summary: dict

    @property
    def t(self):
        return np.array(self.columns["t"])

    def series(self, name):
        return np.array(self.columns[name])

    def column_names(self):
        return list(self.columns.keys())

    def to_csv(self, path):
        names = self.column_names()
        lines = [",".join(names)]
        n = len(self.columns["t"])
        for i in range(n):
            lines.append(",".join(repr(self.columns[name][i]) for name in names))
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")


@dataclass
class RunResult:
    state: SolverState
    log: RunLog


def _log_columns(obs: ObserverSpec):
    names = ["t", "L2_pbar", "Linf_pbar", "Linf_pbar_t", "Linf_pbar_t_pde", "JH", "Kgrad2"]
    names += [f"grad_L{s:g}" for s in obs.s_values]
    names += [f"Kgrad_{s:g}" for s in obs.s_values]
    names += [f"hess_norm_{d:g}" for d in obs.deltas]
    names += [
        "mass_balance_residual",
        "energy_residual",
        "energy_residual_continuum",
        "pbar_shift_crosscheck",
        "newton_iters",
    ]
    return {name: [] for name in names}


def _weighted_gradient_integrals(poly, f: ScalarField, s_values, region_slices):
    """(JH, Kgrad2, per-s interior norms and weighted integrals)."""
    grid = f.grid
    vol = grid.cell_volume
    mag = cell_gradient_magnitude(f)
    s_vel, K, _ = poly.conductivity_arrays(mag)
    H = poly.h_arrays(s_vel)
    jh = float(np.sum(H)) * vol
    kgrad2 = float(np.sum(K * mag * mag)) * vol
    mag_i = mag[region_slices]
    K_i = K[region_slices]
    grad_norms = []
    kgrad_s = []
    for s in s_values:
        grad_norms.append(float((np.sum(mag_i**s) * vol) ** (1.0 / s)))
        kgrad_s.append(float(np.sum(K_i * mag_i**s)) * vol)
    return jh, kgrad2, grad_norms, kgrad_s


def run(initial: ScalarField, poly, flux, config: SolverConfig, t_end, observer: ObserverSpec) -> RunResult:
    """Advance to t_end, emitting the observation log at the given epochs.

    Epochs beyond t_end are rejected; t=0 is always logged as the first row.
    The run summary tracks per-step invariants (mass balance, energy
    balance, dissipation monotonicity when the flux is identically zero).
    """
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if observer.epochs[-1] > t_end * (1.0 + 1e-12):
        raise ValueError("observation epochs exceed t_end")

    grid = initial.grid
    state = initial_state(initial)
    cols = _log_columns(observer)
    pbar_fields = []
    summary = {
        "initial_mass": state.initial_mass,
        "total_steps": 0,
        "max_newton_iters": 0,
        "max_mass_residual": 0.0,
        "max_energy_residual": 0.0,
        "max_energy_residual_continuum": 0.0,
        "dissipation_checked": bool(flux.is_zero),
        "dissipation_violations": 0,
        "max_dissipation_violation": 0.0,
        "dt_halvings": 0,
    }

    inner = grid.interior_slices
    prev_pbar = None
    prev_t = 0.0

    def emit(t, step_agg):
        nonlocal prev_pbar, prev_t
        pbar = zero_mean_shift(state.pressure)
        cols["t"].append(float(t))
        cols["L2_pbar"].append(norm_Ls(pbar, 2.0))
        cols["Linf_pbar"].append(norm_Ls(pbar, np.inf))
        if prev_pbar is None:
            cols["Linf_pbar_t"].append(float("nan"))
        else:
            rate = (pbar.values - prev_pbar) / (t - prev_t)
            cols["Linf_pbar_t"].append(float(np.abs(rate[inner]).max()))
        r_pde, _, _ = _residual_values(
            grid, poly, flux, state.pressure.values, state.pressure.values, 1.0, t
        )
        q = flux.boundary_integral(grid, t) / grid.domain_volume
        cols["Linf_pbar_t_pde"].append(float(np.abs(-r_pde[inner] + q).max()))
        jh, kgrad2, grad_norms, kgrad_s = _weighted_gradient_integrals(
            poly, state.pressure, observer.s_values, inner
        )
        cols["JH"].append(jh)
        cols["Kgrad2"].append(kgrad2)
        for s, gval, kval in zip(observer.s_values, grad_norms, kgrad_s):
            cols[f"grad_L{s:g}"].append(gval)
            cols[f"Kgrad_{s:g}"].append(kval)
        for d in observer.deltas:
            try:
                cols[f"hess_norm_{d:g}"].append(hessian_norm(state.pressure, d, "interior"))
            except ValueError:
                cols[f"hess_norm_{d:g}"].append(float("nan"))
        cols["mass_balance_residual"].append(state.mass_residual if t > 0 else 0.0)
        cols["energy_residual"].append(step_agg["energy"])
        cols["energy_residual_continuum"].append(step_agg["energy_cont"])
        shift_based = state.pressure.values - (state.initial_mass - state.accumulated_boundary_outflow) / grid.domain_volume
        cols["pbar_shift_crosscheck"].append(float(np.abs(pbar.values - shift_based).max()))
        cols["newton_iters"].append(step_agg["iters"])
        if observer.keep_fields:
            pbar_fields.append(pbar)
        prev_pbar = pbar.values.copy()
        prev_t = t

    emit(0.0, {"energy": 0.0, "energy_cont": 0.0, "iters": 0})

    for target in observer.epochs:
        agg = {"energy": 0.0, "energy_cont": 0.0, "iters": 0}
        while state.time < target - 1e-12 * max(1.0, target):
            dt_step = min(config.dt, target - state.time)
            l2_before = state.step_diagnostics.l2_pbar if summary["total_steps"] else _l2(
                grid, state.pressure.values - state.pressure.values.mean()
            )
            state = newton_step(state, dt_step, poly, flux, config)
            d = state.step_diagnostics
            summary["total_steps"] += 1
            summary["max_newton_iters"] = max(summary["max_newton_iters"], d.newton_iters)
            summary["max_mass_residual"] = max(summary["max_mass_residual"], d.mass_residual)
            summary["max_energy_residual"] = max(summary["max_energy_residual"], d.energy_residual)
            summary["max_energy_residual_continuum"] = max(
                summary["max_energy_residual_continuum"], d.energy_residual_continuum
            )
            summary["dt_halvings"] += d.halvings
            agg["energy"] = max(agg["energy"], d.energy_residual)
            agg["energy_cont"] = max(agg["energy_cont"], d.energy_residual_continuum)
            agg["iters"] = max(agg["iters"], d.newton_iters)
            if summary["dissipation_checked"]:
                slack = 1e-11 * (1.0 + l2_before) + 1e-14
                excess = d.l2_pbar - l2_before
                if excess > slack:
                    summary["dissipation_violations"] += 1
                    summary["max_dissipation_violation"] = max(
                        summary["max_dissipation_violation"], excess
                    )
        emit(state.time, agg)

    return RunResult(state=state, log=RunLog(columns=cols, pbar_fields=pbar_fields, summary=summary))


# ---------------------------------------------------------------------------
# Initial data families and run specifications


def make_initial(grid: Grid, family="cosine", amplitude=1.0, value=0.0, modes=None, max_mode=3, seed=0):
    """Built-in initial data: constants, cosine modes (flux-compatible), and
    band-limited random smooth fields."""
    if family == "constant":
        return ScalarField(grid, np.full(grid.cells, float(value)))
    axes = [grid.centers(d) / grid.extents[d] for d in range(grid.dim)]
    if family == "cosine":
        if modes is None:
            modes = (1,) * grid.dim
        vals = np.ones(grid.cells)
        for d in range(grid.dim):
            c = np.cos(modes[d] * math.pi * axes[d])
            vals = vals * (c if grid.dim == 1 else c.reshape([-1 if k == d else 1 for k in range(2)]))
        return ScalarField(grid, amplitude * vals)
    if family == "random_bandlimited":
        rng = np.random.default_rng(seed)
        vals = np.zeros(grid.cells)
        ranges = [range(max_mode + 1)] * grid.dim
        import itertools

        for ks in itertools.product(*ranges):
            if all(k == 0 for k in ks):
                continue
            coef = rng.standard_normal() / (1.0 + sum(k * k for k in ks))
            mode = np.ones(grid.cells)
            for d, k in enumerate(ks):
                c = np.cos(k * math.pi * axes[d])
                mode = mode * (c if grid.dim == 1 else c.reshape([-1 if j == d else 1 for j in range(2)]))
            vals += coef * mode
        peak = np.abs(vals).max()
        if peak > 0:
            vals *= amplitude / peak
        return ScalarField(grid, vals)
    raise ValueError(f"unknown initial data family {family!r}")


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce one simulation run."""

    grid: Grid
    poly: ForchheimerPolynomial
    flux: BoundaryFlux
    initial: ScalarField
    config: SolverConfig
    observer: ObserverSpec

    @property
    def t_end(self):
        return self.observer.epochs[-1]

    def run(self) -> RunResult:
        return run(self.initial, self.poly, self.flux, self.config, self.t_end, self.observer)

    def with_flux(self, flux):
        return replace(self, flux=flux)

    def with_poly(self, poly):
        return replace(self, poly=poly)

    def with_initial(self, initial):
        return replace(self, initial=initial)
