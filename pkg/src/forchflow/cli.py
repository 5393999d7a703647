"""Scenario configuration and the simulate / verify / sweep / lemma-check
command line.

Scenario files are JSON; unknown keys are rejected, defaults are filled in,
and the fully normalized scenario (with its hash) is echoed next to every
output so runs are reproducible byte for byte.  The environment variable
FORCHFLOW_THREADS caps concurrency of independent ladder runs.
"""

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import estimates, sequences, stability
from .constitutive import ForchheimerPolynomial, PRESETS, degree_condition
from .grid import BoundaryFlux, Grid, save_field
from .kernels import ACTIVE_BACKEND
from .solver import ObserverSpec, RunSpec, SolverConfig, StepFailure, make_initial


class ScenarioError(ValueError):
    pass


def _check_keys(d, allowed, context):
    unknown = set(d) - set(allowed)
    if unknown:
        raise ScenarioError(f"{context}: unknown keys {sorted(unknown)}")


_DEFAULTS = {
    "name": "scenario",
    "poly": {"pairs": [[0.0, 1.0], [1.0, 1.0]]},
    "grid": {"dim": 1, "cells": [64], "extents": [1.0], "interior_margin": 0.125},
    "initial": {"family": "cosine", "amplitude": 1.0},
    "flux": {"family": "constant", "amplitude": 0.0},
    "solver": {
        "dt": 1e-3,
        "t_end": 1.0,
        "newton_tol": 1e-10,
        "newton_max_iter": 50,
        "linear_tol": 1e-12,
        "max_dt_halvings": 10,
    },
    "observe": {"n_epochs": 50},
    "norms": {"s": [2.0], "delta": []},
    "seed": 0,
}


def _normalize_poly(spec):
    _check_keys(spec, {"pairs", "preset", "params"}, "poly")
    if "preset" in spec:
        name = spec["preset"]
        if name not in PRESETS:
            raise ScenarioError(f"poly.preset: unknown preset {name!r} (have {sorted(PRESETS)})")
        poly = PRESETS[name](**spec.get("params", {}))
        return {"pairs": poly.to_pairs()}
    if "pairs" not in spec:
        raise ScenarioError("poly: needs 'pairs' or 'preset'")
    pairs = spec["pairs"]
    if not pairs or any(len(p) != 2 for p in pairs):
        raise ScenarioError("poly.pairs: expected a nonempty list of [exponent, coefficient] pairs")
    try:
        poly = ForchheimerPolynomial.from_pairs(pairs)
    except ValueError as exc:
        raise ScenarioError(f"poly: {exc}") from exc
    return {"pairs": poly.to_pairs()}


def _normalize_section(spec, defaults, context, validators=()):
    _check_keys(spec, set(defaults), context)
    out = dict(defaults)
    out.update(spec)
    for check in validators:
        check(out)
    return out


def normalize_scenario(raw, seed_override=None):
    """Validate, fill defaults, and return the canonical scenario dict."""
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    _check_keys(raw, set(_DEFAULTS), "scenario")
    out = {"name": str(raw.get("name", _DEFAULTS["name"]))}
    out["poly"] = _normalize_poly(raw.get("poly", _DEFAULTS["poly"]))
    poly = ForchheimerPolynomial.from_pairs(out["poly"]["pairs"])

    gspec = dict(raw.get("grid", _DEFAULTS["grid"]))
    _check_keys(gspec, {"dim", "cells", "extents", "interior_margin"}, "grid")
    dim = int(gspec.get("dim", 1))
    cells = [int(c) for c in gspec.get("cells", [64] * dim)]
    extents = [float(e) for e in gspec.get("extents", [1.0] * dim)]
    margin = float(gspec.get("interior_margin", 0.125))
    try:
        Grid(dim=dim, cells=tuple(cells), extents=tuple(extents), interior_margin=margin)
    except ValueError as exc:
        raise ScenarioError(f"grid: {exc}") from exc
    out["grid"] = {"dim": dim, "cells": cells, "extents": extents, "interior_margin": margin}

    ispec = dict(raw.get("initial", _DEFAULTS["initial"]))
    _check_keys(ispec, {"family", "amplitude", "value", "modes", "max_mode"}, "initial")
    family = ispec.get("family", "cosine")
    if family not in ("constant", "cosine", "random_bandlimited"):
        raise ScenarioError(f"initial.family: unknown family {family!r}")
    norm_initial = {"family": family}
    if family == "constant":
        norm_initial["value"] = float(ispec.get("value", 0.0))
    else:
        norm_initial["amplitude"] = float(ispec.get("amplitude", 1.0))
    if family == "cosine":
        norm_initial["modes"] = [int(m) for m in ispec.get("modes", [1] * dim)]
        if len(norm_initial["modes"]) != dim:
            raise ScenarioError("initial.modes: length must match grid dim")
    if family == "random_bandlimited":
        norm_initial["max_mode"] = int(ispec.get("max_mode", 3))
    out["initial"] = norm_initial

    fspec = dict(raw.get("flux", _DEFAULTS["flux"]))
    _check_keys(fspec, {"family", "amplitude", "rate", "exponent", "omega", "offset", "weight"}, "flux")
    try:
        flux = BoundaryFlux(
            family=fspec.get("family", "constant"),
            amplitude=float(fspec.get("amplitude", 0.0)),
            rate=float(fspec.get("rate", 1.0)),
            exponent=float(fspec.get("exponent", 0.0)),
            omega=float(fspec.get("omega", 1.0)),
            offset=float(fspec.get("offset", 0.0)),
            weight=fspec.get("weight", "uniform"),
        )
    except ValueError as exc:
        raise ScenarioError(f"flux: {exc}") from exc
    out["flux"] = {
        "family": flux.family,
        "amplitude": flux.amplitude,
        "rate": flux.rate,
        "exponent": flux.exponent,
        "omega": flux.omega,
        "offset": flux.offset,
        "weight": flux.weight,
    }

    sspec = dict(raw.get("solver", {}))
    ssec = _normalize_section(sspec, _DEFAULTS["solver"], "solver")
    ssec = {
        "dt": float(ssec["dt"]),
        "t_end": float(ssec["t_end"]),
        "newton_tol": float(ssec["newton_tol"]),
        "newton_max_iter": int(ssec["newton_max_iter"]),
        "linear_tol": float(ssec["linear_tol"]),
        "max_dt_halvings": int(ssec["max_dt_halvings"]),
    }
    if ssec["dt"] <= 0:
        raise ScenarioError("solver.dt: must be positive")
    if ssec["t_end"] <= 0:
        raise ScenarioError("solver.t_end: must be positive")
    out["solver"] = ssec

    ospec = dict(raw.get("observe", _DEFAULTS["observe"]))
    _check_keys(ospec, {"n_epochs", "epochs"}, "observe")
    if "epochs" in ospec:
        epochs = [float(t) for t in ospec["epochs"]]
        if not epochs or any(t2 <= t1 for t1, t2 in zip(epochs, epochs[1:])) or epochs[0] <= 0:
            raise ScenarioError("observe.epochs: must be strictly increasing and positive")
        if epochs[-1] > ssec["t_end"] * (1 + 1e-12):
            raise ScenarioError("observe.epochs: must not exceed solver.t_end")
        out["observe"] = {"epochs": epochs}
    else:
        n = int(ospec.get("n_epochs", 50))
        if n < 1:
            raise ScenarioError("observe.n_epochs: must be >= 1")
        out["observe"] = {"n_epochs": n}

    nspec = dict(raw.get("norms", _DEFAULTS["norms"]))
    _check_keys(nspec, {"s", "delta"}, "norms")
    s_values = sorted(float(s) for s in nspec.get("s", [2.0]))
    if any(s < 1.0 for s in s_values):
        raise ScenarioError("norms.s: values must be >= 1")
    deltas = sorted(float(d) for d in nspec.get("delta", []))
    for d in deltas:
        if not (0.0 < d <= poly.a):
            raise ScenarioError(f"norms.delta: {d} outside (0, a] with a={poly.a:.6g}")
    out["norms"] = {"s": s_values, "delta": deltas}

    out["seed"] = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)
    return out


def scenario_hash(normalized):
    return hashlib.sha256(canonical_json(normalized).encode("ascii")).hexdigest()


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2)


@dataclass(frozen=True)
class Scenario:
    data: dict

    @classmethod
    def from_dict(cls, raw, seed_override=None):
        return cls(normalize_scenario(raw, seed_override))

    @property
    def name(self):
        return self.data["name"]

    @property
    def hash(self):
        return scenario_hash(self.data)

    @property
    def poly(self):
        return ForchheimerPolynomial.from_pairs(self.data["poly"]["pairs"])

    @property
    def grid(self):
        g = self.data["grid"]
        return Grid(dim=g["dim"], cells=tuple(g["cells"]), extents=tuple(g["extents"]),
                    interior_margin=g["interior_margin"])

    @property
    def flux(self):
        return BoundaryFlux(**self.data["flux"])

    def epochs(self):
        obs = self.data["observe"]
        t_end = self.data["solver"]["t_end"]
        if "epochs" in obs:
            return tuple(obs["epochs"])
        n = obs["n_epochs"]
        return tuple(t_end * (k + 1) / n for k in range(n))

    def to_run_spec(self, keep_fields=False) -> RunSpec:
        d = self.data
        grid = self.grid
        ini = d["initial"]
        kwargs = {k: v for k, v in ini.items() if k != "family"}
        initial = make_initial(grid, family=ini["family"], seed=d["seed"], **kwargs)
        cfg = SolverConfig(
            dt=d["solver"]["dt"],
            newton_tol=d["solver"]["newton_tol"],
            newton_max_iter=d["solver"]["newton_max_iter"],
            linear_tol=d["solver"]["linear_tol"],
            max_dt_halvings=d["solver"]["max_dt_halvings"],
        )
        observer = ObserverSpec(
            epochs=self.epochs(),
            s_values=tuple(d["norms"]["s"]),
            deltas=tuple(d["norms"]["delta"]),
            keep_fields=keep_fields,
        )
        return RunSpec(grid=grid, poly=self.poly, flux=self.flux, initial=initial,
                       config=cfg, observer=observer)

    def degree_flags(self):
        dc = degree_condition(self.poly, self.grid.dim)
        return {"satisfies_dc": dc.satisfies_dc, "satisfies_sdc": dc.satisfies_sdc}


def load_scenario(path, seed_override=None) -> Scenario:
    """Parse and validate a scenario file; errors carry line info (parse) or
    the offending field (validation)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return Scenario.from_dict(raw, seed_override)


# ---------------------------------------------------------------------------
# Commands


def _write_json(path, obj):
    Path(path).write_text(canonical_json(obj) + "\n", encoding="ascii")


def _write_failure(out_dir, payload):
    try:
        _write_json(Path(out_dir) / "failure.json", payload)
    except OSError:
        print(json.dumps(payload), file=sys.stderr)


def _prepare_out(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(scenario: Scenario, out_dir) -> int:
    out = _prepare_out(out_dir)
    _write_json(out / "scenario.normalized.json", scenario.data)
    spec = scenario.to_run_spec()
    try:
        result = spec.run()
    except StepFailure as exc:
        _write_failure(out, {
            "error": "step_failure",
            "message": str(exc),
            "time": exc.time,
            "dt": exc.dt,
            "residual": exc.residual,
            "scenario_hash": scenario.hash,
        })
        return 3
    result.log.to_csv(out / "log.csv")
    save_field(result.state.pressure, out / "final_state.field", time=result.state.time)
    _write_json(out / "result.json", {
        "command": "simulate",
        "status": "ok",
        "scenario": scenario.name,
        "scenario_hash": scenario.hash,
        "degree_condition": scenario.degree_flags(),
        "backend": ACTIVE_BACKEND,
        "summary": result.log.summary,
    })
    return 0


def cmd_verify(scenario: Scenario, out_dir) -> int:
    out = _prepare_out(out_dir)
    _write_json(out / "scenario.normalized.json", scenario.data)
    spec = scenario.to_run_spec()
    try:
        result = spec.run()
    except StepFailure as exc:
        _write_failure(out, {
            "error": "step_failure",
            "message": str(exc),
            "time": exc.time,
            "dt": exc.dt,
            "residual": exc.residual,
            "scenario_hash": scenario.hash,
        })
        return 3
    result.log.to_csv(out / "log.csv")
    poly = scenario.poly
    fn = estimates.flux_functionals(scenario.flux, poly.a, result.log.t)
    exps = estimates.TheoryExponents(a=poly.a, n=scenario.grid.dim)
    report = estimates.standard_report(
        result.log,
        fn,
        exps,
        scenario.grid,
        initial_mass=result.state.initial_mass,
        s_values=spec.observer.s_values,
        deltas=spec.observer.deltas,
    )
    payload = report.to_json_dict()
    payload.update({
        "command": "verify",
        "scenario": scenario.name,
        "scenario_hash": scenario.hash,
        "degree_condition": scenario.degree_flags(),
        "backend": ACTIVE_BACKEND,
        "flux_tail": {"A_hat": fn.A_hat, "beta_hat": fn.beta_hat},
    })
    _write_json(out / "report.json", payload)
    return 0 if report.all_passed() else 1


def _pair_csv(path, pair, deltas):
    names = ["t", "L2_Pbar", "Linf_Pbar_interior", "weighted_grad"]
    names += [f"gradP_L{2 - d:g}" for d in deltas]
    cols = [pair.t, pair.l2_Pbar, pair.linf_Pbar_interior, pair.weighted_grad]
    cols += [pair.grad_norm[d] for d in deltas]
    lines = [",".join(names)]
    for i in range(len(pair.t)):
        lines.append(",".join(repr(float(c[i])) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _load_sweep_spec(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    _check_keys(raw, {"scenario", "scenario_path", "axis", "ladder", "epsilons",
                      "flux_param", "direction", "initial_perturbation", "deltas"}, "sweep")
    return raw


def cmd_sweep(spec_path, out_dir, seed_override=None) -> int:
    out = _prepare_out(out_dir)
    raw = _load_sweep_spec(spec_path)
    if "scenario_path" in raw:
        scenario = load_scenario(raw["scenario_path"], seed_override)
    else:
        scenario = Scenario.from_dict(raw.get("scenario", {}), seed_override)
    _write_json(out / "scenario.normalized.json", scenario.data)

    axis = raw.get("axis", "flux_amplitude")
    if "epsilons" in raw:
        epsilons = [float(e) for e in raw["epsilons"]]
    else:
        lad = raw.get("ladder", {"start": 1.0, "ratio": 0.5, "count": 6})
        _check_keys(lad, {"start", "ratio", "count"}, "sweep.ladder")
        epsilons = [float(lad.get("start", 1.0)) * float(lad.get("ratio", 0.5)) ** k
                    for k in range(int(lad.get("count", 6)))]
    deltas = tuple(float(d) for d in raw.get("deltas", scenario.data["norms"]["delta"]))

    base = scenario.to_run_spec(keep_fields=True)
    poly = scenario.poly
    exps = estimates.TheoryExponents(a=poly.a, n=scenario.grid.dim)
    try:
        if axis == "flux_amplitude":
            sweep = stability.sweep_flux_amplitude(base, epsilons, deltas,
                                                   param=raw.get("flux_param", "amplitude"))
            fit_fn = lambda s: stability.flux_dependence_order(s, exps)  # noqa: E731
        elif axis == "coefficient_vector":
            direction = raw.get("direction")
            if direction is None:
                direction = [0.0] * len(poly.coefficients)
                direction[-1] = 1.0
            sweep = stability.sweep_coefficients(base, direction, epsilons, deltas)
            fit_fn = stability.coefficient_dependence_order
        elif axis == "initial_data":
            pspec = raw.get("initial_perturbation", {"family": "cosine", "amplitude": 1.0})
            kwargs = {k: v for k, v in pspec.items() if k != "family"}
            pert = make_initial(scenario.grid, family=pspec.get("family", "cosine"),
                                seed=scenario.data["seed"] + 1, **kwargs)
            sweep = stability.sweep_initial_data(base, pert, epsilons, deltas)
            fit_fn = lambda s: ({}, [])  # noqa: E731
        else:
            raise ScenarioError(f"sweep.axis: unknown axis {axis!r}")
    except StepFailure as exc:
        _write_failure(out, {"error": "step_failure", "message": str(exc), "time": exc.time,
                             "dt": exc.dt, "residual": exc.residual,
                             "scenario_hash": scenario.hash})
        return 3

    for k, pair in enumerate(sweep.pairs):
        _pair_csv(out / f"diff_eps{k}.csv", pair, deltas)

    identical = all(float(s) == 0.0 for s in sweep.sup_l2)
    payload = {
        "command": "sweep",
        "axis": axis,
        "scenario": scenario.name,
        "scenario_hash": scenario.hash,
        "degree_condition": scenario.degree_flags(),
        "backend": ACTIVE_BACKEND,
        "epsilons": list(sweep.epsilons),
        "magnitudes": list(sweep.magnitudes),
        "sup_l2": [float(v) for v in sweep.sup_l2],
        "sup_linf_interior": [float(v) for v in sweep.sup_linf_interior],
        "sup_grad": {f"{d:g}": [float(v) for v in vs] for d, vs in sweep.sup_grad.items()},
    }
    if identical:
        payload["fits"] = {}
        payload["targets"] = []
        payload["pass"] = True
        payload["note"] = "all differences are zero; order fit skipped"
        _write_json(out / "sweep_report.json", payload)
        return 0
    fits, entries = fit_fn(sweep)
    payload["fits"] = {
        name: {"exponent": fit.exponent, "r2": fit.r2, "window": list(fit.window),
               "guaranteed_exponent": _guaranteed_exponent(name, sweep, exps)}
        for name, fit in fits.items()
    }
    payload["targets"] = [e.to_json_dict() for e in entries]
    payload["pass"] = all(e.passed for e in entries if e.applicable)
    _write_json(out / "sweep_report.json", payload)
    return 0 if payload["pass"] else 1


def _guaranteed_exponent(fit_name, sweep, exps):
    if sweep.axis == "flux_amplitude":
        if fit_name == "l2":
            return 1.0
        g1 = exps.gamma1()
        return g1 / (g1 + 1.0)
    if fit_name == "l2":
        return 0.5
    return 0.25


_LEMMA_DEFAULTS = {
    "single_term": {"A": 1.0, "B": 2.0, "mu": 1.0, "Y0": 0.25, "i_max": 40, "rtol": 1e-12},
    "multi_term": {
        "instances": [
            {"terms": [[1.0, 2.0, 1.0], [1.0, 2.0, 2.0]], "y0_factor": 1.0},
            {"terms": [[0.5, 3.0, 0.8], [2.0, 1.7, 1.5], [1.0, 2.5, 2.5]], "y0_factor": 0.9},
            {"terms": [[4.0, 6.0, 0.6]], "y0_factor": 0.5},
        ],
        "n_steps": 200,
        "ceiling": 1e-20,
    },
    "limsup": {
        "cases": [
            {"f": {"kind": "constant", "value": 1.0}, "g": {"kind": "constant", "value": 1.0},
             "h": {"kind": "constant", "value": 1.0}, "limit": 1.0},
            {"f": {"kind": "constant", "value": 1.0}, "g": {"kind": "constant", "value": 2.0},
             "h": {"kind": "constant", "value": 1.0}, "limit": 0.5},
            {"f": {"kind": "exp_decay", "value": 1.0, "rate": 1.0},
             "g": {"kind": "constant", "value": 1.0},
             "h": {"kind": "constant", "value": 1.0}, "limit": 0.0},
        ],
        "T": 0.0,
        "t_end": 50.0,
        "dt": 1e-3,
        "rel_tol": 5e-3,
        "abs_tol": 1e-6,
    },
}


def _profile(spec):
    kind = spec.get("kind", "constant")
    value = float(spec.get("value", 1.0))
    if kind == "constant":
        return lambda t: value
    if kind == "exp_decay":
        rate = float(spec.get("rate", 1.0))
        return lambda t: value * math.exp(-rate * t)
    raise ScenarioError(f"unknown profile kind {kind!r}")


def cmd_lemma_check(spec_path, out_dir) -> int:
    out = _prepare_out(out_dir)
    cfg = json.loads(json.dumps(_LEMMA_DEFAULTS))  # deep copy
    if spec_path is not None:
        text = Path(spec_path).read_text(encoding="utf-8")
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{spec_path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        _check_keys(raw, set(_LEMMA_DEFAULTS), "lemma spec")
        for key in raw:
            cfg[key] = raw[key]

    verdicts = []

    st = cfg["single_term"]
    rec = sequences.GeometricRecurrence(terms=((st["A"], st["B"], st["mu"]),), Y0=st["Y0"])
    seq = sequences.iterate_recurrence(rec, st["i_max"], mode="equality")
    max_rel = 0.0
    for i in range(st["i_max"] + 1):
        bound_log = sequences.single_term_bound_log(st["A"], st["B"], st["mu"], st["Y0"], i)
        cur = seq.log_values[i]
        if np.isfinite(bound_log) and np.isfinite(cur):
            denom = max(abs(bound_log), 1.0)
            max_rel = max(max_rel, abs(cur - bound_log) / denom)
    verdicts.append({
        "lemma": "single-term-closed-form",
        "params": st,
        "statistic": max_rel,
        "threshold": st["rtol"],
        "pass": bool(max_rel <= st["rtol"]),
        "sequence_log10_head": [float(v) / math.log(10.0) for v in seq.log_values[:10]],
    })

    mt = cfg["multi_term"]
    all_small = True
    worst = -math.inf
    insts = []
    for inst in mt["instances"]:
        terms = tuple(tuple(term) for term in inst["terms"])
        probe = sequences.GeometricRecurrence(terms=terms, Y0=0.0)
        thr = sequences.multi_term_threshold(probe)
        y0 = float(inst.get("y0_factor", 1.0)) * thr.threshold
        rec = sequences.GeometricRecurrence(terms=terms, Y0=y0)
        seq = sequences.iterate_recurrence(rec, int(mt["n_steps"]), mode="equality")
        final_log10 = float(seq.log_values[-1]) / math.log(10.0)
        worst = max(worst, final_log10)
        ok = final_log10 < math.log10(mt["ceiling"])
        all_small = all_small and ok
        insts.append({
            "terms": inst["terms"],
            "Y0": y0,
            "final_log10": final_log10,
            "pass": ok,
            "sequence_log10_head": [float(v) / math.log(10.0) for v in seq.log_values[:25]],
        })
    verdicts.append({
        "lemma": "multi-term-threshold",
        "params": {"n_steps": mt["n_steps"], "ceiling": mt["ceiling"]},
        "instances": insts,
        "statistic": worst,
        "threshold": math.log10(mt["ceiling"]),
        "pass": bool(all_small),
    })

    ls = cfg["limsup"]
    cases = []
    all_ok = True
    for case in ls["cases"]:
        res = sequences.limsup_integral(
            _profile(case["h"]), _profile(case["f"]), _profile(case["g"]),
            ls["T"], ls["t_end"], ls["dt"],
        )
        limit = float(case["limit"])
        err = abs(res["observed_limsup"] - limit)
        tol = ls["rel_tol"] * limit + ls["abs_tol"]
        ok = err <= tol
        all_ok = all_ok and ok
        cases.append({
            "case": case,
            "observed": res["observed_limsup"],
            "predicted_bound": res["predicted_bound"],
            "error": err,
            "tolerance": tol,
            "hypothesis": res["hypothesis"],
            "pass": ok,
        })
    verdicts.append({"lemma": "integral-limsup", "cases": cases, "pass": bool(all_ok)})

    payload = {"command": "lemma-check", "backend": ACTIVE_BACKEND,
               "verdicts": verdicts, "pass": all(v["pass"] for v in verdicts)}
    _write_json(out / "lemma_report.json", payload)
    return 0 if payload["pass"] else 1


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="forchflow",
                                     description="Generalized Forchheimer flow harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario and write its observation log")
    p_ver = sub.add_parser("verify", help="run one scenario and evaluate all applicable checks")
    for p in (p_sim, p_ver):
        p.add_argument("--scenario", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)

    p_sweep = sub.add_parser("sweep", help="perturbation ladder with order fits")
    p_sweep.add_argument("--scenario", required=True, help="sweep spec JSON file")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)

    p_lem = sub.add_parser("lemma-check", help="check the recurrence/limsup lemmas numerically")
    p_lem.add_argument("--scenario", default=None, help="optional lemma spec JSON file")
    p_lem.add_argument("--out", required=True)
    p_lem.add_argument("--seed", type=int, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(load_scenario(args.scenario, args.seed), args.out)
        if args.command == "verify":
            return cmd_verify(load_scenario(args.scenario, args.seed), args.out)
        if args.command == "sweep":
            return cmd_sweep(args.scenario, args.out, args.seed)
        if args.command == "lemma-check":
            return cmd_lemma_check(args.scenario, args.out)
    except ScenarioError as exc:
        _write_failure(args.out, {"error": "scenario_error", "message": str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
