"""Scenario loading, command pipelines, determinism, exit codes."""

import json

import pytest

from forchflow import cli


MINIMAL = {
    "poly": {"pairs": [[0.0, 1.0], [1.0, 1.0]]},
    "grid": {"dim": 1, "cells": [32], "extents": [1.0]},
    "flux": {"family": "decaying_exp", "amplitude": 0.5, "rate": 1.0},
}


def write_scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


class TestLoadScenario:
    def test_minimal_gets_defaults(self, tmp_path):
        sc = cli.load_scenario(write_scenario(tmp_path, MINIMAL))
        assert sc.data["solver"]["dt"] == 1e-3
        assert sc.data["observe"] == {"n_epochs": 50}
        assert sc.data["norms"]["s"] == [2.0]
        assert sc.data["seed"] == 0
        assert sc.degree_flags()["satisfies_sdc"] is True

    def test_unknown_key_rejected(self, tmp_path):
        bad = dict(MINIMAL)
        bad["extra_knob"] = 1
        with pytest.raises(cli.ScenarioError, match="extra_knob"):
            cli.load_scenario(write_scenario(tmp_path, bad))

    def test_zero_leading_coefficient_rejected(self, tmp_path):
        bad = dict(MINIMAL)
        bad["poly"] = {"pairs": [[0.0, 0.0], [1.0, 1.0]]}
        with pytest.raises(cli.ScenarioError, match="a0 must be positive"):
            cli.load_scenario(write_scenario(tmp_path, bad))

    def test_parse_error_carries_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "poly": [,]\n}')
        with pytest.raises(cli.ScenarioError, match="broken.json:2"):
            cli.load_scenario(path)

    def test_normalized_round_trip(self, tmp_path):
        sc = cli.load_scenario(write_scenario(tmp_path, MINIMAL))
        again = cli.Scenario.from_dict(sc.data)
        assert again.data == sc.data
        assert again.hash == sc.hash

    def test_seed_override_changes_hash(self, tmp_path):
        p = write_scenario(tmp_path, MINIMAL)
        assert cli.load_scenario(p, 1).hash != cli.load_scenario(p).hash

    def test_delta_outside_range_rejected(self, tmp_path):
        bad = dict(MINIMAL)
        bad["norms"] = {"s": [2.0], "delta": [0.9]}  # a = 1/2 for the two-term law
        with pytest.raises(cli.ScenarioError, match="delta"):
            cli.load_scenario(write_scenario(tmp_path, bad))

    def test_preset_poly(self, tmp_path):
        data = dict(MINIMAL)
        data["poly"] = {"preset": "three_term"}
        sc = cli.load_scenario(write_scenario(tmp_path, data))
        assert sc.poly.n_terms == 2


def fast_scenario(t_end=1.0, n_epochs=10, flux=None):
    data = json.loads(json.dumps(MINIMAL))
    data["solver"] = {"dt": 5e-3, "t_end": t_end}
    data["observe"] = {"n_epochs": n_epochs}
    data["norms"] = {"s": [2.0], "delta": [0.25]}
    if flux is not None:
        data["flux"] = flux
    return data


class TestCommands:
    def test_simulate_writes_outputs(self, tmp_path):
        sc_path = write_scenario(tmp_path, fast_scenario())
        out = tmp_path / "out"
        assert cli.main(["simulate", "--scenario", str(sc_path), "--out", str(out)]) == 0
        assert (out / "log.csv").exists()
        assert (out / "final_state.field").exists()
        result = json.loads((out / "result.json").read_text())
        assert result["status"] == "ok"
        assert result["degree_condition"]["satisfies_sdc"] is True
        assert len(result["scenario_hash"]) == 64

    def test_verify_decay_scenario_exit_zero(self, tmp_path):
        sc_path = write_scenario(tmp_path, fast_scenario(t_end=8.0, n_epochs=40))
        out = tmp_path / "out"
        assert cli.main(["verify", "--scenario", str(sc_path), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["pass"] is True
        targets = {t["target"]: t for t in report["targets"]}
        assert targets["pressure-decay"]["applicable"] is True
        assert targets["pressure-decay"]["pass"] is True
        assert targets["mass-balance"]["pass"] is True

    def test_verify_detects_failure(self, tmp_path):
        # pt-decay hypothesis holds but the horizon is far too short for the
        # rate to settle: the applicable check fails and the exit is nonzero
        data = fast_scenario(t_end=0.4, n_epochs=8,
                             flux={"family": "decaying_exp", "amplitude": 1.0,
                                   "rate": 1.0, "offset": 1.0})
        sc_path = write_scenario(tmp_path, data)
        out = tmp_path / "out"
        rc = cli.main(["verify", "--scenario", str(sc_path), "--out", str(out)])
        report = json.loads((out / "report.json").read_text())
        failed = [t for t in report["targets"] if t["applicable"] and not t["pass"]]
        assert rc == 1 and failed

    def test_simulate_step_failure_exit(self, tmp_path):
        data = fast_scenario()
        data["solver"] = {"dt": 1.0, "t_end": 2.0, "newton_max_iter": 0, "max_dt_halvings": 1}
        sc_path = write_scenario(tmp_path, data)
        out = tmp_path / "out"
        assert cli.main(["simulate", "--scenario", str(sc_path), "--out", str(out)]) == 3
        failure = json.loads((out / "failure.json").read_text())
        assert failure["error"] == "step_failure"
        assert "time" in failure

    def test_byte_identical_reruns(self, tmp_path):
        sc_path = write_scenario(tmp_path, fast_scenario(t_end=2.0, n_epochs=10))
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert cli.main(["verify", "--scenario", str(sc_path), "--out", str(out1)]) == 0
        assert cli.main(["verify", "--scenario", str(sc_path), "--out", str(out2)]) == 0
        for name in ("report.json", "log.csv", "scenario.normalized.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_unknown_scenario_key_exit_two(self, tmp_path):
        bad = dict(MINIMAL)
        bad["typo"] = 1
        sc_path = write_scenario(tmp_path, bad)
        out = tmp_path / "out"
        assert cli.main(["simulate", "--scenario", str(sc_path), "--out", str(out)]) == 2


class TestSweepCommand:
    def test_flux_sweep_report(self, tmp_path):
        spec = {
            "scenario": fast_scenario(t_end=0.5, n_epochs=8),
            "axis": "flux_amplitude",
            "ladder": {"start": 1.0, "ratio": 0.5, "count": 6},
            "deltas": [0.25],
        }
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(spec))
        out = tmp_path / "out"
        assert cli.main(["sweep", "--scenario", str(path), "--out", str(out)]) == 0
        report = json.loads((out / "sweep_report.json").read_text())
        assert report["pass"] is True
        assert report["fits"]["l2"]["exponent"] >= 0.9
        assert report["fits"]["l2"]["guaranteed_exponent"] == 1.0
        assert (out / "diff_eps0.csv").exists() and (out / "diff_eps5.csv").exists()

    def test_identical_sweep_skips_fit(self, tmp_path):
        spec = {
            "scenario": fast_scenario(t_end=0.3, n_epochs=5),
            "axis": "flux_amplitude",
            "epsilons": [0.0, 0.0, 0.0, 0.0],
        }
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(spec))
        out = tmp_path / "out"
        assert cli.main(["sweep", "--scenario", str(path), "--out", str(out)]) == 0
        report = json.loads((out / "sweep_report.json").read_text())
        assert report["note"].startswith("all differences are zero")
        assert report["targets"] == []

    def test_coefficient_sweep(self, tmp_path):
        spec = {
            "scenario": fast_scenario(t_end=0.5, n_epochs=8,
                                      flux={"family": "constant", "amplitude": 0.2}),
            "axis": "coefficient_vector",
            "ladder": {"start": 0.5, "ratio": 0.5, "count": 6},
            "direction": [0.0, 1.0],
            "deltas": [0.25],
        }
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(spec))
        out = tmp_path / "out"
        assert cli.main(["sweep", "--scenario", str(path), "--out", str(out)]) == 0
        report = json.loads((out / "sweep_report.json").read_text())
        assert report["fits"]["l2"]["exponent"] >= 0.45
        assert report["fits"]["l2"]["guaranteed_exponent"] == 0.5


class TestShippedScenarios:
    def test_all_library_files_load(self):
        from pathlib import Path

        root = Path(__file__).resolve().parents[1] / "scenarios"
        files = sorted(root.glob("*.json"))
        assert files, "scenario library missing"
        for path in files:
            if path.name.startswith("sweep_"):
                raw = json.loads(path.read_text())
                sc = cli.Scenario.from_dict(raw["scenario"])
            else:
                sc = cli.load_scenario(path)
            assert sc.degree_flags()["satisfies_sdc"] is True

    def test_darcy_decay_verifies(self, tmp_path):
        from pathlib import Path

        root = Path(__file__).resolve().parents[1] / "scenarios"
        out = tmp_path / "out"
        rc = cli.main(["verify", "--scenario", str(root / "darcy_decay.json"), "--out", str(out)])
        assert rc == 0


class TestLemmaCheckCommand:
    def test_default_built_ins_pass(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["lemma-check", "--out", str(out)]) == 0
        report = json.loads((out / "lemma_report.json").read_text())
        assert report["pass"] is True
        lemmas = {v["lemma"] for v in report["verdicts"]}
        assert lemmas == {"single-term-closed-form", "multi-term-threshold", "integral-limsup"}

    def test_custom_spec(self, tmp_path):
        spec = {"single_term": {"A": 2.0, "B": 3.0, "mu": 0.5, "Y0": 0.01,
                                "i_max": 30, "rtol": 1e-12}}
        path = tmp_path / "lemmas.json"
        path.write_text(json.dumps(spec))
        out = tmp_path / "out"
        assert cli.main(["lemma-check", "--scenario", str(path), "--out", str(out)]) == 0
