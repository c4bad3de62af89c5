"""Subcommand pipelines, exit codes, and emitted artifacts."""

import json
import subprocess
import sys

import numpy as np
import pytest

from nematicq.cli import main
from nematicq.fieldio import read_field


def write_config(tmp_path, **overrides):
    payload = {
        "nx": 8,
        "ny": 8,
        "lambda2": 5.0,
        "a": -1.0,
        "b": 1.0,
        "c": 1.0,
    }
    payload.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(payload))
    return path


def manifest_outputs(out_dir):
    payload = json.loads((out_dir / "run.json").read_text())
    return payload, sorted(payload["outputs"])


class TestToyCommands:
    def test_landscape_toy_emits_nine_nodes(self, tmp_path):
        rc = main(["landscape", "--toy", "--out", str(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "landscape.json").read_text())
        assert len(payload["nodes"]) == 9
        indices = sorted(n["index"] for n in payload["nodes"])
        assert indices == [0, 0, 0, 0, 1, 1, 1, 1, 2]
        manifest, outputs = manifest_outputs(tmp_path)
        emitted = sorted(p.name for p in tmp_path.iterdir())
        assert outputs == emitted

    def test_string_toy_barrier(self, tmp_path):
        rc = main(["string", "--toy", "--out", str(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "summary.json").read_text())
        assert abs(payload["barrier_forward"] - 1.0) < 1e-4
        assert abs(payload["barrier_backward"] - 1.0) < 1e-4
        assert payload["ts_lambda1"] < 0.0
        profile = (tmp_path / "profile.csv").read_text().splitlines()
        assert profile[0] == "node,alpha,energy"
        assert len(profile) == 17

    def test_saddle_toy(self, tmp_path):
        rc = main(["saddle", "--toy", "--k", "1", "--out", str(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "saddle.json").read_text())
        assert payload["morse_index"] == 1
        assert abs(payload["energy"] - 1.0) < 1e-10
        assert len(payload["lambda_spectrum"]) >= 2

    def test_hedgehog_profile(self, tmp_path):
        rc = main(["hedgehog", "--out", str(tmp_path), "-R", "10", "-N", "128"])
        assert rc == 0
        lines = (tmp_path / "hedgehog.csv").read_text().splitlines()
        assert lines[0] == "r,h"
        assert len(lines) == 130


class TestMaierSaupe:
    def test_three_branches(self, tmp_path):
        rc = main(["maier-saupe", "--alpha", "7.0", "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "branches.csv").read_text().splitlines()
        assert len(lines) == 4

    def test_single_branch_below_critical(self, tmp_path):
        rc = main(["maier-saupe", "--alpha", "6.0", "--out", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "branches.csv").read_text().splitlines()
        assert len(lines) == 2

    def test_leslie_output(self, tmp_path):
        rc = main(
            ["maier-saupe", "--alpha", "8.0", "--gamma1", "1.3", "--out", str(tmp_path)]
        )
        assert rc == 0
        leslie = json.loads((tmp_path / "leslie.json").read_text())
        assert set(leslie) == {"isotropic", "prolate", "oblate"}
        pro = leslie["prolate"]
        assert pro["gamma1"] == 1.3
        assert pro["alpha2"] + pro["alpha3"] == pytest.approx(pro["alpha6"] - pro["alpha5"])

    def test_missing_alpha(self, tmp_path, capsys):
        rc = main(["maier-saupe", "--out", str(tmp_path)])
        assert rc == 1
        assert "alpha" in capsys.readouterr().err

    def test_invalid_alpha(self, tmp_path):
        assert main(["maier-saupe", "--alpha", "-2.0", "--out", str(tmp_path)]) == 1

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["maier-saupe", "--alpha", "7.2", "--out", str(a)]) == 0
        assert main(["maier-saupe", "--alpha", "7.2", "--out", str(b)]) == 0
        assert (a / "branches.csv").read_bytes() == (b / "branches.csv").read_bytes()


class TestConfigCommands:
    def test_minimize_pipeline(self, tmp_path):
        cfg = write_config(tmp_path, init="diagonal(d1)", tol=1e-7)
        out = tmp_path / "out"
        rc = main(["minimize", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        payload = json.loads((out / "minimize.json").read_text())
        assert payload["converged"] is True
        assert payload["grad_inf_norm"] < 1e-7
        f = read_field(out / "field.csv")
        assert f.domain.nx == 8
        manifest, outputs = manifest_outputs(out)
        assert sorted(p.name for p in out.iterdir()) == outputs

    def test_flow_pipeline_reports_stability(self, tmp_path):
        cfg = write_config(tmp_path, init="isotropic", tol=1e-5, dt=0.5, max_steps=20000)
        out = tmp_path / "out"
        rc = main(["flow", "--config", str(cfg), "--out", str(out)])
        assert rc == 0
        payload = json.loads((out / "flow.json").read_text())
        assert payload["stable"] is True
        assert payload["steps"] > 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "step,time,energy,modified_energy,grad_inf_norm"
        assert len(lines) == payload["steps"] + 2

    def test_flow_budget_exhaustion_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, init="isotropic", tol=1e-9, dt=0.1, max_steps=3)
        out = tmp_path / "out"
        rc = main(["flow", "--config", str(cfg), "--out", str(out)])
        assert rc == 2
        # partial outputs still written
        assert (out / "trajectory.csv").exists()
        assert (out / "run.json").exists()
        assert not (out / "field.csv").exists()

    def test_missing_lambda2_names_key(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"nx": 8, "ny": 8, "a": -1.0, "b": 1.0, "c": 1.0}))
        rc = main(["minimize", "--config", str(path), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "lambda2" in capsys.readouterr().err

    def test_unknown_key_exits_1(self, tmp_path, capsys):
        cfg = write_config(tmp_path, mystery=3)
        rc = main(["minimize", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "mystery" in capsys.readouterr().err

    def test_config_required(self, tmp_path, capsys):
        rc = main(["minimize", "--out", str(tmp_path)])
        assert rc == 1
        assert "config" in capsys.readouterr().err

    def test_string_needs_endpoints(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        rc = main(["string", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "field-a" in capsys.readouterr().err


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "nematicq.cli",
                "maier-saupe",
                "--alpha",
                "6.0",
                "--out",
                str(tmp_path),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert (tmp_path / "branches.csv").exists()
