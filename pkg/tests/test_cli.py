import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qbound.cli import run
from qbound.povm import povm_to_json


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


@pytest.fixture
def trine_file(tmp_path, trine):
    return write(tmp_path, "trine.json", povm_to_json(trine))


@pytest.fixture
def cross_file(tmp_path, cross):
    return write(tmp_path, "cross.json", povm_to_json(cross))


class TestValidate:
    def test_valid(self, trine_file, capsys):
        assert run(["validate", trine_file]) == 0
        assert capsys.readouterr().out.strip() == "valid"

    def test_invalid(self, tmp_path, capsys):
        bad = {"dim": 2, "elements": [{"weight": 0.6, "bloch": [0, 0, 1]}, {"weight": 0.6, "bloch": [0, 0, -1]}]}
        assert run(["validate", write(tmp_path, "bad.json", bad)]) == 1
        assert "weights sum" in capsys.readouterr().out

    def test_malformed_json(self, tmp_path):
        assert run(["validate", write(tmp_path, "broken.json", "{not json")]) == 1

    def test_missing_file(self, tmp_path):
        assert run(["validate", str(tmp_path / "absent.json")]) == 1


class TestDecompose:
    def test_cross(self, cross_file, capsys):
        assert run(["decompose", cross_file]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["weights"] == [0.5, 0.5]
        assert out["leaf_outcome_counts"] == [2, 2]

    def test_round_trip(self, tmp_path, cross_file):
        target = tmp_path / "dec.json"
        assert run(["decompose", cross_file, "-o", str(target)]) == 0
        for i, branch in enumerate(json.loads(target.read_text())["branches"]):
            assert run(["validate", write(tmp_path, f"b{i}.json", branch)]) == 0

    def test_span(self, tmp_path, worked, capsys):
        povm = write(tmp_path, "w.json", povm_to_json(worked))
        span = write(tmp_path, "s.json", {"dim": 2, "states": [{"bloch": [1, 0, 0]}, {"bloch": [0, 0, 1]}]})
        assert run(["decompose", povm, "--span", span]) == 0
        assert max(json.loads(capsys.readouterr().out)["leaf_outcome_counts"]) <= 3


class TestBound:
    def test_pm(self, capsys):
        assert run(["bound", "pm", "--k", "2", "--l", "3"]) == 0
        assert capsys.readouterr().out.strip() == "1.584962500721"

    def test_bell(self, capsys):
        assert run(["bound", "bell", "--nx", "2", "--na", "2", "--nb", "8"]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(math.log2(5), abs=1e-12)

    def test_domain(self):
        assert run(["bound", "pm", "--k", "0", "--l", "3"]) == 1


class TestCertify:
    def test_fitted_params(self, capsys):
        assert run(["certify", "--delta", "0.7", "--params", "fit"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["dual_gap"] <= 1e-6
        assert 0 < out["h_min"] <= math.log2(3) + 1e-6

    def test_params_file(self, tmp_path, capsys):
        path = write(tmp_path, "p.json", {"theta1": 0.0, "theta2": 2.0, "lambda1": 0.5})
        assert run(["certify", "--delta", "0.5", "--params", path]) == 0
        assert json.loads(capsys.readouterr().out)["params"]["lambda1"] == 0.5

    def test_delta_one(self):
        assert run(["certify", "--delta", "1", "--params", "fit"]) == 1

    def test_infeasible_stats(self, tmp_path):
        path = write(tmp_path, "stats.json", {"stats": [[1, 0], [0, 1], [0, 0]]})
        assert run(["certify", "--delta", "0.5", "--stats", path]) == 2

    def test_stats(self, tmp_path, capsys):
        path = write(tmp_path, "stats.json", {"stats": np.full((3, 2), 1 / 3).tolist()})
        assert run(["certify", "--delta", "0.5", "--stats", path]) == 0
        assert json.loads(capsys.readouterr().out)["p_guess"] == pytest.approx(1.0, abs=1e-6)

    def test_auto_deterministic(self, capsys):
        argv = ["certify", "--delta", "0.4", "--restarts", "2", "--seed", "3"]
        assert run(argv) == 0
        first = capsys.readouterr().out
        assert run(argv) == 0
        assert capsys.readouterr().out == first


class TestCurve:
    def test_csv_and_determinism(self, tmp_path):
        argv = ["curve", "--delta-min", "0.2", "--delta-max", "0.6", "--steps", "3", "--restarts", "1"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(argv + ["-o", str(a)]) == 0
        assert run(argv + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0].startswith("delta,p_guess,h_min")
        assert len(lines) == 4

    def test_seed_env(self, tmp_path, monkeypatch):
        argv = ["curve", "--delta-min", "0.5", "--delta-max", "0.5", "--steps", "1", "--restarts", "1"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        monkeypatch.setenv("QBOUND_SEED", "11")
        assert run(argv + ["--seed", "1", "-o", str(a)]) == 0
        assert run(argv + ["--seed", "11", "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_bad_grid(self):
        assert run(["curve", "--delta-min", "0.5", "--delta-max", "1.0", "--steps", "3"]) == 1
        assert run(["curve", "--delta-min", "0.1", "--delta-max", "0.5", "--steps", "0"]) == 1


class TestUsage:
    def test_unknown_flag(self):
        assert run(["bound", "pm", "--k", "2", "--l", "3", "--bogus"]) == 1

    def test_no_command(self):
        assert run([]) == 1

    def test_help(self, capsys):
        assert run(["--help"]) == 0
        assert "certify" in capsys.readouterr().out

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "qbound", "bound", "pm", "--k", "4", "--l", "100"], capture_output=True, text=True)
        assert out.returncode == 0 and out.stdout.strip() == "2.321928094887"
