from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from fairfront.cli import main
from fairfront.dataset import load_csv
from fairfront.linear_model import WeightVector

# a quick sweep configuration shared by the end-to-end tests below
FAST = ["--cells", "60,20,80,40", "--steps", "200", "--lr", "0.02"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSynth:
    def test_default_preset(self, tmp_path):
        assert main(["synth", "--out", str(tmp_path)]) == 0
        d = load_csv(tmp_path / "data.csv")
        assert d.n == 24783
        stats = json.loads((tmp_path / "data.stats.json").read_text())
        assert stats["cells"] == {"g0_c1": 8725, "g0_c0": 302, "g1_c1": 11895, "g1_c0": 3861}
        prov = json.loads((tmp_path / "provenance.json").read_text())
        assert prov["config"]["seed"] == 0

    def test_unit_cells(self, tmp_path):
        assert main(["synth", "--cells", "1,1,1,1", "--out", str(tmp_path)]) == 0
        assert len((tmp_path / "data.csv").read_text().splitlines()) == 5

    def test_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            assert main(["synth", "--cells", "30,5,30,5", "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "a/data.csv").read_bytes() == (tmp_path / "b/data.csv").read_bytes()


class TestBaseline:
    def test_missing_file(self, tmp_path, capsys):
        missing = tmp_path / "absent.csv"
        assert main(["baseline", "--data", str(missing), "--out", str(tmp_path)]) != 0
        assert str(missing) in capsys.readouterr().err

    def test_separable_csv(self, tmp_path):
        rng = np.random.default_rng(0)
        lines = ["label,group,f0,f1"]
        for i in range(40):
            z, g = i % 2, (i // 2) % 2
            lines.append(f"{z},{g},{(3 if z else -3) + rng.uniform(-1, 1)},{rng.normal()}")
        (tmp_path / "sep.csv").write_text("\n".join(lines) + "\n")
        rc = main(["baseline", "--data", str(tmp_path / "sep.csv"), "--steps", "300",
                   "--lr", "0.05", "--out", str(tmp_path / "o")])
        assert rc == 0
        rep = json.loads((tmp_path / "o/baseline_report.json").read_text())
        assert rep["train"]["overall"] == 1.0 and rep["test"]["overall"] == 1.0
        assert rep["test"]["gap"] == 0.0
        WeightVector.load(tmp_path / "o/theta_baseline.json")

    def test_single_alpha_sweep_matches(self, tmp_path):
        assert main(["baseline", *FAST, "--out", str(tmp_path / "b")]) == 0
        assert main(["sweep", *FAST, "--alphas", "1.0", "--out", str(tmp_path / "s")]) == 0
        base = WeightVector.load(tmp_path / "b/theta_baseline.json")
        swept = WeightVector.load(tmp_path / "s/checkpoints/theta_alpha_1.0.json")
        assert np.array_equal(base.flat(), swept.flat())


@pytest.fixture(scope="module")
def fast_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fast")
    assert main(["sweep", *FAST, "--alphas", "1,0.5,0", "--out", str(out)]) == 0
    return out


class TestSweepVerify:
    def test_outputs(self, fast_run):
        doc = json.loads((fast_run / "front.json").read_text())
        assert len(_rows(fast_run / "front.csv")) == len(doc["points"])
        assert len(doc["points"]) + len(doc["dominated"]) == 3
        assert doc["provenance"]["config"]["steps"] == 200
        assert all(p["test"]["metrics"]["overall"] > 0 for p in doc["points"])
        assert len(list((fast_run / "checkpoints").glob("*.json"))) == 3

    def test_verify_clean(self, fast_run):
        assert main(["verify", str(fast_run / "front.json")]) == 0
        rep = json.loads((fast_run / "verify_report.json").read_text())
        assert rep["mismatches"] == []

    def test_verify_tampered(self, fast_run, tmp_path):
        import shutil

        work = tmp_path / "copy"
        shutil.copytree(fast_run, work)
        ck = work / "checkpoints" / "theta_alpha_0.5.json"
        w = WeightVector.load(ck)
        WeightVector(w.weights + 0.1, w.bias).save(ck)
        assert main(["verify", str(work / "front.json")]) == 1
        rep = json.loads((work / "verify_report.json").read_text())
        assert {m["alpha"] for m in rep["mismatches"]} == {0.5}

    def test_verify_missing_checkpoint(self, fast_run, tmp_path, capsys):
        import shutil

        work = tmp_path / "copy"
        shutil.copytree(fast_run, work)
        (work / "checkpoints" / "theta_alpha_0.0.json").unlink()
        assert main(["verify", str(work / "front.json")]) == 2
        assert "missing checkpoint" in capsys.readouterr().err

    def test_verify_empty_front(self, tmp_path):
        (tmp_path / "front.json").write_text(json.dumps(
            {"epsilon": 0.001, "provenance": {}, "points": [], "dominated": []}))
        assert main(["verify", str(tmp_path / "front.json")]) != 0

    def test_epsilon_zero(self, tmp_path):
        assert main(["sweep", *FAST, "--alphas", "1,0", "--epsilon", "0",
                     "--out", str(tmp_path)]) == 0
        assert all(r["accepted"] == "0" for r in _rows(tmp_path / "front.csv"))


class TestPlotdata:
    def test_tables(self, fast_run, tmp_path):
        n = len(json.loads((fast_run / "front.json").read_text())["points"])
        assert main(["plotdata", str(fast_run / "front.json"), "--out", str(tmp_path)]) == 0
        for name in ("f1", "f2", "acc_overall", "acc_gap", "fpr_g0", "fpr_g1"):
            rows = _rows(tmp_path / f"{name}.csv")
            assert len(rows) == n
            assert list(rows[0]) == ["alpha", "train", "test"]

    def test_single_point(self, fast_run, tmp_path):
        doc = json.loads((fast_run / "front.json").read_text())
        doc["points"] = doc["points"][:1]
        (tmp_path / "one.json").write_text(json.dumps(doc))
        assert main(["plotdata", str(tmp_path / "one.json"), "--out", str(tmp_path / "p")]) == 0
        assert len(_rows(tmp_path / "p/fpr_g1.csv")) == 1

    def test_missing_front(self, tmp_path):
        assert main(["plotdata", str(tmp_path / "none.json")]) == 2


@pytest.mark.slow
def test_default_plotdata(default_run, tmp_path):
    assert main(["plotdata", str(default_run / "front.json"), "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "acc_gap.csv")) == 11
    fpr0 = {float(r["alpha"]): float(r["test"]) for r in _rows(tmp_path / "fpr_g0.csv")}
    fpr1 = {float(r["alpha"]): float(r["test"]) for r in _rows(tmp_path / "fpr_g1.csv")}
    assert fpr0[0.0] < fpr0[1.0]
    assert fpr1[0.0] > fpr1[1.0]


@pytest.mark.slow
def test_default_verify(default_run, tmp_path):
    import shutil

    work = tmp_path / "run"
    shutil.copytree(default_run, work)
    assert main(["verify", str(work / "front.json")]) == 0
