import csv
import json

import numpy as np
import pytest

from qhtree import power
from qhtree.cli import main, parse_values


@pytest.fixture
def synth(tmp_path):
    data, schema = tmp_path / "d.csv", tmp_path / "d.json"
    assert main(["synth", "--kind", "separable", "--n", "5000", "--seed", "1", "--out", str(data),
                 "--schema-out", str(schema)]) == 0
    return data, schema


def test_train_writes_report(synth, tmp_path, capsys):
    data, schema = synth
    report, curve = tmp_path / "r.json", tmp_path / "c.csv"
    rc = main(["train", "--schema", str(schema), "--data", str(data), "--observer", "quantile", "--quantiles", "8",
               "--nmin", "200", "--split-points", "10", "--tau", "0.05", "--delta", "1e-3", "--lambda", "0.01",
               "--max-depth", "15", "--max-leaves", "1024", "--elements", "1024", "--report", str(report),
               "--curve", str(curve)])
    assert rc == 0
    saved = json.loads(report.read_text())
    assert saved["samples"] == 5000 and saved["accuracy"] >= 0.95
    assert json.loads(capsys.readouterr().out)["accuracy"] == saved["accuracy"]
    assert curve.exists()


def test_train_fixed_point_and_gaussian(synth):
    data, schema = synth
    assert main(["train", "--schema", str(schema), "--data", str(data), "--fixed-point"]) == 0
    assert main(["train", "--schema", str(schema), "--data", str(data), "--observer", "gaussian"]) == 0


def test_train_bad_quantiles(synth, capsys):
    data, schema = synth
    assert main(["train", "--schema", str(schema), "--data", str(data), "--quantiles", "1"]) == 2
    assert "quantile" in capsys.readouterr().err


def test_sweep(synth, tmp_path):
    data, schema = synth
    out = tmp_path / "s.csv"
    assert main(["sweep", "--schema", str(schema), "--data", str(data), "--quantiles", "1,2,8",
                 "--with-gaussian", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["quantiles"] for r in rows] == ["gaussian", "1", "2", "8"]
    assert rows[1]["error"] and float(rows[3]["accuracy"]) > 0.9


def test_normalize(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"attributes": [{"name": "x", "kind": "numeric"}], "labels": 2}))
    (tmp_path / "in.csv").write_text("x,y\n0,0\n5,1\n10,0\n")
    assert main(["normalize", "--schema", str(tmp_path / "s.json"), "--in", str(tmp_path / "in.csv"),
                 "--out", str(tmp_path / "out.csv"), "--stats", str(tmp_path / "st.json"), "--header"]) == 0
    assert (tmp_path / "out.csv").read_text().split() == ["-1.0,0", "0.0,1", "1.0,0"]
    assert json.loads((tmp_path / "st.json").read_text()) == {"min": [0.0], "max": [10.0]}


def test_synth_unknown_kind(tmp_path):
    with pytest.raises(SystemExit):
        main(["synth", "--kind", "spiral", "--n", "5", "--out", str(tmp_path / "x.csv")])


def test_cost(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["cost", "--labels", "7", "--numeric", "10", "--categorical", "44", "--values", "2x44",
                 "--quantiles", "8", "--elements", "1024", "--depth", "15", "--freq", "170",
                 "--samples", "581012", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["dsp"]["overall"] == 1126 and r["latency_cycles"] == 55
    assert r["exec_seconds"] == pytest.approx(3.578e-3, abs=5e-7)
    assert "DSP overall" in capsys.readouterr().out


def test_cost_fit_cold_start(tmp_path):
    out = tmp_path / "r.json"
    assert main(["cost", "--labels", "7", "--numeric", "10", "--freq", "170", "--samples", "581012",
                 "--fit-cold-start", "--measured-time", "3.98e-3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["exec_seconds"] == pytest.approx(3.98e-3)


def test_cost_params_file(tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"labels": 2, "numeric": 7, "categorical": 9,
                             "values": [12, 3, 4, 2, 2, 2, 3, 12, 4]}))
    out = tmp_path / "r.json"
    assert main(["cost", "--params", str(f), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["dsp"]["overall"] == 202


def test_cost_value_mismatch(capsys):
    assert main(["cost", "--labels", "2", "--numeric", "1", "--categorical", "2", "--values", "3"]) == 2
    assert "value counts" in capsys.readouterr().err


@pytest.mark.parametrize("text,expected", [("3,17", [3, 17]), ("2x3", [2, 2, 2]), ("2x2,5", [2, 2, 5]), ("", [])])
def test_parse_values(text, expected):
    assert parse_values(text) == expected


def test_power_flow(tmp_path, capsys):
    rng = np.random.default_rng(0)
    n = 4000
    lab = rng.integers(0, 3, n)
    sig = rng.uniform(0, 1, (n, 10))
    sig[:, 6] = lab + rng.normal(0, 0.05, n)
    power.write_traces(tmp_path / "t.csv",
                       power.TraceSet([f"c{i}" for i in range(10)], sig, np.array([1.0, 5.0, 9.0])[lab]
                                      + rng.normal(0, 0.1, n)))
    out = tmp_path / "model_config.json"
    assert main(["power-flow", "--traces", str(tmp_path / "t.csv"), "--k-range", "2:5", "--n-max", "8",
                 "--seed", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["k"] == 3 and doc["selected_signals"][0] == "c6" and len(doc["selected_signals"]) == 8
    run = doc["run_config"]
    assert run["n_elements"] == 64 and run["hp"]["n_quantiles"] == 8 and run["hp"]["max_depth"] == 7
    # the emitted configuration runs as is
    assert main(["train", "--schema", run["schema_path"], "--data", run["data_path"], "--elements", "64",
                 "--max-depth", "7"]) == 0
    text = capsys.readouterr().out
    assert json.loads(text[text.index("{"):])["accuracy"] > 0.9
