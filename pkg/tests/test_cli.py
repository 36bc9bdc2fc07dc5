import io
import json
import subprocess
import sys

import numpy as np
import pytest

from localtime.cli import run
from localtime.closed_forms import complete_graph, complete_resolvent, star_graph
from localtime.graph_model import graph_from_json, load_graph, save_graph, transition_from_adjacency, validate_stochastic


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


@pytest.fixture
def c4(tmp_path):
    path = tmp_path / "c4.json"
    save_graph(complete_graph(4), path)
    return path


@pytest.fixture
def star5(tmp_path):
    path = tmp_path / "star5.json"
    save_graph(star_graph(5), path)
    return path


def test_mean_on_complete_graph(c4):
    code, out, _ = call("mean", "--graph", c4, "--va", 0, "--v1", 1, "--n", 5, "--endpoint", "free")
    assert code == 0
    (rec,) = records(out)
    assert rec["operation"] == "mean"
    assert rec["engine"] == "exact"
    assert rec["params"]["n"] == 5
    assert rec["result"] == pytest.approx(319 / 243, abs=1e-12)


def test_record_is_rerunnable(c4):
    _, out, _ = call("mean", "--graph", c4, "--va", 0, "--v1", 2, "--n", 7)
    rec = records(out)[0]
    argv = [rec["operation"]]
    for key, value in rec["params"].items():
        if key != "command":
            argv += [f"--{key}", value]
    _, again, _ = call(*argv)
    assert records(again)[0]["result"] == rec["result"]


def test_stationary_on_star(star5):
    code, out, _ = call("stationary", "--graph", star5)
    assert code == 0
    rows = records(out)[0]["result"]
    assert rows[0]["pi"] == pytest.approx(0.5, abs=1e-12)
    for row in rows[1:]:
        assert row["pi"] == pytest.approx(0.1, abs=1e-12)


def test_simulate_brackets_exact_value(c4):
    code, out, _ = call("simulate", "mean", "--graph", c4, "--va", 0, "--v1", 1, "--n", 5,
                        "--seed", 42, "--trials", 100000, "--verify")
    assert code == 0
    rec = records(out)[0]
    assert rec["engine"] == "montecarlo"
    est = rec["result"]
    assert abs(est["mean"] - 319 / 243) <= 4 * est["standard_error"]
    assert rec["verified"] is True


def test_simulate_is_deterministic(c4):
    argv = ("simulate", "corr", "--graph", c4, "--v1", 1, "--v2", 2, "--n", 6, "--seed", 3, "--trials", 5000)
    assert call(*argv)[1] == call(*argv)[1]


def test_export_round_trip(tmp_path):
    a = np.random.default_rng(5).random((5, 5)) + 0.01
    src = tmp_path / "adj.csv"
    np.savetxt(src, a, delimiter=",")
    dst = tmp_path / "out.json"
    assert call("export", "--graph", src, "--out", dst)[0] == 0
    assert load_graph(dst) == load_graph(src)
    second = tmp_path / "again.json"
    assert call("export", "--graph", dst, "--out", second)[0] == 0
    assert load_graph(second) == load_graph(dst)


def test_export_family_to_stdout():
    code, out, _ = call("export", "--family", "star", "--N", 3)
    assert code == 0
    assert graph_from_json(json.loads(out)) == star_graph(3)


def test_invalid_input_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"vertices": 2, "mode": "stochastic", "edges": [{"from": 0, "to": 1, "weight": 0.9},
                                                                              {"from": 1, "to": 0, "weight": 1.0}]}))
    code, _, err = call("mean", "--graph", bad, "--v1", 1, "--n", 3)
    assert code == 2
    assert "invalid input" in err
    assert call("mean", "--graph", tmp_path / "missing.json", "--v1", 1, "--n", 3)[0] == 2
    assert call("mean", "--v1", 1)[0] == 2


def test_vertex_out_of_range(c4):
    assert call("mean", "--graph", c4, "--v1", 9, "--n", 3)[0] == 2


def test_computational_failure_exit_code(tmp_path):
    path = tmp_path / "absorbing.json"
    save_graph(validate_stochastic([[0.5, 0.5], [0.0, 1.0]]), path)
    code, _, err = call("stationary", "--graph", path)
    assert code == 3
    assert "NotStronglyConnected" in err
    assert call("resolvent", "--graph", path, "--va", 0, "--vb", 0, "--z", 0.5)[0] == 3


@pytest.mark.parametrize("command, extra", [
    ("mean", ("--v1", 2)),
    ("corr", ("--v1", 1, "--v2", 2)),
    ("zero-visit", ("--v", 3)),
    ("dist", ("--v", 0)),
])
def test_verify_agreement(tmp_path, command, extra):
    rng = np.random.default_rng(8)
    path = tmp_path / "g.json"
    save_graph(transition_from_adjacency(rng.random((4, 4)) + 0.05), path)
    for ends in ((), ("--vb", 1)):
        code, out, _ = call(command, "--graph", path, "--va", 0, "--n", 12, *ends, *extra, "--verify")
        assert code == 0
        rec = records(out)[0]
        assert rec["verified"] is True
        assert rec["max_discrepancy"] <= 1e-8


def test_verify_on_asymptotics_and_resolvent(star5, c4):
    assert records(call("stationary", "--graph", star5, "--verify")[1])[0]["verified"]
    rec = records(call("limit-fraction", "--graph", c4, "--v1", 1, "--v2", 2, "--verify")[1])[0]
    assert rec["result"] == pytest.approx(1 / 16)
    rec = records(call("resolvent", "--graph", c4, "--va", 0, "--vb", 1, "--z", 1.5, "--u", -0.4, "--v", 2, "--verify")[1])[0]
    assert rec["verified"]


def test_fixed_endpoint_output_labels(c4):
    _, out, _ = call("mean", "--graph", c4, "--va", 0, "--vb", 1, "--v1", 1, "--n", 3)
    res = records(out)[0]["result"]
    assert set(res) == {"unnormalized", "normalized"}
    weight = np.linalg.matrix_power(np.asarray(complete_graph(4)), 3)[0, 1]
    assert res["normalized"] == pytest.approx(res["unnormalized"] / weight)


def test_fixed_endpoint_unreachable_warns(tmp_path):
    path = tmp_path / "two.json"
    save_graph(validate_stochastic([[0.0, 1.0], [1.0, 0.0]]), path)
    code, out, err = call("mean", "--graph", path, "--vb", 1, "--v1", 0, "--n", 2)
    assert code == 0
    assert records(out)[0]["result"]["normalized"] is None
    assert "warning" in err


def test_dist_output_and_csv(c4):
    _, out, _ = call("dist", "--graph", c4, "--v", 1, "--n", 4)
    rows = records(out)[0]["result"]
    assert sum(r["mass"] for r in rows) == pytest.approx(1.0)
    _, text, _ = call("dist", "--graph", c4, "--v", 1, "--n", 4, "--format", "csv")
    lines = text.strip().splitlines()
    assert lines[0] == "l,mass"
    assert len(lines) == 6


def test_z_mode(c4):
    _, out, _ = call("mean", "--graph", c4, "--v1", 1, "--n", 5, "--z", 2.0)
    rec = records(out)[0]
    assert rec["engine"] == "zdomain-numeric"
    # z/(1-z) <0|RP|1> with <0|RP|1> = z <0|R|1>
    assert rec["result"] == pytest.approx(2.0 / (1 - 2.0) * 2.0 * complete_resolvent(4, 2.0, 0, 1))


def test_closed_form_commands():
    rec = records(call("closed-form", "complete", "--N", 2, "--quantity", "resolvent", "--z", 2)[1])[0]
    assert rec["result"] == pytest.approx(-2 / 3)
    rec = records(call("closed-form", "line", "--quantity", "zero-visit", "--n", 5)[1])[0]
    assert rec["result"] == 0.375
    rec = records(call("closed-form", "star", "--N", 2, "--z", 2)[1])[0]
    assert rec["result"][0][1] == pytest.approx(-1 / 6)
    assert call("closed-form", "line", "--quantity", "resolvent")[0] == 2


def test_console_entry_point(c4):
    argv = [sys.executable, "-m", "localtime", "mean", "--graph", str(c4), "--v1", "1", "--n", "5"]
    proc = subprocess.run(argv, capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"] == pytest.approx(319 / 243)
