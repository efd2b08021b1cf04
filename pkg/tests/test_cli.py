import csv
import json
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from thetalab.cli import main


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--output", str(out)])
    text = out.read_text() if out.exists() else None
    return code, text


def run_json(tmp_path, *args):
    code, text = run(tmp_path, *args)
    assert code == 0
    return json.loads(text)


def csv_rows(text):
    return list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))


def test_torus_distance(tmp_path):
    doc = run_json(tmp_path, "torus-distance", "--tau1", "0,1", "--tau2", "0,2")
    assert doc["result"]["distance"] == pytest.approx(math.log(2), abs=1e-12)
    assert doc["schema_version"] == "1"
    assert doc["seed"] == 0
    assert doc["config"]["tau1"] == [0.0, 1.0]


def test_folner_csv(tmp_path):
    code, text = run(tmp_path, "folner", "--family", "tree", "--degree", "3", "--radius", "8",
                     "--format", "csv")
    assert code == 0
    rows = csv_rows(text)
    assert len(rows) == 9
    for r in rows:
        n = int(r["n"])
        assert Fraction(int(r["boundary"]), int(r["ball"])) == Fraction(3 * 2 ** n, 3 * 2 ** n - 2)
        assert float(r["ratio"]) == pytest.approx(3 * 2 ** n / (3 * 2 ** n - 2), rel=1e-15)
    assert text.startswith("# schema_version: 1")


def test_theta_ratio_trivial(tmp_path):
    doc = run_json(tmp_path, "theta-ratio", "--group", "preset:trivial", "--phi", "1", "--N", "0",
                   "--grid", "64")
    res = doc["result"]
    assert res["ratio"] == pytest.approx(1.0, abs=1e-12)
    for key in ("error_quadrature", "error_truncation", "N", "shell_masses"):
        assert key in res


def test_theta_norm_estimate_small(tmp_path):
    doc = run_json(tmp_path, "theta-norm-estimate", "--group", "schottky-wide", "--max-degree", "2",
                   "--budget", "2", "--grid", "32", "--seed", "4")
    res = doc["result"]
    for key in ("ratio", "error_quadrature", "error_truncation", "N", "witness_coefficients",
                "systole_upper_bound"):
        assert key in res
    assert doc["seed"] == 4


def test_unfold_check(tmp_path):
    doc = run_json(tmp_path, "unfold-check", "--group", "schottky-wide", "--grid", "64")
    res = doc["result"]
    assert res["monotone"] and res["stop_reason"] == "shell"
    assert "error_quadrature" in res and "error_truncation" in res


def test_systole(tmp_path):
    doc = run_json(tmp_path, "systole", "--group", "cyclic", "--N", "3")
    assert doc["result"]["systole_upper_bound"] == pytest.approx(2 * math.log(2), abs=1e-12)


def test_expansion(tmp_path):
    doc = run_json(tmp_path, "expansion", "--family", "tree", "--degree", "3", "--ball-radius", "2",
                   "--max-subset-size", "5")
    assert doc["result"]["ratio"] == "7/5"
    assert doc["result"]["metadata"]["connected_only"] is True


def test_schreier(tmp_path):
    doc = run_json(tmp_path, "schreier", "--hom", '{"images": [[1], [0]]}', "--radius", "10")
    assert doc["result"]["amenability"]["verdict"] == "amenable-evidence"
    doc = run_json(tmp_path, "schreier", "--hom", '"trivial"', "--radius", "7")
    assert doc["result"]["amenability"]["verdict"] == "nonamenable-evidence"


def test_iterate_csv(tmp_path):
    maps = '[{"kind": "uniform-contraction", "params": {"target": [0, 1], "factor": 0.5}}]'
    code, text = run(tmp_path, "iterate", "--maps", maps, "--y0", "0,2", "--format", "csv")
    assert code == 0
    rows = csv_rows(text)
    assert rows[0]["n"] == "0" and float(rows[0]["im"]) == 2.0


def test_iterate_json(tmp_path):
    maps = '[{"kind": "isometry", "params": {"matrix": [[1, 1], [0, 1]]}}]'
    doc = run_json(tmp_path, "iterate", "--maps", maps, "--max-n", "50")
    assert doc["result"]["outcome"] == "budget-exceeded"
    assert doc["result"]["contraction_estimate"]["c_hat"] == pytest.approx(1.0, abs=1e-9)


# -- configs -------------------------------------------------------------------------

def test_config_equals_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tau1": "0,1", "tau2": [1, 1]}))
    _, a = run(tmp_path, "torus-distance", "--config", str(cfg), name="a")
    _, b = run(tmp_path, "torus-distance", "--tau1", "0,1", "--tau2", "1,1", name="b")
    assert a == b


def test_config_excludes_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tau1": "0,1", "tau2": "0,2"}))
    code, _ = run(tmp_path, "torus-distance", "--config", str(cfg), "--tau1", "0,3")
    assert code == 2


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tau1": "0,1", "tau2": "0,2", "tau3": "0,4"}))
    assert run(tmp_path, "torus-distance", "--config", str(cfg))[0] == 2


def test_config_seed(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tau1": "0,1", "tau2": "0,2", "seed": 9}))
    code, text = run(tmp_path, "torus-distance", "--config", str(cfg))
    assert json.loads(text)["seed"] == 9


@pytest.mark.parametrize("args", [
    ["torus-distance", "--tau1", "0;1", "--tau2", "0,2"],
    ["torus-distance", "--tau1", "0,-1", "--tau2", "0,2"],
    ["torus-distance", "--tau1", "0,1"],
    ["theta-ratio", "--group", "nowhere", "--grid", "8"],
    ["theta-ratio", "--group", "trivial", "--phi", "0", "--grid", "8"],
    ["folner", "--family", "hexagon"],
    ["schreier", "--hom", "{not json"],
    ["iterate", "--maps", '[{"kind": "uniform-contraction", "params": {"factor": 2}}]'],
])
def test_config_errors(tmp_path, args):
    assert run(tmp_path, *args)[0] == 2


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_budget_exit_3(tmp_path):
    code, text = run(tmp_path, "expansion", "--family", "tree", "--ball-radius", "3",
                     "--max-subset-size", "10", "--cap", "50")
    assert code == 3
    doc = json.loads(text)
    assert doc["status"] == "budget-exceeded"
    assert doc["result"]["partial"] is True
    assert doc["result"]["partial_result"]["ratio"] is not None


def test_theta_budget_exit_3(tmp_path):
    code, text = run(tmp_path, "theta-ratio", "--group", "schottky-wide", "--N", "9", "--cap", "100",
                     "--grid", "8")
    assert code == 3


def test_numerical_failure_exit_4(tmp_path):
    assert run(tmp_path, "systole", "--group", "trivial")[0] == 4


# -- determinism ------------------------------------------------------------------------

@pytest.mark.parametrize("args", [
    ["theta-norm-estimate", "--group", "schottky-L2", "--max-degree", "2", "--budget", "2", "--grid", "32"],
    ["unfold-check", "--group", "punctured-torus", "--grid", "32", "--cap", "2000"],
    ["folner", "--family", "cayley", "--radius", "5"],
    ["iterate", "--maps", '[{"kind": "cylindrical", "params": {"eps": 0.5, "s": 1}}]'],
])
def test_byte_identical_across_threads(tmp_path, args):
    _, a = run(tmp_path, *args, "--threads", "1", name="a")
    _, b = run(tmp_path, *args, "--threads", "2", name="b")
    _, c = run(tmp_path, *args, name="c")
    assert a == b == c


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "thetalab.cli", "torus-distance", "--tau1", "0,1",
                          "--tau2", "0,2", "--format", "csv"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "distance" in out.stdout
