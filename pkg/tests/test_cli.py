import json
import math
import subprocess
import sys

import pytest

from nbodybounds.cli import main
from nbodybounds.graph import cycle_graph


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_scenario_json(capsys):
    code, out, _ = run(capsys, "scenario", "--n", "2")
    doc = json.loads(out)
    assert code == 0 and doc["n"] == 2 and len(doc["support"]) == 8


def test_scenario_dot(capsys):
    code, out, _ = run(capsys, "scenario", "--n", "2", "--format", "dot")
    assert code == 0 and out.startswith("graph Sigma2 {")


@pytest.mark.parametrize("argv", [
    ["scenario", "--n", "1"], ["bounds", "--n", "0"], ["bounds", "--n", "x"],
    ["bounds", "--n", "2", "--skip", "nonsense"], ["verify"], [],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_verify_doubling(tmp_path, capsys):
    out = tmp_path / "report.json"
    fam = tmp_path / "family.json"
    code, _, _ = run(capsys, "verify", "doubling", "--n", "3", "--emit", str(out),
                     "--dump-family", str(fam))
    doc = json.loads(out.read_text())
    assert code == 0 and all(doc["checks"].values())
    assert doc["derived_bound"] == pytest.approx(2 * (2 + math.sqrt(2)), abs=1e-8)
    code, _, _ = run(capsys, "verify", "doubling", "--family", str(fam))
    assert code == 0


def test_verify_mutated_family_fails(tmp_path, capsys, caplog):
    fam = tmp_path / "family.json"
    run(capsys, "verify", "doubling", "--n", "2", "--dump-family", str(fam))
    data = json.loads(fam.read_text())
    tok = data["sets"][0]["product"][0]
    bits, settings = tok.split("|")
    b = bits.split(",")
    b[0] = str(1 - int(b[0]))
    data["sets"][0]["product"][0] = ",".join(b) + "|" + settings
    fam.write_text(json.dumps(data))
    code, _, _ = run(capsys, "verify", "doubling", "--family", str(fam))
    assert code == 1 and "failed check coverage" in caplog.text


def test_verify_refuses_large_n(capsys, caplog):
    code, _, _ = run(capsys, "verify", "doubling", "--n", "6")
    assert code == 3 and "MiB" in caplog.text


def test_graph_theta_from_file(tmp_path, capsys):
    path = tmp_path / "c5.json"
    path.write_text(json.dumps(cycle_graph(5).to_json()))
    code, out, _ = run(capsys, "graph", "theta", "--input", str(path), "--tol", "1e-6")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(math.sqrt(5), abs=1e-5)


def test_graph_build(capsys):
    code, out, _ = run(capsys, "graph", "build", "--n", "2")
    doc = json.loads(out)
    assert code == 0 and doc["alpha"] == 3 and doc["vertex_transitive"] is True
    code, out, _ = run(capsys, "graph", "build", "--n", "2", "--complement", "--format", "dot")
    assert code == 0 and out.count("--") == 16


def test_bounds_csv_and_stability(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        code, _, _ = run(capsys, "bounds", "--n", "3", "--skip", "theta", "--emit", str(path))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].startswith("n,quantity,computed")
    assert any(line.startswith("3,quantum_s,5.65685425,") for line in lines)


def test_bounds_json(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "2")
    doc = json.loads(out)
    assert code == 0 and doc["all_match"] and doc["local"] == 3 and doc["ns_value"] == 4


def test_bounds_mismatch_exit_code(capsys):
    # the hybrid value at n = 4 exceeds the 3 * 2^(n-2) formula
    code, out, _ = run(capsys, "bounds", "--n", "4", "--skip", "quantum,theta,local,ns")
    assert code == 1
    assert json.loads(out)["hybrid"] == 16


def test_report(capsys):
    code, out, _ = run(capsys, "report", "--n", "2")
    doc = json.loads(out)
    assert code == 0 and doc["vertex_transitive"] and doc["product_identity"]["ok"]
    assert doc["verification"]["checks"]["coverage"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nbodybounds", "scenario", "--n", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "n must be >= 2" in res.stderr
