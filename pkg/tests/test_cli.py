import json
import subprocess
import sys

import numpy as np
import pytest

from dirichlet_ball import boundary
from dirichlet_ball.cli import main
from dirichlet_ball.parse import parse_poly
from dirichlet_ball.poly2 import Poly2


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out else None, err


def test_norm(capsys):
    code, doc, _ = run_json(capsys, "norm", "--poly", "1-2*z*w", "--alpha", "0")
    assert code == 0
    assert doc["schema"] == "dirichlet-ball/1" and doc["status"] == "ok"
    assert doc["result"]["norm_sq"] == pytest.approx(5 / 3, rel=1e-15)


def test_norm_integral(capsys):
    code, doc, _ = run_json(capsys, "norm", "--poly", "z", "--alpha", "0", "--integral")
    assert code == 0
    assert doc["result"]["integral_seminorm"]["value"] == pytest.approx(2 / 3, rel=1e-10)


def test_classify(capsys):
    code, doc, _ = run_json(capsys, "classify", "--poly", "1-2*z*w", "--alpha", "1.5")
    assert code == 0
    assert doc["result"]["cyclic"] == "yes"
    assert doc["result"]["evidence"]["class"] == "curve"


def test_zeros(capsys):
    code, doc, _ = run_json(capsys, "zeros", "--poly", "2-z")
    assert code == 0 and doc["result"]["class"] == "empty"


def test_gamma(capsys):
    code, doc, _ = run_json(capsys, "gamma", "--poly", "1-2*z*w", "--point", "0.7071067811865476,0.7071067811865476")
    assert code == 0
    assert doc["result"]["gamma"][0] == pytest.approx(-0.5, abs=1e-3)


def test_gamma_finds_point(capsys):
    code, doc, _ = run_json(capsys, "gamma", "--poly", "1-z")
    assert code == 0 and abs(doc["result"]["gamma"][0]) < 1e-6


def test_opa_and_csv(capsys):
    code, doc, _ = run_json(capsys, "opa", "--poly", "1-z", "--alpha", "0", "--n-max", "3")
    assert code == 0
    assert doc["result"]["dist_sq"] == pytest.approx([1 / 3, 1 / 6, 1 / 10, 1 / 15], rel=1e-10)
    code, out, _ = run(capsys, "opa", "--poly", "1-z", "--alpha", "0", "--n-max", "3", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "n,dist_sq,condition" and len(out.splitlines()) == 5


def test_dilate(capsys):
    code, doc, _ = run_json(capsys, "dilate", "--poly", "2-z", "--alpha", "2", "--k-max", "5")
    assert code == 0
    assert len(doc["result"]["r_grid"]) == 5


def test_capacity_model_curve(capsys):
    code, doc, _ = run_json(capsys, "capacity", "--alpha", "1.75", "--n-grid", "64,128")
    assert code == 0 and doc["input"]["poly"] is None
    assert doc["result"]["n_values"] == [64, 128]


def test_capacity_from_zero_set(capsys):
    code, doc, _ = run_json(capsys, "capacity", "--poly", "1-2*z*w", "--alpha", "1.75", "--n-grid", "64,128")
    assert code == 0 and len(doc["result"]["energies"]) == 2


def test_lojasiewicz(capsys):
    code, doc, _ = run_json(capsys, "lojasiewicz", "--poly", "1-z", "--samples", "4096")
    assert code == 0
    assert doc["result"]["exponent"] == pytest.approx(2, abs=0.2)


@pytest.mark.parametrize("argv", [
    ["norm", "--poly", "2z"],
    ["norm", "--poly", "z^1.5"],
    ["norm"],
    ["frobnicate"],
    ["norm", "--poly", "z", "--bogus"],
    ["classify", "--poly", "1-z"],
    ["gamma", "--poly", "2-z"],
    ["gamma", "--poly", "1-z", "--point", "nonsense"],
    ["gamma", "--poly", "1-z", "--format", "csv"],
    ["dilate", "--poly", "z"],
    ["norm", "--poly", "@/nonexistent.json"],
])
def test_errors_exit_one(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and err.startswith("dirichlet-ball:")


def test_syntax_error_message(capsys):
    _, _, err = run(capsys, "norm", "--poly", "2z")
    assert "position 1" in err


def test_inconclusive_exit_two(capsys, monkeypatch):
    stalled = boundary._Trace(np.zeros((2, 4)), 0.01, "budget", 0.0)
    monkeypatch.setattr(boundary, "_trace_from", lambda ev, pt: (None, [stalled]))
    code, doc, _ = run_json(capsys, "zeros", "--poly", "1-z")
    assert code == 2
    assert doc["status"] == "inconclusive" and doc["result"]["partial"]["class"] == "finite"


def test_determinism(capsys):
    outs = [run(capsys, "zeros", "--poly", "(1-z)*(1-w)", "--seed", "3")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_round_trip_through_report(capsys):
    p = parse_poly("1 - (0.1+1i)*z^2 + 0.3*z*w")
    _, doc, _ = run_json(capsys, "norm", "--poly", "1 - (0.1+1i)*z^2 + 0.3*z*w")
    assert parse_poly(doc["input"]["poly"]) == p


def test_poly_from_json_file(capsys, tmp_path):
    records = tmp_path / "p.json"
    records.write_text(json.dumps((Poly2({(0, 0): 1, (1, 1): -2})).to_records()))
    expr = tmp_path / "q.json"
    expr.write_text(json.dumps({"p": "1-2*z*w"}))
    a = run_json(capsys, "norm", "--poly", f"@{records}", "--alpha", "0")[1]
    b = run_json(capsys, "norm", "--poly", f"@{expr}", "--alpha", "0")[1]
    assert a["result"] == b["result"]


def test_out_file(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "norm", "--poly", "z", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["command"] == "norm"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dirichlet_ball", "norm", "--poly", "1-2*z*w", "--alpha", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["norm_sq"] == pytest.approx(5 / 3)


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "dirichlet-ball" in capsys.readouterr().out
