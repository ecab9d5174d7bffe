import json
import subprocess
import sys

import numpy as np
import pytest

from robord.cli import main, parse_grid
from robord.sim import SimScenario, gen_dataset, stream


@pytest.fixture(scope="module")
def csv_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    data, _ = gen_dataset(SimScenario(n=120), stream(2, 0, 0))
    grp = np.where(data.X[:, 1] == 1, "b", "a")
    lines = ["y,x,g,note"] + [f"{y},{x!r},{g},n" for y, x, g in zip(data.y, data.X[:, 0].tolist(), grp)]
    (d / "d.csv").write_text("\n".join(lines) + "\n")
    spec = {"columns": [{"name": "y", "role": "response"}, {"name": "x", "role": "continuous"},
                        {"name": "g", "role": "binary"}, {"name": "note", "role": "drop"}]}
    (d / "s.json").write_text(json.dumps(spec))
    return d


def test_fit_dp_json(csv_files):
    out = csv_files / "fit.json"
    code = main(["fit", "--data", str(csv_files / "d.csv"), "--spec", str(csv_files / "s.json"),
                 "--method", "dp", "--alpha", "0.3", "--link", "probit", "--out", str(out),
                 "--residuals", str(csv_files / "r.csv")])
    assert code == 0
    res = json.loads(out.read_text())
    assert res["method"] == "dp" and res["tuning"] == 0.3 and res["converged"]
    assert list(res["params"]) == ["x", "g", "delta1", "delta2", "delta3", "delta4"]
    assert [r["name"] for r in res["wald"]] == ["x", "g"]
    assert len(res["covariance"]["V_hat"]) == 6
    assert (csv_files / "r.csv").read_text().startswith("row,residual,lo95,hi95,lo99,hi99,flagged\n")


def test_fit_is_byte_deterministic(csv_files):
    args = ["fit", "--data", str(csv_files / "d.csv"), "--spec", str(csv_files / "s.json"),
            "--method", "gamma", "--tuning", "0.5"]
    main(args + ["--out", str(csv_files / "a.json")])
    main(args + ["--out", str(csv_files / "b.json")])
    assert (csv_files / "a.json").read_bytes() == (csv_files / "b.json").read_bytes()


def test_residuals_command(csv_files, capsys):
    assert main(["residuals", "--data", str(csv_files / "d.csv"), "--spec", str(csv_files / "s.json")]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 121
    assert sum(int(l.rsplit(",", 1)[1]) for l in lines[1:]) >= 1


def test_simulate(tmp_path):
    scn = tmp_path / "table1.json"
    scn.write_text(json.dumps({"S": 2, "n": 100, "outlier_frac": 0.05,
                               "methods": [{"method": "ml"}, {"method": "dp", "tuning": 0.3}],
                               "fit": {"n_restarts": 0}}))
    out = tmp_path / "metrics.csv"
    assert main(["simulate", "--scenario", str(scn), "--out", str(out), "--workers", "1"]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "method,tuning,link,parameter,bias,mse,ccr"
    assert len(lines) == 1 + 2 * 8


def test_influence_figure1(capsys):
    code = main(["influence", "--link", "probit", "--method", "gamma", "--tuning", "0.5",
                 "--y", "1", "--grid", "-10:10:0.1"])
    assert code == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "x,parameter,method,psi"
    assert len(lines) == 1 + 201 * 4
    assert lines[1].startswith("-10.0,beta1,gamma(0.5),")


def test_probe(capsys):
    assert main(["probe", "--link", "logit", "--alpha", "0.3", "--points", "30"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ml_delta_bounded"] and not rep["ml_beta_bounded"]


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["probe", "--alpha", "2"],
    ["influence", "--grid", "1:0:1"],
    ["influence", "--y", "9"],
    ["influence", "--method", "dp"],
    ["influence", "--delta", "1,0"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert "usage error" in capsys.readouterr().err


def test_data_error_exit(tmp_path, csv_files, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("y,x,g,note\n1,oops,a,n\n2,1,b,n\n")
    code = main(["fit", "--data", str(bad), "--spec", str(csv_files / "s.json")])
    assert code == 2
    assert "row 2, column 'x'" in capsys.readouterr().err
    assert main(["fit", "--data", str(tmp_path / "missing.csv"), "--spec", str(csv_files / "s.json")]) == 2


def test_convergence_exit(csv_files):
    code = main(["fit", "--data", str(csv_files / "d.csv"), "--spec", str(csv_files / "s.json"),
                 "--max-iters", "2", "--restarts", "0"])
    assert code == 3


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("-1:1:0.5"), [-1, -0.5, 0, 0.5, 1])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "robord", "probe", "--points", "10"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and '"link": "probit"' in r.stdout
