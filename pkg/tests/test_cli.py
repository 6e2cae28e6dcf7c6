import json
import subprocess
import sys
from contextlib import redirect_stdout
from io import StringIO

import numpy as np
import pytest

from quadricdiff.cli import main
from quadricdiff.model import BallModel, SphereModel, model_to_json
from quadricdiff.skew import skew_dim


def run(argv):
    buf = StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def run_json(argv):
    code, out = run(argv)
    assert code == 0, out
    return json.loads(out)


@pytest.fixture(scope="module")
def model_files(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("models")
    files = {}
    sphere = SphereModel(H=np.eye(3), B=-np.eye(3))
    files["sphere"] = tmp / "sphere.json"
    files["sphere"].write_text(json.dumps(model_to_json(sphere)))
    jacobi = BallModel(alpha=[[0.49]], H=np.zeros((0, 0)), b=[0.0], B=[[-1.0]])
    files["jacobi"] = tmp / "jacobi.json"
    files["jacobi"].write_text(json.dumps(model_to_json(jacobi)))
    ball = BallModel(alpha=np.eye(2), H=np.eye(1), b=np.zeros(2), B=-2 * np.eye(2))
    files["ball"] = tmp / "ball.json"
    files["ball"].write_text(json.dumps(model_to_json(ball)))
    files["tmp"] = tmp
    return files


@pytest.mark.parametrize("d,m,dim_c,dim_k", [
    (2, 1, 1, 0), (3, 3, 6, 0), (4, 6, 20, 1), (5, 10, 50, 5), (6, 15, 105, 15),
])
def test_dims(d, m, dim_c, dim_k):
    j = run_json(["dims", "--d", str(d)])
    assert (j["m"], j["dim_C"], j["dim_K"]) == (m, dim_c, dim_k)


def test_sos_check_identity():
    j = run_json(["sos-check", "--H", "id", "--d", "3"])
    assert j["status"] == "Feasible"
    assert j["iterations"] >= 1


def test_sos_check_inline_matrix():
    m = skew_dim(3)
    H = (-np.eye(m)).tolist()
    j = run_json(["sos-check", "--H", json.dumps(H), "--d", "3"])
    assert j["status"] == "Infeasible"


def test_decompose():
    j = run_json(["decompose", "--H", "id", "--d", "3"])
    assert j["status"] == "Feasible" and j["rank"] == 3
    assert np.asarray(j["factors"]).shape == (3, 3, 3)


def test_counterexample_report():
    j = run_json(["counterexample"])
    assert j["sos_status"] == "Infeasible"
    assert j["inner_hb"] < -0.1
    assert j["k_orth_max"] <= 1e-10
    assert j["components"]["c_11"] == "x2^2 + x3^2 + 2 x4^2 + 2 x5^2 + 2 x6^2"
    assert np.asarray(j["H"]).shape == (15, 15)


def test_validate_sphere_and_ball(model_files):
    j = run_json(["validate", "--model", str(model_files["sphere"])])
    assert j["admissible"] and j["space"] == "sphere"
    j = run_json(["validate", "--model", str(model_files["jacobi"])])
    assert j["admissible"]
    assert j["boundary"]["status"] == "InteriorInvariant"


def test_moments_and_domain_error(model_files):
    q = json.dumps({"terms": [{"exp": [1, 0, 0], "coef": 1.0}]})
    j = run_json(["moments", "--model", str(model_files["sphere"]), "--q", q,
                  "--x0", "[1,0,0]", "--t", "1.0"])
    assert j["value"] == pytest.approx(np.exp(-1.0), abs=1e-12)
    j = run_json(["moments", "--model", str(model_files["sphere"]), "--q", q,
                  "--x0", "[2,0,0]", "--t", "1.0"])
    assert "error" in j  # domain error still exits 0


def test_simulate_sphere_with_csv(model_files):
    out_csv = model_files["tmp"] / "paths.csv"
    j = run_json(["simulate", "--model", str(model_files["sphere"]), "--scheme", "sphere",
                  "--x0", "[1,0,0]", "--T", "0.5", "--h", "0.01", "--paths", "200",
                  "--seed", "42", "--out", str(out_csv)])
    assert j["max_norm_dev"] <= 1e-12
    lines = out_csv.read_text().strip().split("\n")
    assert lines[0] == "path_id,t,x1,x2,x3"
    assert len(lines) == 201  # terminal states only


def test_simulate_full_paths_csv(model_files):
    out_csv = model_files["tmp"] / "full.csv"
    run_json(["simulate", "--model", str(model_files["sphere"]), "--scheme", "sphere",
              "--x0", "[1,0,0]", "--T", "0.1", "--h", "0.01", "--paths", "3",
              "--seed", "4", "--keep-paths", "--out", str(out_csv)])
    lines = out_csv.read_text().strip().split("\n")
    assert len(lines) == 1 + 3 * 11  # header + paths x (steps + 1)


def test_simulate_deterministic_output(model_files):
    argv = ["simulate", "--model", str(model_files["sphere"]), "--scheme", "sphere",
            "--x0", "[1,0,0]", "--T", "0.5", "--h", "0.01", "--paths", "100",
            "--seed", "9"]
    _, out1 = run(argv)
    _, out2 = run(argv)
    assert out1 == out2


def test_simulate_ball_and_scalar(model_files):
    j = run_json(["simulate", "--model", str(model_files["ball"]), "--scheme", "ball",
                  "--x0", "[0,0]", "--T", "0.5", "--h", "0.005", "--paths", "200",
                  "--seed", "3"])
    assert j["n_paths"] == 200
    j = run_json(["simulate", "--scheme", "scalar", "--kappa", "2.0", "--nu", "1.0",
                  "--x0", "[0.5]", "--T", "1.0", "--h", "0.01", "--paths", "2000",
                  "--seed", "1"])
    assert j["terminal_mean"][0] == pytest.approx(np.exp(-2.0) * 0.5, abs=0.03)


def test_twin_command():
    j = run_json(["twin", "--kappa", "1.0", "--nu", "1.0", "--x0", "[1.0]",
                  "--T", "0.2", "--h", "0.001", "--seeds", "3", "--seed", "0"])
    assert j["uniqueness_condition"] is True
    assert max(j["max_divergence"]) == 0.0
    assert j["threshold"] == pytest.approx(np.sqrt(2.0) - 1.0)


def test_density_command(model_files):
    j = run_json(["density", "--model", str(model_files["sphere"]), "--x0", "[1,0,0]"])
    assert j["has_smooth_density"] and j["dim_g"] == 3
    j = run_json(["density", "--model", str(model_files["ball"]), "--x0", "[1,0]"])
    assert j["has_smooth_density"] and j["space"] == "ball"


def test_exit_codes():
    r = subprocess.run([sys.executable, "-m", "quadricdiff.cli", "dims", "--d", "4"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    r = subprocess.run([sys.executable, "-m", "quadricdiff.cli", "bogus"],
                       capture_output=True, text=True)
    assert r.returncode == 2  # usage error
    r = subprocess.run([sys.executable, "-m", "quadricdiff.cli", "validate",
                        "--model", "/no/such/file.json"], capture_output=True, text=True)
    assert r.returncode == 1  # IO error
