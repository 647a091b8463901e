import json
import socket
import subprocess
import sys
import threading
import time

import numpy as np
import pytest

from snwitness.operators import tmsv_gamma

CLI = [sys.executable, "-m", "snwitness"]


def run_cli(*args, **kwargs):
    return subprocess.run(CLI + list(args), capture_output=True, text=True, **kwargs)


def test_fr_identity():
    res = run_cli("fr", "--operator", "identity", "--d", "4", "--r", "2",
                  "--restarts", "10", "--seed", "0")
    assert res.returncode == 0, res.stderr
    body = json.loads(res.stdout)
    assert abs(body["f_r"] - 1.0) < 1e-6
    assert body["f_r_source"] == "oracle"


def test_fr_matched_closed_form():
    res = run_cli("fr", "--operator", "matched", "--epsilon", "0.3333333333333333",
                  "--delta-phi-deg", "0", "--cutoff", "40", "--r", "2")
    assert res.returncode == 0, res.stderr
    assert abs(json.loads(res.stdout)["f_r"] - 80 / 81) < 1e-10


def test_threshold_command(tmp_path):
    out = tmp_path / "thr.json"
    res = run_cli("threshold", "--epsilon", "0.3333333333333333", "--operator", "matched",
                  "--r", "1", "--cutoff", "100", "--coarse-step-deg", "10",
                  "--refine-tol-deg", "1", "--out", str(out))
    assert res.returncode == 0, res.stderr
    body = json.loads(out.read_text())
    assert 75 < body["threshold_deg"] < 85


def test_verdict_command():
    res = run_cli("verdict", "--operator", "matched", "--epsilon", "0.3333333333333333",
                  "--delta-phi-deg", "10", "--r", "1")
    assert res.returncode == 0, res.stderr
    body = json.loads(res.stdout)
    assert body["verdict"] is True


def test_scan_writes_csv(tmp_path):
    out = tmp_path / "curve.csv"
    res = run_cli("scan", "--operator", "matched", "--epsilon", "0.5", "--r", "1",
                  "--cutoff", "40", "--angle-min-deg", "10", "--angle-max-deg", "40",
                  "--angle-step-deg", "10", "--out", str(out))
    assert res.returncode == 0, res.stderr
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "delta_phi_deg,expectation,f_r,margin"
    assert len(lines) == 5
    row = lines[1].split(",")
    assert float(row[0]) == 10.0
    assert np.isclose(float(row[3]), float(row[1]) - float(row[2]), atol=1e-12)


def test_oracle_byte_identical_runs(tmp_path):
    g = tmsv_gamma(0.4, 0.3, cutoff=3)
    op_file = tmp_path / "L.json"
    op_file.write_text(json.dumps(g.to_json()))
    args = ("oracle", "--file", str(op_file), "--operator", "file", "--r", "2",
            "--restarts", "20", "--seed", "7")
    a = run_cli(*args)
    b = run_cli(*args)
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout


def test_oracle_threads_do_not_change_output(tmp_path):
    g = tmsv_gamma(0.4, 0.3, cutoff=3)
    op_file = tmp_path / "L.json"
    op_file.write_text(json.dumps(g.to_json()))
    base = ("oracle", "--file", str(op_file), "--operator", "file", "--r", "2",
            "--restarts", "16", "--seed", "3")
    a = run_cli(*base, "--threads", "1")
    b = run_cli(*base, "--threads", "4")
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout


def test_schmidt_command(tmp_path):
    state = {"d_a": 2, "d_b": 2,
             "re": [[2**-0.5, 0.0], [0.0, 2**-0.5]],
             "im": [[0.0, 0.0], [0.0, 0.0]]}
    f = tmp_path / "state.json"
    f.write_text(json.dumps(state))
    res = run_cli("schmidt", "--file", str(f))
    assert res.returncode == 0, res.stderr
    body = json.loads(res.stdout)
    assert body["rank"] == 2
    assert np.allclose(body["coefficients"], [2**-0.5] * 2)


def test_validation_error_exit_code_and_message():
    res = run_cli("fr", "--operator", "matched", "--epsilon", "1.5",
                  "--delta-phi-deg", "10", "--r", "1")
    assert res.returncode == 2
    assert "epsilon" in res.stderr


def test_missing_operator_flag():
    res = run_cli("fr", "--r", "1")
    assert res.returncode == 2
    assert "operator" in res.stderr


def test_config_file_merge(tmp_path):
    cfg = {"epsilon": 0.5, "operator": "matched", "delta_phi_deg": 0.0, "cutoff": 30, "r": 2}
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(cfg))
    res = run_cli("fr", "--config", str(f))
    assert res.returncode == 0, res.stderr
    assert abs(json.loads(res.stdout)["f_r"] - (1 - 0.5**4)) < 1e-10
    # flags override the config file
    res = run_cli("fr", "--config", str(f), "--r", "1")
    assert res.returncode == 0, res.stderr
    assert abs(json.loads(res.stdout)["f_r"] - (1 - 0.5**2)) < 1e-10


def test_run_subcommand_uses_config_command(tmp_path):
    cfg = {"command": "fr", "epsilon": 0.5, "operator": "matched",
           "delta_phi_deg": 0.0, "cutoff": 30, "r": 1}
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(cfg))
    res = run_cli("run", "--config", str(f))
    assert res.returncode == 0, res.stderr
    assert abs(json.loads(res.stdout)["f_r"] - 0.75) < 1e-10


def test_round_trip_through_module_parsers(tmp_path):
    # every file the CLI writes parses back through the package loaders
    g = tmsv_gamma(0.3, 0.2, cutoff=2)
    op_file = tmp_path / "L.json"
    op_file.write_text(json.dumps(g.to_json()))
    out = tmp_path / "sol.json"
    res = run_cli("oracle", "--file", str(op_file), "--operator", "file", "--r", "1",
                  "--restarts", "8", "--seed", "1", "--out", str(out))
    assert res.returncode == 0, res.stderr
    body = json.loads(out.read_text())
    from snwitness.bipartite import PureState

    psi = PureState.from_json(body["vector"])
    assert abs(np.linalg.norm(psi.coeffs) - 1) < 1e-10


@pytest.fixture(scope="module")
def live_server():
    """Run the real HTTP service on a free port in a daemon thread."""
    import uvicorn

    from snwitness.service.app import create_app

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    import httpx

    url = f"http://127.0.0.1:{port}"
    while time.time() < deadline:
        try:
            if httpx.get(url + "/health", timeout=1.0).status_code == 200:
                break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        pytest.fail("service did not come up")
    yield url
    server.should_exit = True
    thread.join(timeout=5)


def test_cli_as_http_thin_client(live_server):
    res = run_cli("fr", "--operator", "matched", "--epsilon", "0.5",
                  "--delta-phi-deg", "0", "--cutoff", "30", "--r", "2",
                  "--server", live_server)
    assert res.returncode == 0, res.stderr
    assert abs(json.loads(res.stdout)["f_r"] - (1 - 0.5**4)) < 1e-10
    # identical payload through the in-process path
    local = run_cli("fr", "--operator", "matched", "--epsilon", "0.5",
                    "--delta-phi-deg", "0", "--cutoff", "30", "--r", "2")
    assert local.stdout == res.stdout
