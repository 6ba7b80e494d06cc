import json
import subprocess
import sys

import numpy as np

from fracstab.cli import main, read_curve_csv
from fracstab.params import OrderPair
from fracstab.stability import boundary_for, classify_on_curve


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_example(capsys):
    code, out, err = run(capsys, "classify", "--alpha", "0.8", "--beta", "0.2", "--a", "0.6",
                         "--b", "0.8")
    assert code == 0 and err == ""
    data = json.loads(out)
    assert data["verdict"] == "stable" and data["winding"] == 1
    assert data["b"] == {"re": 0.8, "im": 0.0}
    assert set(data) == {"alpha", "beta", "a", "b", "winding", "verdict"}


def test_interval_example(capsys):
    code, out, _ = run(capsys, "interval", "--alpha", "0.8", "--beta", "0.2", "--a", "0.6")
    data = json.loads(out)
    assert code == 0
    assert round(data["b_lo"], 5) == -1.43032 and data["b_hi"] == 1
    assert data["degenerate"] is False


def test_missing_flag_is_usage_error(capsys):
    code, out, err = run(capsys, "classify", "--alpha", "0.8", "--a", "0.6", "--b", "0.8")
    assert code == 1 and out == ""
    lines = err.strip().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["error"] == "usage"


def test_parameter_errors(capsys):
    code, _, err = run(capsys, "simulate", "--alpha", "0.8", "--beta", "0.2", "--a", "-1",
                       "--b", "0.5")
    assert code == 1 and json.loads(err)["error"] == "SingularParameterError"
    code, _, err = run(capsys, "interval", "--alpha", "0.2", "--beta", "0.8", "--a", "0")
    assert code == 1


def test_marginal_exit_code(capsys):
    code, out, _ = run(capsys, "classify", "--alpha", "0.8", "--beta", "0.2", "--a", "0.6",
                       "--b", "1")
    assert code == 3 and json.loads(out)["verdict"] == "marginal"


def test_numeric_failure_exit_code(capsys, monkeypatch):
    from fracstab import bifurcation
    from fracstab.errors import NoRootError

    def boom(orders):
        raise NoRootError("forced")

    monkeypatch.setattr(bifurcation, "bifurcation_set", boom)
    code, _, err = run(capsys, "bifurcations", "--alpha", "0.9", "--beta", "0.6")
    assert code == 2 and json.loads(err)["error"] == "NoRootError"


def test_simulate_outputs(capsys):
    code, out, _ = run(capsys, "simulate", "--alpha", "0.9", "--beta", "0.6", "--a", "0",
                       "--b", "0.5,0.5", "--residual")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "converging" and data["residual"] < 1e-9
    code, out, _ = run(capsys, "simulate", "--alpha", "0.9", "--beta", "0.6", "--a", "0",
                       "--b", "0.5", "--n", "1", "--format", "csv")
    x1 = (0.9 + 0.5 - 1.0) * 0.1
    assert out == f"n,re,im\n0,0.10000000000000001,0\n1,{x1:.17g},0\n"


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--alpha", "0.9", "--beta", "0.6", "--a", "-1.17",
                       "--b", "0.8,0.2")
    assert code == 0 and json.loads(out)["max_residual"] < 1e-9


def test_bifurcations(capsys):
    code, out, _ = run(capsys, "bifurcations", "--alpha", "0.9", "--beta", "0.6")
    data = json.loads(out)
    assert data["a1"] == 0 and abs(data["a2"] + 0.967328) < 1e-6
    assert -1.17 < data["a3"] < data["a2"] and 0 < data["theta_star"] < np.pi
    code, out, _ = run(capsys, "bifurcations", "--alpha", "0.4", "--beta", "0.2")
    assert json.loads(out)["a3"] is None


def test_regions(capsys):
    code, out, _ = run(capsys, "regions", "--alpha", "0.9", "--beta", "0.6", "--a", "-1.17",
                       "--grid", "400")
    data = json.loads(out)
    assert data["components"] == 2 and len(data["representatives"]) == 2
    assert len(data["rows"]) == 400 and set("".join(data["rows"])) <= set("SUM")
    code, out, _ = run(capsys, "regions", "--alpha", "0.9", "--beta", "0.6", "--a", "0",
                       "--grid", "20x30", "--format", "csv")
    lines = out.split("\n")
    assert len(lines) == 22 and lines[-1] == ""
    assert len(lines[0].split(",")) == 31


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--alpha", "0.9", "--beta", "0.6", "--from", "-0.96",
                       "--to", "-0.975", "--step", "0.005", "--grid", "100")
    events = json.loads(out)
    assert code == 0 and events
    e = events[0]
    assert set(e) == {"a", "before", "after"}
    assert set(e["before"]) == {"n_self_intersections", "n_cusps", "n_stable_components",
                                "n_unstable_subregions"}


def test_boundary_round_trip(tmp_path, capsys):
    path = tmp_path / "curve.csv"
    code, _, _ = run(capsys, "boundary", "--alpha", "0.4", "--beta", "0.2", "--a", "-0.9361",
                     "--out", str(path))
    assert code == 0
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.startswith(b"theta,re,im\n")
    orders = OrderPair(0.4, 0.2)
    loaded = read_curve_csv(str(path), orders, -0.9361)
    mem = boundary_for(orders, -0.9361)
    assert np.array_equal(loaded.thetas, mem.thetas)
    assert np.array_equal(loaded.points, mem.points)
    rng = np.random.default_rng(3)
    x0, x1, y0, y1 = mem.bbox
    for _ in range(20):
        b = complex(rng.uniform(x0, x1), rng.uniform(y0, y1))
        expected = classify_on_curve(mem, b)[0].value
        code, out, _ = run(capsys, "classify", "--alpha", "0.4", "--beta", "0.2", "--a",
                           "-0.9361", f"--b={b.real!r},{b.imag!r}", "--curve", str(path))
        assert json.loads(out)["verdict"] == expected


def test_determinism(capsys):
    argv = ["boundary", "--alpha", "0.9", "--beta", "0.6", "--a", "-1.17", "--samples", "256"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracstab", "interval", "--alpha", "0.8",
                           "--beta", "0.2", "--a", "0.6"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["b_hi"] == 1
    assert proc.stdout.endswith("}\n") and " " not in proc.stdout
