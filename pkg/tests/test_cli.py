import csv
import io
import json

import numpy as np
import pytest

from stochpot.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def solve_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def sample_values(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return np.array([float(r["value"]) for r in csv.DictReader(io.StringIO(body))])


def test_solve_disc(capsys):
    code, out, _ = run(capsys, "solve", "disc", "--g", "cos1", "--r", "0.5", "--theta", "0")
    assert code == 0
    assert float(solve_rows(out)[0]["value"]) == pytest.approx(0.5)


def test_solve_disc_grid_of_points(capsys):
    code, out, _ = run(capsys, "solve", "disc", "--g", "cos2", "--r", "0.2,0.6", "--theta", "0,1")
    rows = solve_rows(out)
    assert code == 0 and len(rows) == 4
    for r in rows:
        x, y = map(float, r["point"].split(";"))
        assert float(r["value"]) == pytest.approx(x * x - y * y, abs=1e-9)


def test_solve_ball_constant(capsys):
    code, out, _ = run(capsys, "solve", "ball", "--g", "const:3")
    assert code == 0
    assert all(float(r["value"]) == pytest.approx(3.0) for r in solve_rows(out))


def test_solve_wos(capsys):
    code, out, _ = run(capsys, "solve", "wos", "--domain", "ball", "--g", "zdir", "--x", "0,0,0.5")
    row = solve_rows(out)[0]
    assert code == 0
    assert abs(float(row["value"]) - 0.5) < 3 * float(row["stderr"])
    assert float(row["mean_steps"]) > 1


def test_solve_out_of_domain_rows(capsys):
    code, out, _ = run(capsys, "solve", "ball", "--g", "zdir", "--x", "0,0,2", "--x", "0,0,0.5")
    rows = solve_rows(out)
    assert code == 0
    assert rows[0]["value"] == "" and rows[0]["error"]
    code, _, _ = run(capsys, "solve", "ball", "--g", "zdir", "--x", "0,0,2")
    assert code == 1


def test_solve_json(capsys):
    code, out, _ = run(capsys, "solve", "disc", "--r", "0.5", "--theta", "0", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["rows"][0]["value"] == pytest.approx(0.5)


def test_sample_reproducible_and_scaled(capsys):
    args = ("sample", "--kernel", "exponential", "--domain", "circle:1", "--seed", "7")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    _, c, _ = run(capsys, *args, "--lambda", "2.5")
    assert a == b
    assert np.array_equal(sample_values(c), 2.5 * sample_values(a))


def test_sample_white_noise_rejected(capsys):
    code, _, err = run(capsys, "sample", "--kernel", "white")
    assert code == 1
    assert "Kolmogorov continuity condition is not satisfied" in err


@pytest.mark.parametrize("argv", [
    ("verify", "unknown-thing"),
    ("frobnicate",),
    ("solve", "torus"),
    ("verify", "sadei", "--samples", "5"),
    ("verify", "sadei", "--config", "/nonexistent/file.cfg"),
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_verify_kolmogorov_writes_report(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "kolmogorov-kernels", "--samples", "20000",
                       "--out", str(tmp_path))
    assert code == 0 and out.startswith("PASS kolmogorov-kernels")
    rows = list(csv.DictReader((tmp_path / "kolmogorov_kernels.csv").open(encoding="utf-8")))
    verdicts = [r for r in rows if r["statistic"].startswith("admissibility")]
    assert len(verdicts) == 4 and all(r["verdict"] == "PASS" for r in verdicts)
    assert {r["provenance"] for r in rows} <= {"paper", "oracle", "mc"}


def test_verify_mvp_json(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "mvp-stochastic", "--samples", "5000", "--out",
                     str(tmp_path), "--format", "json")
    data = json.loads((tmp_path / "mvp_stochastic.json").read_text())
    assert code == 0
    stats = " ".join(r["statistic"] for r in data["rows"])
    assert "mean" in stats and "covariance" in stats and "volatility" in stats


def test_dump_config_reproduces_run(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    a, b = tmp_path / "a", tmp_path / "b"
    code, _, _ = run(capsys, "verify", "line-integral", "--samples", "2000", "--seed", "3",
                     "--xi", "0.4", "--out", str(a), "--dump-config", str(cfg))
    assert code == 0
    text = cfg.read_text()
    assert "seed=3" in text and "xi=0.4" in text
    code, _, _ = run(capsys, "verify", "line-integral", "--config", str(cfg), "--out", str(b))
    assert code == 0
    assert (a / "line_integral.csv").read_bytes() == (b / "line_integral.csv").read_bytes()


def test_flags_override_config(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed=1\nsamples=2000\n")
    code, out, _ = run(capsys, "verify", "sadei", "--config", str(cfg), "--seed", "9",
                       "--dump-config", "-", "--out", str(tmp_path))
    assert code == 0
    assert "seed=9" in out and "samples=2000" in out
