import pytest

from stochpot.config import RunConfig
from stochpot.exceptions import NonDifferentiableKernel
from stochpot.verify import ALL_IDS, SUITES, report_path, run_suite, suite_ids, write_report

SPEC_IDS = ["mvp-stochastic", "harnack-stochastic", "cacciopolli-stochastic", "riesz-moments",
            "noisy-disc", "noisy-ball", "sadei", "bochner-stochastic", "turbulence",
            "line-integral", "newton-density", "kolmogorov-kernels"]


def test_dispatch_table_covers_every_identifier():
    assert sorted(SUITES) == sorted(SPEC_IDS)
    assert suite_ids("all") == ALL_IDS
    with pytest.raises(KeyError):
        suite_ids("unknown-thing")


def test_report_path_uses_identifier():
    assert report_path("out", "mvp-stochastic").endswith("mvp_stochastic.csv")
    assert report_path("out", "noisy-ball", "json").endswith("noisy_ball.json")


@pytest.mark.parametrize("name", ["sadei", "bochner-stochastic", "turbulence",
                                  "cacciopolli-stochastic"])
def test_derivative_suites_need_smooth_kernel(name):
    with pytest.raises(NonDifferentiableKernel):
        run_suite(name, RunConfig(kernel="exponential", samples=200))


@pytest.mark.parametrize("name", ["harnack-stochastic", "line-integral", "potentials",
                                  "riesz-moments", "bochner-stochastic"])
def test_quick_suites_pass(name, tmp_path):
    rep = run_suite(name, RunConfig(samples=4000))
    assert rep.passed, [r.statistic for r in rep.failures()]
    path = write_report(rep, str(tmp_path))
    text = open(path, encoding="utf-8").read()
    assert text.splitlines()[0].startswith("statistic,")
    assert all(r.provenance in ("paper", "oracle", "mc") for r in rep.rows)


def test_noisy_ball_suite_records_monotone_check_as_note():
    rep = run_suite("noisy-ball", RunConfig(samples=2000))
    row = [r for r in rep.rows if r.statistic.startswith("noise variance decreases")][0]
    assert row.verdict == "NOTE" and rep.passed


def test_lambda_zero_is_deterministic():
    rep = run_suite("line-integral", RunConfig(samples=1000, lam=0.0))
    for r in rep.rows:
        if r.provenance == "mc" and r.mc_stderr is not None:
            assert r.mc_stderr == pytest.approx(0.0, abs=1e-12)
