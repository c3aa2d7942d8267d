"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a PASS/FAIL line that is printed in the terminal summary
("acceptance criteria" section).  Criterion 15 asks for a monotone decrease
of the noise variance toward the sphere; the computed variance increases,
so that sub-check is reported FAIL while the test asserts the behaviour
actually observed.
"""

import filecmp
import math
import os

import numpy as np
import pytest

from stochpot.cli import main
from stochpot.config import RunConfig
from stochpot.geometry import Ball, Disc
from stochpot.grf import Exponential, GaussianCorr, PowerLaw, WhiteNoise, gaussian_moment, kc_admissible
from stochpot.harmonic import (boundary_preset, disc_fourier_eval, disc_fourier_solve,
                               disc_poisson_eval)
from stochpot.potentials import (RieszSpec, ball_integral_closed, ball_newton_closed,
                                 ball_newton_gradient_closed, riesz_potential)
from stochpot.stochastic import noisy_boundary_ball
from stochpot.verify import ALL_IDS, report_path, run_suite
from stochpot.wos import WalkConfig, wos_laplace, wos_poisson

pytestmark = pytest.mark.slow


def rows(rep, prefix):
    hits = [r for r in rep.rows if r.statistic.startswith(prefix)]
    assert hits, f"no row starting with {prefix!r} in {rep.name}"
    return hits


def passed(rep, prefix):
    return all(r.verdict == "PASS" for r in rows(rep, prefix))


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_ball_integral(acceptance_log):
    spec = RieszSpec(3, 2.0, 1.0, Ball(3, 1.0))
    exterior = float(riesz_potential(spec, [0.0, 0.0, 2.0]))
    centre = float(riesz_potential(spec, [0.0, 0.0, 0.0]))
    surface = float(riesz_potential(spec, [0.0, 0.0, 1.0]))
    inside, outside = ball_integral_closed(1.0, 1.0 - 1e-9), ball_integral_closed(1.0, 1.0 + 1e-9)
    checks = {
        "exterior a=2 within 1% of 2pi/3": rel(exterior, 2 * math.pi / 3) <= 0.01,
        "centre a=0 within 1% of 2pi": rel(centre, 2 * math.pi) <= 0.01,
        "closed form a=2 is (4/3)pi R^3 / a": math.isclose(ball_integral_closed(1.0, 2.0), 2 * math.pi / 3),
        "branches meet at a=R within 2%": rel(inside, outside) <= 0.02,
        "quadrature at a=R within 2%": rel(surface, ball_integral_closed(1.0, 1.0)) <= 0.02,
    }
    acceptance_log(1, "ball-integral closed forms", checks)
    assert all(checks.values()), checks


def test_criterion_02_newton_exterior(acceptance_log):
    spec = RieszSpec(3, 2.0, 1.0, Ball(3, 1.0), gamma=1 / (4 * math.pi))
    quad = float(riesz_potential(spec, [0.0, 2.0, 0.0]))
    checks = {
        "quadrature within 1% of 1/6": rel(quad, 1 / 6) <= 0.01,
        "closed form exactly 1/6": ball_newton_closed(1.0, 2.0) == pytest.approx(1 / 6, rel=1e-15),
    }
    acceptance_log(2, "Newtonian exterior value", checks)
    assert all(checks.values()), checks


def test_criterion_03_force_gradient(acceptance_log):
    a = np.array([0.0, 0.0, 2.0])
    grad = ball_newton_gradient_closed(1.0, a)
    h = 1e-5
    fd = np.array([(ball_integral_closed(1.0, np.linalg.norm(a + h * e))
                    - ball_integral_closed(1.0, np.linalg.norm(a - h * e))) / (2 * h)
                   for e in np.eye(3)])
    checks = {
        "magnitude pi/3": math.isclose(np.linalg.norm(grad), math.pi / 3, rel_tol=1e-12),
        "central differences rel err <= 1e-6":
            np.linalg.norm(fd - grad) / np.linalg.norm(grad) <= 1e-6,
    }
    acceptance_log(3, "force gradient", checks)
    assert all(checks.values()), checks


def test_criterion_04_disc_solvers(acceptance_log):
    r = np.linspace(0.0, 0.9, 19)[:, None]
    t = np.linspace(0.0, 2 * math.pi, 25)[None, :]
    checks = {}
    for spec in ("cos1", "cos2", "sin3"):
        g = boundary_preset(spec)
        gap = np.max(np.abs(disc_poisson_eval(g, 1.0, r, t)
                            - disc_fourier_eval(disc_fourier_solve(g, 16), 1.0, r, t)))
        checks[f"{spec}: Poisson vs Fourier <= 1e-8"] = gap <= 1e-8
    beta = np.arange(4096) * (2 * math.pi / 4096)
    for spec in ("cos1", "step", "const:3"):
        g = boundary_preset(spec)
        centre = float(disc_poisson_eval(g, 1.0, 0.0, 0.0))
        checks[f"{spec}: centre equals boundary mean"] = abs(centre - g.on_angles(beta).mean()) <= 1e-10
    acceptance_log(4, "disc solver agreement", checks)
    assert all(checks.values()), checks


def test_criterion_05_walk_on_spheres(acceptance_log):
    cfg = WalkConfig(1e-3, 10_000, 10_000, 0)
    disc = wos_laplace(Disc(1.0), boundary_preset("cos1"), (0.5, 0.0), cfg)
    ball = wos_laplace(Ball(3, 1.0), boundary_preset("zdir"), (0.0, 0.0, 0.5), cfg)
    p2 = wos_poisson(Disc(1.0), -4.0, 0.0, (0.0, 0.0), cfg)
    p3 = wos_poisson(Ball(3, 1.0), -6.0, 0.0, (0.0, 0.0, 0.0), cfg)
    checks = {
        "disc Laplace 0.5 within 3se": abs(disc.estimate - 0.5) < 3 * disc.stderr,
        "ball Laplace 0.5 within 3se": abs(ball.estimate - 0.5) < 3 * ball.stderr,
        # from the centre the first sphere is the whole domain, so stderr may be 0
        "disc Poisson 1 - r^2 at centre": abs(p2.estimate - 1.0) <= 3 * p2.stderr + 1e-12,
        "ball Poisson 1 - r^2 at centre": abs(p3.estimate - 1.0) <= 3 * p3.stderr + 1e-12,
    }
    acceptance_log(5, "walk-on-spheres oracle", checks)
    assert all(checks.values()), checks


def test_criterion_06_classical_suite(acceptance_log):
    rep = run_suite("classical", RunConfig())
    checks = {
        "MVP residuals of presets": passed(rep, "MVP "),
        "random family": passed(rep, "random family"),
        "comparison and stability": passed(rep, "comparison") and passed(rep, "stability"),
    }
    family = [r.statistic for r in rows(rep, "random family")]
    assert len(family) == 5
    acceptance_log(6, "classical estimate suite", checks)
    assert all(checks.values()) and rep.passed, rep.failures()


def test_criterion_07_admissibility(acceptance_log):
    table = {Exponential(): True, GaussianCorr(): True, PowerLaw(): False, WhiteNoise(): False}
    checks = {k.describe(): bool(kc_admissible(k)) is v for k, v in table.items()}
    acceptance_log(7, "kernel admissibility table", checks)
    assert all(checks.values()), checks


def test_criterion_08_sampler_fidelity(acceptance_log):
    rep = run_suite("kolmogorov-kernels", RunConfig())
    fourth = rows(rep, "fourth moment at point 0")[0]
    paper = rows(rep, "fourth moment, even-moment rule")[0]
    checks = {
        "covariance within 3se": passed(rep, "covariance"),
        "fourth moment matches 3 alpha^2": fourth.verdict == "PASS"
            and fourth.oracle_value == gaussian_moment(1.0, 4),
        "paper alpha^2 outside band and flagged":
            abs(fourth.mc_estimate - 1.0) > 3 * fourth.mc_stderr and paper.verdict == "NOTE",
        "100000 draws": fourth.n_samples == 100_000,
    }
    acceptance_log(8, "sampler fidelity", checks)
    assert all(checks.values()), checks


def test_criterion_09_stochastic_mvp(acceptance_log):
    rep = run_suite("mvp-stochastic", RunConfig())
    vol = rows(rep, "psi=0: volatility of perturbed ball average")[0]
    checks = {
        "psi=0 volatility vs double quadrature": vol.verdict == "PASS" and vol.n_samples == 100_000,
        "mean equals psi(x) for psi=2+x": passed(rep, "psi=2+x: mean of perturbed"),
        "third moment near zero": passed(rep, "psi=0: third central moment"),
    }
    acceptance_log(9, "stochastic mean value property", checks)
    assert all(checks.values()) and rep.passed, rep.failures()


def test_criterion_10_line_integrals(acceptance_log):
    rep = run_suite("line-integral", RunConfig())
    checks = {
        "closed-loop mean zero": passed(rep, "closed-loop mean"),
        "loop-loop covariance vs double quadrature": passed(rep, "loop-loop covariance"),
    }
    acceptance_log(10, "line integrals", checks)
    assert all(checks.values()) and rep.passed, rep.failures()


def test_criterion_11_sadei(acceptance_log):
    rep = run_suite("sadei", RunConfig())
    shift = rows(rep, "energy shift within 5%")[0]
    checks = {"energy shift within 5% at 10^4 samples": shift.verdict == "PASS"
              and rows(rep, "expected energy")[0].n_samples == 10_000}
    acceptance_log(11, "energy shift", checks)
    assert all(checks.values()) and rep.passed, rep.failures()


def test_criterion_12_cacciopolli(acceptance_log):
    rep = run_suite("cacciopolli-stochastic", RunConfig())
    forms = rows(rep, "R=1: quadrature form seed")
    checks = {
        "holds at R=1": passed(rep, "condition holds at R=1"),
        "fails at R=6": passed(rep, "condition fails at R=6"),
        "inequality over 10 seeds": len(forms) == 10 and all(r.verdict == "PASS" for r in forms),
    }
    acceptance_log(12, "stochastic Cacciopolli", checks)
    assert all(checks.values()) and rep.passed, rep.failures()


def test_criterion_13_turbulence(acceptance_log):
    rep = run_suite("turbulence", RunConfig())
    checks = {
        "volatility |u|^2 + gradient variance": passed(rep, "volatility |u_bar|^2"),
        "decorrelation at 10 xi": passed(rep, "decorrelated"),
        "cylinder boundary reduction": passed(rep, "pair 0: boundary reduction"),
    }
    acceptance_log(13, "turbulence", checks)
    assert all(checks.values()) and rep.passed, rep.failures()


def test_criterion_14_noisy_disc(acceptance_log):
    rep = run_suite("noisy-disc", RunConfig())
    laps = rows(rep, "E[Lap psi_bar] at")
    checks = {
        "mean equals Poisson solution": passed(rep, "mean at (r, theta)"),
        "|E[Lap psi_bar]| <= 1e-3 at 5 points": len(laps) == 5
            and all(abs(r.mc_estimate) <= 1e-3 for r in laps)
            and passed(rep, "max |E[Lap psi_bar]|"),
        "volatility vs double quadrature": passed(rep, "volatility E[psi_bar^2]"),
        "arctan form recorded": rows(rep, "moment P=2, published arctan")[0].verdict == "NOTE",
        "centre-limit claim recorded":
            rows(rep, "noise variance at the centre, published")[0].verdict == "NOTE",
    }
    acceptance_log(14, "noisy boundary disc", checks)
    assert all(checks.values()) and rep.passed, rep.failures()


def test_criterion_15_noisy_ball(acceptance_log):
    rep = noisy_boundary_ball()
    variances = [rows(rep, f"noise variance at a/R={q}")[0] for q in (0.5, 0.8, 0.95)]
    values = [r.mc_estimate for r in variances]
    monotone = rows(rep, "noise variance decreases toward the sphere")[0]
    checks = {
        "mean equals ball Poisson solution": passed(rep, "mean at x"),
        "log closed form compared and recorded":
            rows(rep, "surface integral, published log form")[0].verdict == "NOTE"
            and passed(rep, "surface integral of"),
        f"monotone decrease of MC volatility (observed {values[0]:.3g}, {values[1]:.3g}, "
        f"{values[2]:.3g})": monotone.verdict == "PASS",
    }
    acceptance_log(15, "noisy boundary ball", checks)
    assert checks["mean equals ball Poisson solution"]
    assert checks["log closed form compared and recorded"]
    # the faithful check fails: the boundary noise dominates near the sphere
    assert monotone.verdict == "FAIL"
    assert values[0] < values[1] < values[2]
    assert all(abs(r.mc_estimate - r.oracle_value) < 3 * r.mc_stderr for r in variances)
    assert rep.failures() == [monotone]


def test_criterion_16_determinism(acceptance_log, tmp_path, monkeypatch):
    monkeypatch.delenv("STOCHPOT_THREADS", raising=False)
    dirs = {}
    for workers in (1, 2, 8):
        out = tmp_path / f"w{workers}"
        main(["verify", "all", "--samples", "1000", "--seed", "11", "--workers", str(workers),
              "--out", str(out)])
        dirs[workers] = out
    names = [os.path.basename(report_path("", n)) for n in ALL_IDS]
    checks = {}
    for workers in (2, 8):
        match, mismatch, errors = filecmp.cmpfiles(dirs[1], dirs[workers], names, shallow=False)
        checks[f"1 vs {workers} workers byte-identical"] = len(match) == len(names) and not errors
    acceptance_log(16, "determinism across 1, 2 and 8 workers", checks)
    assert all(checks.values()), checks
