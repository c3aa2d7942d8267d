import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochpot.exceptions import StochpotError
from stochpot.geometry import Ball, Curve, Disc
from stochpot.grf import GaussianCorr, NoiseConstants, gaussian_moment
from stochpot.harmonic import ComplexPoly, FlowPastSphere, Linear, disc_poisson_eval
from stochpot.potentials import RieszSpec
from stochpot.stochastic import (PerturbedField, arctan_moment, averaged_max_principle,
                                 ball_poisson_weights, binomial_moment, cacciopolli_condition,
                                 cylinder_boundary_stats, disc_poisson_weights, force_moments,
                                 gaussian_sum_moment, graded_sphere_grid, laplacian_moments,
                                 noisy_boundary_ball, noisy_boundary_disc, noisy_density_newton,
                                 paper_surface_integral, perturbed_mvp, quadratic_form, sadei,
                                 sampler_fidelity, stochastic_bochner, stochastic_cacciopolli,
                                 stochastic_harnack, stochastic_line_integral,
                                 stochastic_riesz_moments, turbulent_flow_stats)

K = GaussianCorr(1.0, 0.5)


def row(rep, prefix):
    hits = [r for r in rep.rows if r.statistic.startswith(prefix)]
    assert hits, f"no row starting with {prefix!r} in {rep.name}"
    return hits[0]


# ---- closed forms -----------------------------------------------------------


@pytest.mark.parametrize("P", [1, 2, 3, 4, 5])
@given(psi=st.floats(-3, 3), var=st.floats(0, 4))
@settings(max_examples=20)
def test_gaussian_sum_moment_matches_hermite_expansion(P, psi, var):
    # E[(psi + sqrt(var) Z)^P] by Gauss-Hermite quadrature
    z, w = np.polynomial.hermite_e.hermegauss(12)
    expected = np.sum(w * (psi + math.sqrt(var) * z) ** P) / math.sqrt(2 * math.pi)
    assert gaussian_sum_moment(psi, var, P) == pytest.approx(expected, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("convention, expected", [("gaussian", 1 + 6 + 3), ("paper", 1 + 6 + 1)])
def test_binomial_moment_conventions(convention, expected):
    # (psi + Z)^4 with psi = 1, lam = alpha = 1
    assert binomial_moment(1.0, 1.0, 1.0, 4, convention) == pytest.approx(expected)


@pytest.mark.parametrize("R, holds", [(1.0, True), (6.0, False)])
def test_cacciopolli_condition_threshold(R, holds):
    lhs, rhs, threshold = cacciopolli_condition(R, 1.0, 1.0, 3)
    assert (lhs <= rhs) is holds
    assert threshold == pytest.approx(2 * math.sqrt(7))


def test_disc_weights_reproduce_poisson_solution():
    X = np.array([[0.5, 0.0], [0.1, -0.4], [-0.6, 0.6]])
    W = disc_poisson_weights(1.0, X, 512)
    beta = 2 * np.pi * np.arange(512) / 512
    g = np.cos(beta) + 0.5 * np.sin(2 * beta)
    r, t = np.hypot(*X.T), np.arctan2(X[:, 1], X[:, 0])
    expected = disc_poisson_eval(lambda b: np.cos(b) + 0.5 * np.sin(2 * b), 1.0, r, t)
    assert np.allclose(g @ W, expected, atol=1e-10)
    assert np.allclose(W.sum(axis=0), 1.0)


@pytest.mark.parametrize("a", [0.0, 0.5, 0.9])
def test_ball_weights_partition_unity(a):
    grid = graded_sphere_grid(1.0, 40, 64)
    W = ball_poisson_weights(grid, 1.0, a)
    assert W.sum() == pytest.approx(1.0, rel=1e-6)
    assert W[:, 0] @ grid.points[:, 2] == pytest.approx(a, abs=1e-6)


def test_quadratic_form_blocks_agree():
    pts = np.random.default_rng(0).uniform(-1, 1, (300, 2))
    U = np.random.default_rng(1).normal(size=(300, 3))
    full = U.T @ K.matrix(pts, pts) @ U
    assert np.allclose(quadratic_form(K, pts, U, block=64), full)


def test_paper_surface_integral_centre_limit():
    assert paper_surface_integral(1.0, 0.0) == pytest.approx(-4 * math.pi)


def test_arctan_form_is_finite():
    assert math.isfinite(arctan_moment(0.5, 1.0, 0.5, 0.3, 2))


# ---- Monte Carlo suites (reduced samples) -----------------------------------


def test_perturbed_mvp_zero_base():
    rep = perturbed_mvp(PerturbedField(None, 1.0, K), Ball(3, 1.0), n_samples=20_000)
    assert rep.passed
    assert row(rep, "volatility of perturbed ball average").verdict == "PASS"


def test_perturbed_mvp_nonzero_base():
    f = PerturbedField(Linear((1.0, 0.0, 0.0), 2.0), 1.0, K)
    rep = perturbed_mvp(f, Ball(3, 1.0, (0.5, 0.0, 0.0)), n_samples=10_000)
    assert row(rep, "mean of perturbed ball average").oracle_value == pytest.approx(2.5)
    assert rep.passed


def test_sampler_fidelity_flags_paper_moment():
    rep = sampler_fidelity(n_samples=100_000)
    assert rep.passed
    fourth = row(rep, "fourth moment")
    assert fourth.oracle_value == pytest.approx(gaussian_moment(1.0, 4))
    assert fourth.paper_verdict == "disagrees"


def test_stochastic_harnack_orders_sums():
    rep = stochastic_harnack(Linear((1.0, 0.0, 0.0), 2.0), np.array([0.5, 0.0, 0.0]), 1.0, 0.3, K,
                             n_samples=5000)
    assert rep.passed


def test_averaged_max_principle():
    rep = averaged_max_principle(PerturbedField(ComplexPoly(2), 0.5, K), Disc(1.0), n_samples=3000)
    assert rep.passed


def test_sadei_shift():
    rep = sadei(PerturbedField(None, 1.0, K), Ball(3, 1.0), n_samples=3000)
    assert row(rep, "energy shift within 5%").verdict == "PASS"
    assert row(rep, "energy shift, published").verdict == "NOTE"


@pytest.mark.parametrize("R, holds", [(1.0, True), (6.0, False)])
def test_stochastic_cacciopolli_condition(R, holds):
    rep = stochastic_cacciopolli(R, NoiseConstants(1.0, 1.0))
    assert rep.passed and rep.holds is holds
    assert row(rep, "condition evaluation").detail == ("holds" if holds else "fails")


def test_stochastic_cacciopolli_quadrature_form():
    # xi = sqrt(6) makes beta / alpha = 1 for the 3-D squared exponential
    k = GaussianCorr(1.0, math.sqrt(6.0))
    consts = NoiseConstants.from_kernel(k, 3, 1.0)
    assert consts.beta == pytest.approx(consts.alpha)
    field = PerturbedField(Linear((1.0, 0.0, 0.0), 0.0), 1.0, k)
    rep = stochastic_cacciopolli(1.0, consts, 3, field, range(3), 100)
    forms = [r for r in rep.rows if r.statistic.startswith("quadrature form")]
    assert len(forms) == 3 and all(r.mc_estimate <= r.oracle_value for r in forms)
    assert rep.passed


def test_stochastic_bochner():
    rep = stochastic_bochner(ComplexPoly(2), np.array([0.2, 0.1]), GaussianCorr(1.0, 1.0), n_samples=3000)
    assert rep.passed


def test_line_integral_loops():
    rep = stochastic_line_integral(PerturbedField(None, 1.0, K), Curve.circle(0.5),
                                   Curve.circle(0.3, center=(0.2, 0.0)), n_samples=3000)
    assert rep.passed
    assert row(rep, "loop-loop covariance").verdict == "PASS"


def test_turbulence_stats():
    rep = turbulent_flow_stats(FlowPastSphere(), K, n_samples=3000, kelvin_samples=500)
    assert rep.passed
    assert all(r.verdict == "NOTE" for r in rep.rows if r.provenance == "paper")


def test_cylinder_boundary_reduction():
    assert cylinder_boundary_stats(n_samples=5000).passed


def test_riesz_moments():
    spec = RieszSpec(3, 1.5, 1.0, Ball(3, 1.0), 12, 1.0, "gauss")
    rep = stochastic_riesz_moments(spec, 1.0, K, np.array([0.0, 0.0, 2.0]), n_samples=5000)
    assert rep.passed


@pytest.mark.parametrize("fn", [noisy_density_newton, force_moments, laplacian_moments])
def test_newton_suites(fn):
    assert fn(n_samples=3000).passed


def test_perturbed_field_rejects_inadmissible_kernel():
    from stochpot.grf import WhiteNoise
    with pytest.raises(StochpotError):
        perturbed_mvp(PerturbedField(None, 1.0, WhiteNoise()), Ball(3, 1.0), n_samples=1000)


def test_noisy_disc():
    rep = noisy_boundary_disc(n_samples=10_000)
    assert rep.passed
    assert row(rep, "max |E[Lap psi_bar]|").verdict == "PASS"
    centre = row(rep, "noise variance at the centre, published")
    assert centre.verdict == "NOTE" and centre.paper_verdict == "disagrees"


def test_noisy_ball_variance_grows_toward_sphere():
    rep = noisy_boundary_ball(n_samples=10_000)
    variances = [row(rep, f"noise variance at a/R={q}").mc_estimate for q in (0.5, 0.8, 0.95)]
    assert variances[0] < variances[1] < variances[2]
    mono = row(rep, "noise variance decreases")
    assert mono.verdict == "FAIL"
    assert [r.statistic for r in rep.failures()] == [mono.statistic]
    as_note = noisy_boundary_ball(n_samples=2000, monotone_as_note=True)
    assert as_note.passed


def test_noisy_ball_mean_matches_poisson():
    rep = noisy_boundary_ball(n_samples=5000)
    assert row(rep, "mean at x").verdict == "PASS"
    assert row(rep, "surface integral of").verdict == "PASS"
