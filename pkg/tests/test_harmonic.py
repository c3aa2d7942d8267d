import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochpot.exceptions import StochpotError
from stochpot.geometry import Ball, Disc, build_grid
from stochpot.harmonic import (ComplexPoly, FlowPastSphere, Linear, Radial3D, RadialLog2D,
                               ball_poisson_eval, bochner_residual, boundary_preset,
                               cacciopolli_check, disc_fourier_eval, disc_fourier_solve,
                               disc_poisson_eval, fd_laplacian, harnack_bounds, harnack_factors,
                               max_principle_check, mvp_residual, poisson_kernel_disc,
                               random_harmonic_polynomial, stability_check)

PRESETS = [ComplexPoly(2), ComplexPoly(3, "imag"), Linear((1.0, -2.0), 0.5),
           Radial3D(1.0, 0.5, (0.0, 0.0, 3.0)), RadialLog2D(1.0, 0.2, (3.0, 0.0)),
           FlowPastSphere(1.0, 0.5)]


@pytest.mark.parametrize("f", PRESETS, ids=lambda f: type(f).__name__)
def test_presets_are_harmonic(f):
    dim = 3 if isinstance(f, (Radial3D, FlowPastSphere)) else 2
    X = np.random.default_rng(0).uniform(-0.4, 0.4, (6, dim)) + (
        np.array([0, 0, 1.5]) if isinstance(f, FlowPastSphere) else 0)
    assert np.max(np.abs(f.laplacian(X))) < 1e-9
    num = fd_laplacian(f.value, X, 1e-3, order=4)
    assert np.max(np.abs(num)) < 1e-5


@pytest.mark.parametrize("f", PRESETS[:4], ids=lambda f: type(f).__name__)
def test_mvp_residuals(f):
    dim = 3 if isinstance(f, Radial3D) else 2
    res = mvp_residual(f, Ball(dim, 1.0))
    assert res.volume < 1e-6 and res.surface < 1e-6


@pytest.mark.parametrize("g, expected", [
    ("cos1", lambda r, t: r * np.cos(t)),
    ("cos2", lambda r, t: r ** 2 * np.cos(2 * t)),
    ("sin3", lambda r, t: r ** 3 * np.sin(3 * t)),
])
@pytest.mark.parametrize("r", [0.0, 0.3, 0.9])
def test_disc_solvers_agree(g, expected, r):
    theta = np.linspace(0, 2 * np.pi, 7)
    gd = boundary_preset(g)
    poisson = disc_poisson_eval(gd, 1.0, r, theta)
    fourier = disc_fourier_eval(disc_fourier_solve(gd, 16), 1.0, r, theta)
    assert np.allclose(poisson, fourier, atol=1e-8)
    assert np.allclose(poisson, expected(r, theta), atol=1e-8)


@given(st.integers(0, 2 ** 31))
@settings(max_examples=20, deadline=None)
def test_centre_value_is_boundary_mean(seed):
    c = np.random.default_rng(seed).normal(size=4)
    g = lambda t: c[0] + c[1] * np.cos(t) + c[2] * np.sin(2 * t) + c[3] * np.cos(t) ** 4
    centre = disc_poisson_eval(g, 1.0, 0.0, 0.0)
    t = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    assert centre == pytest.approx(np.mean(g(t)), abs=1e-10)


@given(st.floats(0, 0.95), st.floats(-np.pi, np.pi))
@settings(max_examples=30)
def test_poisson_kernel_normalised(r, theta):
    beta = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
    P = poisson_kernel_disc(1.0, r, theta, beta)
    assert np.all(P > 0)
    assert np.mean(P) == pytest.approx(1.0, rel=1e-6)


def test_disc_poisson_out_of_domain():
    with pytest.raises(StochpotError):
        disc_poisson_eval(boundary_preset("cos1"), 1.0, 1.5, 0.0)


@pytest.mark.parametrize("x, expected", [
    ((0.0, 0.0, 0.0), 0.0), ((0.0, 0.0, 0.5), 0.5), ((0.3, -0.2, 0.4), 0.4),
])
def test_ball_poisson_zdir(x, expected):
    assert ball_poisson_eval(boundary_preset("zdir"), np.array(x), 1.0) == pytest.approx(expected, abs=1e-4)


def test_ball_poisson_constant():
    assert ball_poisson_eval(boundary_preset("const:3"), np.array([0.2, 0.1, 0.0]), 1.0) == pytest.approx(3.0, abs=1e-8)


@given(st.floats(0.01, 0.99), st.integers(2, 4))
def test_harnack_factors_bracket_one(q, n):
    lo, hi = harnack_factors(1.0, q, n)
    assert 0 < lo <= 1 <= hi


@pytest.mark.parametrize("seed", range(5))
def test_harnack_contains_positive_harmonic(seed):
    rng = np.random.default_rng(seed)
    f = Radial3D(-1.0, 0.0, (0.0, 0.0, 2.5))
    x = rng.uniform(-0.5, 0.5, 3) * 0.8
    d = float(np.linalg.norm(x))
    lo, hi = harnack_bounds(float(f.value(np.zeros((1, 3)))[0]), 1.0, d, 3)
    assert lo <= f.value(x[None])[0] <= hi


@pytest.mark.parametrize("seed", range(5))
def test_random_family_classical_estimates(seed):
    f = random_harmonic_polynomial(np.random.default_rng(seed), 5)
    inner = build_grid(Disc(1.0), "volume", 16)
    outer = build_grid(Disc(1.0), "surface", 256)
    assert max_principle_check(f, inner, outer).holds
    cc = cacciopolli_check(f, 1.0)
    assert cc.lhs <= cc.rhs * (1 + 1e-9)
    assert abs(bochner_residual(f, np.array([0.2, -0.1]))) < 1e-4


def test_stability_bounded_by_boundary_gap():
    g1 = boundary_preset("cos1")
    g2 = lambda t: np.cos(t) + 0.1 * np.sin(3 * t)
    res = stability_check(g1, g2)
    assert res.max_solution_gap <= res.max_boundary_gap + 1e-9
