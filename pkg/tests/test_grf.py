import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochpot import mc
from stochpot.exceptions import (FactorizationFailure, NonPointwiseKernel, ResourceLimit,
                                 SingularKernel, StochpotError)
from stochpot.geometry import circle_grid, build_grid, Ball
from stochpot.grf import (DerivCovSpec, Exponential, FieldSampler, GaussianCorr, PowerLaw,
                          Separable, WhiteNoise, covariance_matrix, gaussian_derivative_covariance,
                          gaussian_moment, jittered_cholesky, kc_admissible, kernel_eval,
                          paper_moment, sample_field, superpose, predicted_variance)

pos = st.floats(0.1, 5.0)


@pytest.mark.parametrize("kernel, x, y, expected", [
    (Exponential(1.0, 1.0), (0, 0), (0, 0), 1.0),
    (Exponential(2.0, 1.0), (0, 0), (1, 0), 2 * math.exp(-1)),
    (GaussianCorr(1.0, 2.0), (0, 0), (2, 0), math.exp(-1)),
    (PowerLaw(2.0, 1.0), (0, 0, 0), (0, 0, 4), 0.5),
])
def test_kernel_eval_values(kernel, x, y, expected):
    assert kernel_eval(kernel, x, y) == pytest.approx(expected)


def test_kernel_eval_errors():
    with pytest.raises(SingularKernel):
        kernel_eval(PowerLaw(), (0, 0), (0, 0))
    with pytest.raises(NonPointwiseKernel):
        kernel_eval(WhiteNoise(), (0, 0), (1, 0))


@pytest.mark.parametrize("kernel, admissible", [
    (Exponential(), True),
    (GaussianCorr(), True),
    (PowerLaw(), False),
    (WhiteNoise(), False),
    (Separable(), True),
])
def test_kc_admissible_table(kernel, admissible):
    verdict = kc_admissible(kernel)
    assert bool(verdict) is admissible
    if not admissible:
        assert "Kolmogorov continuity condition is not satisfied" in verdict.reason


@given(alpha=pos, xi=pos, d=st.floats(0, 10))
def test_regulated_kernels_bounded_by_alpha(alpha, xi, d):
    for k in (Exponential(alpha, xi), GaussianCorr(alpha, xi)):
        v = kernel_eval(k, (0.0, 0.0), (d, 0.0))
        assert 0 <= v <= alpha * (1 + 1e-12)


@given(st.integers(2, 12), st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_covariance_matrix_psd(m, seed):
    pts = np.random.default_rng(seed).uniform(-1, 1, (m, 3))
    C = covariance_matrix(GaussianCorr(1.0, 0.7), pts)
    assert np.allclose(C, C.T)
    assert np.linalg.eigvalsh(C).min() > -1e-10
    L, jitter = jittered_cholesky(C)
    assert np.allclose(L @ L.T, C + jitter * np.eye(m), atol=1e-8)


def test_jittered_cholesky_rejects_indefinite():
    with pytest.raises(FactorizationFailure):
        jittered_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_sampler_size_cap():
    pts = np.zeros((50, 2)) + np.arange(50)[:, None]
    with pytest.raises(ResourceLimit):
        FieldSampler(Exponential(), pts, max_points=10)


@pytest.mark.parametrize("kernel", [PowerLaw(), WhiteNoise()])
def test_sampler_refuses_inadmissible(kernel):
    with pytest.raises(StochpotError):
        sample_field(kernel, circle_grid(1.0, 16), 0)


def test_sample_field_reproducible_and_scalable():
    grid = circle_grid(1.0, 32)
    k = Exponential(1.0, 0.5, "angular")
    a, b = sample_field(k, grid, 7), sample_field(k, grid, 7)
    assert a.to_csv() == b.to_csv()
    assert not np.array_equal(a.values, sample_field(k, grid, 8).values)
    assert np.array_equal(a.scaled(3.0).values, 3.0 * a.values)


def test_sampler_statistics():
    pts = np.array([[0.0, 0.0], [0.5, 0.0]])
    s = FieldSampler(Exponential(2.0, 0.5), pts)
    F = s.draw(3, 0, 100_000)
    # variance 2 and correlation exp(-1)
    var, se = mc.batch_means(F[:, 0] ** 2)
    assert abs(var - 2.0) < 3 * se
    cov, se = mc.batch_means(F[:, 0] * F[:, 1])
    assert abs(cov - 2 * math.exp(-1)) < 3 * se
    mean, se = mc.batch_means(F[:, 1])
    assert abs(mean) < 3 * se


def test_linear_stats_match_draws():
    pts = build_grid(Ball(3, 1.0), "volume", 8).points
    s = FieldSampler(GaussianCorr(1.0, 0.5), pts)
    A = np.random.default_rng(0).normal(size=(len(pts), 2))
    lin = s.linear_stats(11, 2500, A)
    assert np.allclose(lin, s.draw(11, 0, 2500) @ A)


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_linear_stats_independent_of_workers(workers):
    pts = circle_grid(1.0, 20).points
    s = FieldSampler(Exponential(1.0, 0.5, "angular"), pts)
    A = np.ones((20, 1)) / 20
    ref = s.linear_stats(5, 3000, A, workers=1)
    assert np.array_equal(s.linear_stats(5, 3000, A, workers=workers), ref)


@pytest.mark.parametrize("Q, paper, gauss", [
    (0, 1.0, 1.0), (1, 0.0, 0.0), (2, 4.0, 4.0), (3, 0.0, 0.0), (4, 16.0, 48.0), (6, 64.0, 960.0),
])
def test_moment_conventions(Q, paper, gauss):
    assert paper_moment(4.0, Q) == pytest.approx(paper)
    assert gaussian_moment(4.0, Q) == pytest.approx(gauss)


def test_superpose_variance():
    grid = circle_grid(1.0, 8)
    k = Exponential(1.0, 0.5, "angular")
    fields = [sample_field(k, grid, s) for s in range(2)]
    out = superpose(fields, [2.0, -1.0])
    assert np.allclose(out.values, 2 * fields[0].values - fields[1].values)
    assert predicted_variance([2.0, -1.0], [1.0, 1.0]) == pytest.approx(5.0)


@pytest.mark.parametrize("a, b", [(0, 0), (0, 1), (2, 2), (1, 2)])
def test_gaussian_derivative_covariance_matches_fd(a, b):
    k = GaussianCorr(1.3, 0.8)
    x, y = np.array([0.1, 0.2, -0.3]), np.array([0.4, -0.1, 0.2])
    h = 1e-4
    ea, eb = np.eye(3)[a] * h, np.eye(3)[b] * h
    fd = (kernel_eval(k, x + ea, y + eb) - kernel_eval(k, x + ea, y - eb)
          - kernel_eval(k, x - ea, y + eb) + kernel_eval(k, x - ea, y - eb)) / (4 * h * h)
    value = gaussian_derivative_covariance(k, x, y, np.eye(3, dtype=int)[a], np.eye(3, dtype=int)[b])
    assert value == pytest.approx(fd, rel=1e-5)


def test_separable_identity_at_coincidence():
    k = Separable(lam=2.0)
    x = np.array([[0.3, 0.4, 0.5]])
    assert k.matrix(x, x)[0, 0] == pytest.approx(2.0)
    assert DerivCovSpec("spherical", "id", "id").left == "id"
