import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from stochpot.estimators import (BallDirichletSolver, DiscDirichletSolver, GaussianFieldSampler,
                                 WalkOnSpheresSolver)
from stochpot.exceptions import StochpotError

POINTS = np.array([[0.0, 0.0], [0.3, 0.0], [0.0, 0.8]])


@pytest.mark.parametrize("est", [GaussianFieldSampler(xi=0.4), DiscDirichletSolver(method="fourier"),
                                 BallDirichletSolver(), WalkOnSpheresSolver(n_walkers=500)])
def test_params_round_trip_through_clone(est):
    assert clone(est).get_params() == est.get_params()


@pytest.mark.parametrize("est, X", [(GaussianFieldSampler(), None), (DiscDirichletSolver(), POINTS)])
def test_unfitted_raises(est, X):
    with pytest.raises(NotFittedError):
        est.sample(2) if X is None else est.predict(X)


def test_field_sampler_shapes_and_determinism():
    s = GaussianFieldSampler(kernel="exponential", xi=0.5, seed=3).fit(POINTS)
    a = s.sample(5)
    assert a.shape == (5, 3)
    assert np.array_equal(a, s.sample(5))
    assert np.array_equal(s.sample(2, start=3), a[3:5])
    assert np.allclose(np.diag(s.covariance_), 1.0)


def test_field_sampler_lambda_scaling():
    a = GaussianFieldSampler(seed=1).fit(POINTS).sample(4)
    b = GaussianFieldSampler(seed=1, lam=0.5).fit(POINTS).sample(4)
    assert np.array_equal(b, 0.5 * a)


def test_field_sampler_rejects_white_noise():
    from stochpot.grf import WhiteNoise
    with pytest.raises(StochpotError):
        GaussianFieldSampler(kernel=WhiteNoise()).fit(POINTS)


@pytest.mark.parametrize("method", ["poisson", "fourier"])
def test_disc_solver_presets(method):
    X = np.array([[0.5, 0.0], [0.0, 0.5], [0.3, 0.4]])
    pred = DiscDirichletSolver("cos2", method=method).fit().predict(X)
    assert np.allclose(pred, X[:, 0] ** 2 - X[:, 1] ** 2, atol=1e-8)


def test_disc_solver_from_boundary_samples():
    beta = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    est = DiscDirichletSolver(method="fourier").fit(beta, np.sin(beta))
    assert est.predict([[0.0, 0.5]])[0] == pytest.approx(0.5, abs=1e-4)


def test_ball_solver():
    pred = BallDirichletSolver("zdir").fit().predict([[0.0, 0.0, 0.5], [0.1, 0.2, -0.3]])
    assert np.allclose(pred, [0.5, -0.3], atol=1e-4)


def test_wos_solver_with_std():
    est = WalkOnSpheresSolver("disc", "cos1", n_walkers=4000, seed=2).fit()
    mean, std = est.predict([[0.5, 0.0]], return_std=True)
    assert abs(mean[0] - 0.5) < 3 * std[0]
    assert est.mean_steps_.shape == (1,)
