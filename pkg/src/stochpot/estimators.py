"""Estimator-style wrappers around the samplers and solvers.

They follow the scikit-learn conventions: hyperparameters in ``__init__``,
learned state with a trailing underscore, ``fit`` returning ``self``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .geometry import Ball, Disc
from .grf import CovKernel, Exponential, FieldSampler, GaussianCorr, kc_admissible
from .exceptions import InadmissibleKernel, InvalidArgument
from .harmonic import (BoundaryData, ball_poisson_eval, boundary_preset, default_sphere_grid,
                       disc_fourier_eval, disc_fourier_solve, disc_poisson_eval)
from .wos import WalkConfig, wos_laplace


def _kernel(kind, alpha, xi, metric) -> CovKernel:
    if isinstance(kind, CovKernel):
        return kind
    if kind == "gaussian":
        return GaussianCorr(alpha, xi, metric)
    if kind == "exponential":
        return Exponential(alpha, xi, metric)
    raise InvalidArgument(f"unknown kernel {kind!r}")


def _boundary(g) -> BoundaryData:
    if isinstance(g, BoundaryData):
        return g
    if isinstance(g, str):
        return boundary_preset(g)
    if callable(g):
        return BoundaryData(angle_func=g)
    raise InvalidArgument("g must be a preset name, BoundaryData or callable")


class GaussianFieldSampler(BaseEstimator):
    """Exact Gaussian field sampler on the points passed to ``fit``.

    Parameters
    ----------
    kernel : {"gaussian", "exponential"} or CovKernel
    alpha, xi : float
        Variance and correlation length of the named kernels.
    metric : {"euclidean", "angular"}
    lam : float
        Amplitude multiplying every draw.
    seed : int

    Attributes
    ----------
    kernel_ : CovKernel
    points_ : ndarray, shape (m, d)
    covariance_ : ndarray, shape (m, m)
    jitter_ : float
        Diagonal jitter used by the factorization.
    """

    def __init__(self, kernel="gaussian", alpha: float = 1.0, xi: float = 1.0,
                 metric: str = "euclidean", lam: float = 1.0, seed: int = 0):
        self.kernel = kernel
        self.alpha = alpha
        self.xi = xi
        self.metric = metric
        self.lam = lam
        self.seed = seed

    def fit(self, X, y=None):
        X = check_array(X)
        k = _kernel(self.kernel, self.alpha, self.xi, self.metric)
        adm = kc_admissible(k)
        if not adm:
            raise InadmissibleKernel(adm.reason)
        self.kernel_ = k
        self.points_ = X
        self._sampler = FieldSampler(k, X)
        self.jitter_ = self._sampler.jitter
        self.covariance_ = k.matrix(X, X)
        return self

    def sample(self, n_samples: int = 1, start: int = 0) -> np.ndarray:
        """Draws ``start .. start + n_samples - 1`` of the seeded stream, shape (n, m)."""
        check_is_fitted(self, "points_")
        return self.lam * self._sampler.draw(self.seed, start, start + n_samples)

    def linear_functional(self, A, n_samples: int, workers: int | None = None) -> np.ndarray:
        """Per-draw values of ``lam * F @ A``."""
        check_is_fitted(self, "points_")
        return self.lam * self._sampler.linear_stats(self.seed, n_samples, A, workers)


class DiscDirichletSolver(BaseEstimator):
    """Harmonic extension of boundary data into the disc ``|x| < R``.

    Parameters
    ----------
    g : str, BoundaryData or callable of the angle
        Ignored when ``fit`` receives samples ``(angles, values)``.
    R : float
    method : {"poisson", "fourier"}
    n_modes : int
        Fourier modes kept by the ``"fourier"`` method.
    n_quad : int
    """

    def __init__(self, g="cos1", R: float = 1.0, method: str = "poisson", n_modes: int = 32,
                 n_quad: int = 512):
        self.g = g
        self.R = R
        self.method = method
        self.n_modes = n_modes
        self.n_quad = n_quad

    def fit(self, X=None, y=None):
        """With ``X`` (angles) and ``y`` (values), boundary data are the
        periodic linear interpolant of the samples; otherwise ``g``."""
        if self.method not in ("poisson", "fourier"):
            raise InvalidArgument("method must be 'poisson' or 'fourier'")
        if X is not None:
            beta = np.asarray(X, dtype=float).ravel()
            vals = np.asarray(y, dtype=float).ravel()
            order = np.argsort(np.mod(beta, 2 * np.pi))
            b, v = np.mod(beta, 2 * np.pi)[order], vals[order]
            self.boundary_ = BoundaryData(
                angle_func=lambda t: np.interp(np.mod(t, 2 * np.pi), b, v, period=2 * np.pi),
                name="samples")
        else:
            self.boundary_ = _boundary(self.g)
        self.domain_ = Disc(self.R)
        if self.method == "fourier":
            self.coeffs_ = disc_fourier_solve(self.boundary_, self.n_modes, self.n_quad)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "boundary_")
        X = check_array(X)
        r = np.hypot(X[:, 0], X[:, 1])
        t = np.arctan2(X[:, 1], X[:, 0])
        if self.method == "fourier":
            return np.asarray(disc_fourier_eval(self.coeffs_, self.R, r, t), dtype=float)
        return np.asarray(disc_poisson_eval(self.boundary_, self.R, r, t, self.n_quad), dtype=float)


class BallDirichletSolver(BaseEstimator):
    """Poisson-formula solution in the 3-ball of radius ``R``.

    ``g`` receives unit vectors when it is a point preset such as ``"zdir"``.
    """

    def __init__(self, g="zdir", R: float = 1.0, resolution: int = 48):
        self.g = g
        self.R = R
        self.resolution = resolution

    def fit(self, X=None, y=None):
        self.boundary_ = _boundary(self.g)
        self.domain_ = Ball(3, self.R)
        self.grid_ = default_sphere_grid(self.R, (0.0, 0.0, 0.0), self.resolution)
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "boundary_")
        X = check_array(X)
        return np.atleast_1d(ball_poisson_eval(self.boundary_, X, self.R, grid=self.grid_))


class WalkOnSpheresSolver(BaseEstimator):
    """Walk-on-spheres estimates of the harmonic extension of ``g``.

    Parameters
    ----------
    domain : {"ball", "disc"} or Ball or Disc
    g : boundary preset, BoundaryData, callable on boundary points, or float
    epsilon : float or None
        Absorption shell; ``None`` means ``1e-3 R``.
    n_walkers, max_steps, seed, workers
        Passed to :class:`WalkConfig`.
    """

    def __init__(self, domain="ball", g="zdir", epsilon: float | None = None,
                 n_walkers: int = 10_000, max_steps: int = 10_000, seed: int = 0,
                 workers: int | None = None):
        self.domain = domain
        self.g = g
        self.epsilon = epsilon
        self.n_walkers = n_walkers
        self.max_steps = max_steps
        self.seed = seed
        self.workers = workers

    def fit(self, X=None, y=None):
        d = self.domain
        self.domain_ = {"ball": Ball(3, 1.0), "disc": Disc(1.0)}[d] if isinstance(d, str) else d
        g = self.g
        self.boundary_ = boundary_preset(g) if isinstance(g, str) else g
        self.config_ = WalkConfig(self.epsilon, self.max_steps, self.n_walkers, self.seed,
                                  self.workers)
        return self

    def predict(self, X, return_std: bool = False):
        """Estimates at each row of ``X``; with ``return_std`` also the
        batch-means standard errors."""
        check_is_fitted(self, "config_")
        X = check_array(X)
        res = [wos_laplace(self.domain_, self.boundary_, x, self.config_) for x in X]
        self.mean_steps_ = np.array([r.mean_steps for r in res])
        est = np.array([r.estimate for r in res])
        if return_std:
            return est, np.array([r.stderr for r in res])
        return est
