"""Riesz and Newtonian potentials of randomly perturbed densities.

The perturbed density is ``g + lam F``.  At a point outside the support the
noise part of the potential is a linear functional of ``F``, sampled on a
Gauss volume grid; the oracle variance is the same double integral on a finer
grid.
"""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import InvalidArgument, OutOfDomain
from ..geometry import Ball, _Round, Shell, build_grid
from ..grf import CovKernel, FieldSampler, GaussianCorr, gaussian_moment, paper_moment
from ..harmonic import fd_laplacian
from ..potentials import (RieszSpec, ball_newton_closed, ball_newton_gradient_closed,
                          riesz_potential)
from .moments import binomial_moment
from .report import Report, exact_row, info_row, mc_row, note_row, ratio_row


def _noise_grid(domain, resolution: int):
    rule = "gauss" if isinstance(domain, (_Round, Shell)) else "midpoint"
    return build_grid(domain, "volume", resolution, rule)


def _exterior(spec: RieszSpec, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if np.any(spec.domain.signed_distance(X) <= 0):
        raise OutOfDomain("noise statistics of the potential need points outside the support")
    return X


def _weights(grid, X, exponent):
    r = np.linalg.norm(X[:, None, :] - grid.points[None, :, :], axis=2)
    return (grid.weights / r**exponent).T          # (nodes, points)


def gaussian_sum_moment(base: float, var: float, P: int) -> float:
    """``E[(base + N)^P]`` for ``N ~ N(0, var)``."""
    return float(sum(math.comb(P, Q) * base ** (P - Q) * gaussian_moment(var, Q)
                     for Q in range(P + 1)))


def _paper_sum_moment(base: float, var: float, P: int) -> float:
    return float(sum(math.comb(P, Q) * base ** (P - Q) * paper_moment(var, Q)
                     for Q in range(P + 1)))


def riesz_noise_samples(spec: RieszSpec, lam: float, kernel: CovKernel, X, n_samples: int,
                        seed: int = 0, noise_resolution: int = 8, oracle_resolution: int = 12,
                        workers: int | None = None):
    """Samples of the perturbed potential at exterior points.

    Returns
    -------
    samples : ndarray, shape (n_samples, k)
    base : ndarray, shape (k,)
        Deterministic potential on the noise grid.
    cov : ndarray, shape (k, k)
        Oracle noise covariance ``lam^2 gamma^2 W' K W`` on the finer grid.
    """
    X = _exterior(spec, X)
    grid = _noise_grid(spec.domain, noise_resolution)
    W = _weights(grid, X, spec.exponent)
    base = spec.gamma * (spec.density(grid.points) @ W)
    N = FieldSampler(kernel, grid).linear_stats(seed, n_samples, W, workers)
    fine = _noise_grid(spec.domain, oracle_resolution)
    Wf = _weights(fine, X, spec.exponent)
    cov = (lam * spec.gamma) ** 2 * (Wf.T @ kernel.matrix(fine.points, fine.points) @ Wf)
    return base + lam * spec.gamma * N, base, cov


def stochastic_riesz_moments(spec: RieszSpec, lam: float, kernel: CovKernel, x, P: int = 2,
                             n_samples: int = 100_000, seed: int = 0, x2=None,
                             noise_resolution: int = 8, oracle_resolution: int = 12,
                             workers: int | None = None, name: str = "riesz-moments") -> Report:
    """Mean, P-th moment, fourth moment and two-point covariance of the
    perturbed Riesz potential at exterior points."""
    x = np.asarray(x, dtype=float)
    if x2 is None:
        x2 = 1.5 * x
    X = np.vstack([x, np.asarray(x2, dtype=float)])
    S, base, cov = riesz_noise_samples(spec, lam, kernel, X, n_samples, seed, noise_resolution,
                                       oracle_resolution, workers)
    det = np.atleast_1d(riesz_potential(spec, X))
    var = float(cov[0, 0])
    alpha = kernel.variance
    grid = _noise_grid(spec.domain, oracle_resolution)
    mass = spec.gamma * float(_weights(grid, X[:1], spec.exponent).sum())
    full = float(sum(math.comb(P, Q) * abs(det[0]) ** (P - Q) * lam**Q * paper_moment(alpha, Q)
                     * mass**Q for Q in range(P + 1)))
    rep = Report(name, params=dict(n=spec.n, a=spec.a, gamma=spec.gamma, lam=lam,
                                   kernel=kernel.describe(), x=x.tolist(), n_samples=n_samples,
                                   seed=seed))
    rep.add(
        exact_row("deterministic potential, noise grid vs quadrature", float(base[0]),
                  float(det[0]), rtol=1e-3),
        mc_row("mean of perturbed potential", S[:, 0], float(det[0]), paper=float(det[0]),
               rtol=1e-3),
        mc_row(f"moment P={P}", S[:, 0] ** P, gaussian_sum_moment(float(det[0]), var, P),
               order=P, rtol=1e-3,
               paper=_paper_sum_moment(float(det[0]), var, P)),
        mc_row("moment P=4", S[:, 0] ** 4, gaussian_sum_moment(float(det[0]), var, 4), order=4,
               rtol=1e-3, paper=_paper_sum_moment(float(det[0]), var, 4),
               detail="paper column uses the even-moment rule"),
        mc_row("third central moment", (S[:, 0] - base[0]) ** 3, 0.0, order=3),
        mc_row("two-point covariance", (S[:, 0] - base[0]) * (S[:, 1] - base[1]),
               float(cov[0, 1]), detail=f"second point {np.asarray(x2).tolist()}"),
        note_row(f"moment P={P}, fully correlated form", full,
                 gaussian_sum_moment(float(det[0]), var, P),
                 detail="treats the noise as one variable scaled by the kernel mass"),
        info_row("noise variance (double quadrature)", var),
    )
    rep.samples, rep.noise_cov = S, cov
    return rep


def noisy_density_newton(R: float = 1.0, rho: float = 1.0, C: float = 1.0, lam: float = 1.0,
                         kernel: CovKernel | None = None, x=(0.0, 0.0, 2.0), P: int = 2,
                         n_samples: int = 100_000, seed: int = 0, x_far=None,
                         workers: int | None = None) -> Report:
    """Newtonian potential ``(C/4pi) int rho_bar / |x - y|`` of a noisy ball.

    Rows: mean against the static closed form, the P-th moment, the moment
    ratio between ``x`` and ``x_far = 2x`` with a delta-method standard
    error, and the published ``R^3/|x|^3`` decay claim.
    """
    kernel = kernel or GaussianCorr(1.0, 0.5)
    x = np.asarray(x, dtype=float)
    a = float(np.linalg.norm(x))
    if a <= R:
        raise OutOfDomain("exterior statements need |x| > R")
    x_far = 2 * x if x_far is None else np.asarray(x_far, dtype=float)
    a_far = float(np.linalg.norm(x_far))
    spec = RieszSpec(3, 2.0, rho, Ball(3, R), 12, C / (4 * math.pi), "gauss")
    rep = stochastic_riesz_moments(spec, lam, kernel, x, P, n_samples, seed, x_far,
                                   workers=workers, name="newton-density")
    static = ball_newton_closed(R, a, C, rho)
    static_far = ball_newton_closed(R, a_far, C, rho)
    S, cov = rep.samples, rep.noise_cov
    mP = gaussian_sum_moment(static, float(cov[0, 0]), P)
    mP_far = gaussian_sum_moment(static_far, float(cov[1, 1]), P)
    rep.add(
        mc_row("mean potential vs static closed form", S[:, 0], static, paper=static, rtol=1e-6),
        ratio_row(f"moment ratio P={P} between |x|={a:g} and |x|={a_far:g}", S[:, 0] ** P,
                  S[:, 1] ** P, mP / mP_far, paper=(a_far / a) ** 3,
                  detail="paper column: R^3/|x|^3 decay"),
        note_row("moment decay ratio, published R^3/|x|^3", (a_far / a) ** 3, mP / mP_far),
    )
    return rep


def _force_weights(grid, X):
    d = X[:, None, :] - grid.points[None, :, :]
    r = np.linalg.norm(d, axis=2)
    return d * (grid.weights / r**3)[:, :, None]    # (points, nodes, 3)


def force_moments(m: float = 1.0, m2: float = 1.0, C: float = 1.0, rho: float = 1.0,
                  R: float = 1.0, lam: float = 1.0, kernel: CovKernel | None = None,
                  x=(0.0, 0.0, 2.0), x2=(0.0, 0.0, 3.0), n_samples: int = 100_000,
                  seed: int = 0, noise_resolution: int = 8, oracle_resolution: int = 12,
                  workers: int | None = None) -> Report:
    """Force ``-m grad psi_bar`` on point masses outside a noisy ball.

    The noise part is ``m lam (C/4pi) int F(y) (x - y) / |x - y|^3 dy``.
    """
    kernel = kernel or GaussianCorr(1.0, 0.5)
    X = np.vstack([np.asarray(x, dtype=float), np.asarray(x2, dtype=float)])
    if np.any(np.linalg.norm(X, axis=1) <= R):
        raise OutOfDomain("forces are evaluated outside the ball")
    g = C / (4 * math.pi)
    masses = np.array([m, m2])
    static = np.array([-mm * g * rho * ball_newton_gradient_closed(R, p) for mm, p in zip(masses, X)])
    grid = _noise_grid(Ball(3, R), noise_resolution)
    W = _force_weights(grid, X)[:, :, 2].T * (masses * g)     # z components
    N = FieldSampler(kernel, grid).linear_stats(seed, n_samples, W, workers)
    Fz = static[:, 2] + lam * N
    fine = _noise_grid(Ball(3, R), oracle_resolution)
    Wf = _force_weights(fine, X)[:, :, 2].T * (masses * g)
    cov = lam**2 * (Wf.T @ kernel.matrix(fine.points, fine.points) @ Wf)
    mag = float(np.linalg.norm(static[0]))
    alpha = kernel.variance
    Wp = _force_weights(fine, X[:1])[0]
    r3 = np.linalg.norm(X[0] - fine.points, axis=1) ** 3
    paper_vol = m * m2 * (g * rho) ** 2 * float(np.sum(np.abs(Wp[:, 2]))) \
        + m * m2 * (g * rho) ** 2 * float(np.sum(alpha * fine.weights / r3)) ** 2
    rep = Report("newton-force", params=dict(m=m, m2=m2, C=C, rho=rho, R=R, lam=lam,
                                             kernel=kernel.describe(), n_samples=n_samples))
    rep.add(
        exact_row("static force magnitude", mag, m * g * rho * (4 * math.pi / 3) * R**3
                  / float(np.linalg.norm(X[0])) ** 2, rtol=1e-12),
        note_row("static force magnitude, published pi/3", math.pi / 3, mag,
                 detail="pi/3 is the gradient of the unnormalized ball integral"),
        mc_row("mean force z at x", Fz[:, 0], float(static[0, 2]), paper=float(static[0, 2]),
               rtol=1e-9),
        mc_row("force volatility z at x", Fz[:, 0] ** 2, float(static[0, 2]) ** 2 + cov[0, 0],
               order=2),
        mc_row("force covariance z at x and x2", Fz[:, 0] * Fz[:, 1],
               float(static[0, 2] * static[1, 2]) + cov[0, 1]),
        note_row("force volatility, published form", paper_vol,
                 float(static[0, 2]) ** 2 + cov[0, 0]),
    )
    return rep


def laplacian_moments(C: float = 1.0, rho: float = 1.0, R: float = 1.0, lam: float = 1.0,
                      kernel: CovKernel | None = None, x=(0.0, 0.0, 0.3), P: int = 2,
                      n_samples: int = 100_000, seed: int = 0, fd_resolution: int = 24,
                      fd_step: float = 0.05, workers: int | None = None) -> Report:
    """Moments of ``Lap psi_bar = -C rho_bar(x)`` inside a noisy ball.

    The deterministic identity is checked by finite differences of the
    quadrature potential; moments use pointwise density samples.
    """
    kernel = kernel or GaussianCorr(1.0, 0.5)
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) >= R:
        raise OutOfDomain("the Laplacian identity holds inside the ball")
    spec = RieszSpec(3, 2.0, rho, Ball(3, R), fd_resolution, C / (4 * math.pi))
    lap = float(fd_laplacian(lambda Y: np.atleast_1d(riesz_potential(spec, Y)), x[None, :],
                             fd_step)[0])
    alpha = kernel.variance
    F = FieldSampler(kernel, x[None, :]).linear_stats(seed, n_samples, np.ones((1, 1)),
                                                      workers)[:, 0]
    L = -C * (rho + lam * F)
    paper = sum(math.comb(P, Q) * abs(C * rho) ** (P - Q) * abs(lam * C / (4 * math.pi))
                * paper_moment(alpha, Q) for Q in range(P + 1))
    rep = Report("newton-laplacian", params=dict(C=C, rho=rho, R=R, lam=lam, P=P,
                                                 kernel=kernel.describe()))
    rep.add(
        exact_row("FD Laplacian of quadrature potential = -C rho", lap, -C * rho, rtol=2e-2),
        mc_row("E[Lap psi_bar]", L, -C * rho, paper=0.0, rtol=1e-12),
        mc_row(f"E[(-Lap psi_bar)^{P}]", (-L) ** P, binomial_moment(C * rho, C * lam, alpha, P),
               order=P, paper=paper),
        note_row("E[Lap psi_bar], published zero", 0.0, -C * rho),
    )
    return rep
