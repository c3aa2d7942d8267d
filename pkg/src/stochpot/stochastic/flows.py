"""Potential flows ``u = grad psi`` perturbed by ``lam grad F``."""

from __future__ import annotations

import numpy as np

from ..exceptions import InvalidArgument
from ..geometry import Ball, build_grid, from_cylindrical
from ..grf import (CovKernel, DerivCovSpec, FieldSampler, NoiseConstants, Separable,
                   SeparableFactor, gaussian_derivative_covariance,
                   separable_derivative_covariance)
from ..harmonic import HarmonicFn
from .calculus import _require_differentiable, _step, gradient_stencil
from .report import Report, exact_row, info_row, mc_row, note_row

FAR_SEPARATION = 10.0  # in correlation lengths


def _unit(n, i):
    e = np.zeros(n, dtype=int)
    e[i] = 1
    return e


def turbulent_flow_stats(flow: HarmonicFn, kernel: CovKernel, points=None, lam: float = 1.0,
                         n_samples: int = 100_000, seed: int = 0, h: float | None = None,
                         kelvin_domain=None, rho: float = 1.0, kelvin_samples: int = 10_000,
                         workers: int | None = None) -> Report:
    """Velocity moments of ``u_bar = grad psi + lam grad F``.

    Velocities of sampled fields are central differences of scalar samples.
    The oracle covariances come from the analytic derivative covariance of
    the kernel; ``beta`` is the total gradient variance.  Rows cover the
    volatility and component covariances at each point, the covariance
    between the first two points, decorrelation at ten correlation lengths,
    ``E[Lap psi_bar] = 0`` and the Kelvin energy shift.
    """
    _require_differentiable(kernel)
    n = 3
    k = NoiseConstants.from_kernel(kernel, n, lam)
    beta = k.require("beta")
    xi = float(getattr(kernel, "xi", 1.0))
    X = np.array([[2.0, 0.3, 0.5], [0.4, 2.5, -0.4]]) if points is None \
        else np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[1] != n:
        raise InvalidArgument("turbulence statistics are three-dimensional")
    d = np.ones(n) / np.sqrt(n)
    far = X[0] + FAR_SEPARATION * xi * d
    allX = np.vstack([X, far])
    m = len(allX)
    h = _step(kernel, h)
    spts, D = gradient_stencil(allX, h)
    pts = np.vstack([spts, allX])   # centres last, for the Laplacian
    A = np.zeros((len(pts), m * n + m))
    A[:len(spts), :m * n] = D.reshape(m * n, -1).T
    for p in range(m):
        A[2 * p * n:2 * (p + 1) * n, m * n + p] = 1 / h**2
        A[len(spts) + p, m * n + p] = -2 * n / h**2
    N = FieldSampler(kernel, pts).linear_stats(seed, n_samples, A, workers)
    u = flow.grad(allX)
    U = u[:, None, :] + lam * N[:, :m * n].reshape(n_samples, m, n).transpose(1, 0, 2)
    lap = flow.laplacian(allX)[:, None] + lam * N[:, m * n:].T

    def cov(x, y, i, j):
        return gaussian_derivative_covariance(kernel, x, y, _unit(n, i), _unit(n, j))

    rep = Report("turbulence", params=dict(lam=lam, beta=beta, kernel=kernel.describe(),
                                           n_samples=n_samples, seed=seed, h=h))
    for p in range(len(X)):
        up = u[p]
        vol = float(up @ up)
        rep.add(mc_row(f"volatility |u_bar|^2 at point {p}", np.sum(U[p] ** 2, axis=1),
                       vol + lam**2 * beta, detail="oracle |u|^2 + lam^2 beta"),
                note_row(f"volatility at point {p}, published |u|^2 + n lam", vol + n * lam,
                         vol + lam**2 * beta))
        for i in range(n):
            for j in range(i, n):
                rep.add(mc_row(f"E[u_{i} u_{j}] at point {p}", U[p][:, i] * U[p][:, j],
                               up[i] * up[j] + lam**2 * cov(X[p], X[p], i, j)))
        rep.add(mc_row(f"E[Lap psi_bar] at point {p}", lap[p], 0.0, paper=0.0))
    if len(X) > 1:
        for i in range(n):
            rep.add(mc_row(f"E[u_{i}(x0) u_{i}(x1)]", U[0][:, i] * U[1][:, i],
                           u[0, i] * u[1, i] + lam**2 * cov(X[0], X[1], i, i)))
    for i in range(n):
        rep.add(mc_row(f"decorrelated E[u_{i}(x0) u_{i}(far)]", U[0][:, i] * U[-1][:, i],
                       u[0, i] * u[-1, i] + lam**2 * cov(X[0], far, i, i),
                       paper=u[0, i] * u[-1, i],
                       detail=f"separation {FAR_SEPARATION:g} correlation lengths"))
    if kelvin_domain is not False:
        rep.extend(kelvin_energy(flow, kernel, lam, kelvin_domain, rho, kelvin_samples, seed,
                                 h, beta, workers))
    return rep


def kelvin_energy(flow: HarmonicFn, kernel: CovKernel, lam: float, domain=None, rho: float = 1.0,
                  n_samples: int = 10_000, seed: int = 0, h: float | None = None,
                  beta: float | None = None, workers: int | None = None) -> list:
    """Rows for ``E[(rho/2) int |u_bar|^2] = (rho/2)(int |u|^2 + lam^2 beta |D|)``."""
    domain = domain or Ball(3, 0.5, (2.0, 0.0, 0.0))
    beta = NoiseConstants.from_kernel(kernel, 3, lam).require("beta") if beta is None else beta
    grid = build_grid(domain, "volume", 8, "midpoint")
    Xg, w = grid.points, grid.weights
    h = _step(kernel, h)
    pts, D = gradient_stencil(Xg, h)
    u = flow.grad(Xg)
    E0 = 0.5 * rho * float(np.sum(w * np.sum(u * u, axis=1)))
    Dm = (D * np.sqrt(w)[:, None, None]).reshape(-1, D.shape[2])
    M = 0.5 * rho * lam**2 * (Dm.T @ Dm)
    b = rho * lam * np.einsum("p,pi,pik->k", w, u, D)
    E = FieldSampler(kernel, pts).quadratic_stats(seed, n_samples, M, b, E0, workers)
    vol = domain.volume()
    oracle = E0 + 0.5 * rho * lam**2 * beta * vol
    return [info_row("Kelvin energy of mean flow", E0),
            mc_row("expected Kelvin energy", E, oracle,
                   detail="oracle (rho/2)(int |u|^2 + lam^2 beta |D|)"),
            note_row("Kelvin energy, published (rho/2) int |u|^2 + (lam rho/2) |D|",
                     E0 + 0.5 * lam * rho * vol, oracle)]


def _cyl(r, phi, z):
    return from_cylindrical(np.array([[r, phi, z]]))[0]


def cylinder_boundary_stats(kernel: Separable | None = None, R: float = 1.0,
                            pairs=((0.3, 0.5, 0.3, 0.8), (0.3, 0.5, 0.7, 0.6)), n_samples: int = 100_000,
                            seed: int = 0, h: float | None = None,
                            workers: int | None = None) -> Report:
    """Frame-derivative covariances of a separable field on ``r = R``.

    ``pairs`` lists ``(phi, z, phi', z')``.  Monte Carlo uses central
    differences of scalar samples in ``r`` and ``z``; the oracle is the
    analytic separable derivative covariance.  With the same azimuth the
    ``z z'`` entry reduces to ``-Z''(z - z')`` because ``K(R, R) = 1``.
    """
    kernel = kernel or Separable("cylindrical", (SeparableFactor("gaussian", 1.0),
                                                 SeparableFactor("gaussian", 1.0),
                                                 SeparableFactor("gaussian", 0.5)))
    if kernel.frame != "cylindrical":
        raise InvalidArgument("cylinder statistics need a cylindrical separable kernel")
    _require_differentiable(kernel)
    h = 0.01 * min(f.scale for f in kernel.factors if f.kind != "constant") if h is None else h
    rep = Report("turbulence-cylinder", params=dict(kernel=kernel.describe(), R=R,
                                                    n_samples=n_samples, seed=seed, h=h))
    for q, (phi, z, phi2, z2) in enumerate(pairs):
        pts = np.array([_cyl(R, phi, z + h), _cyl(R, phi, z - h), _cyl(R + h, phi, z),
                        _cyl(R - h, phi, z), _cyl(R, phi2, z2 + h), _cyl(R, phi2, z2 - h),
                        _cyl(R + h, phi2, z2), _cyl(R - h, phi2, z2)])
        A = np.zeros((8, 4))
        for c in range(4):
            A[2 * c, c], A[2 * c + 1, c] = 0.5 / h, -0.5 / h
        N = FieldSampler(kernel, pts).linear_stats(seed + q, n_samples, A, workers)
        dz, dr, dz2, dr2 = N.T
        x, y = (R, phi, z), (R, phi2, z2)

        def oracle(left, right):
            return separable_derivative_covariance(kernel, DerivCovSpec("cylindrical", left, right),
                                                   x, y, coords="chart")

        zz = oracle("z", "z")
        rep.add(mc_row(f"pair {q}: Cov(d_z F, d_z' F)", dz * dz2, zz),
                mc_row(f"pair {q}: Cov(d_r F, d_r' F)", dr * dr2, oracle("r", "r")),
                mc_row(f"pair {q}: Cov(d_r F, d_z' F)", dr * dz2, oracle("r", "z")))
        if phi == phi2:
            Z = kernel.factors[2]
            reduced = -kernel.lam * float(Z.d2(z - z2))
            rep.add(exact_row(f"pair {q}: boundary reduction -Z''(z - z')", zz, reduced,
                              rtol=1e-12, atol=1e-15, paper=reduced))
    return rep
