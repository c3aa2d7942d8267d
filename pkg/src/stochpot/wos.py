"""Walk-on-spheres solver for Dirichlet problems on balls and discs.

Each walker jumps to a uniform point on the largest sphere around its position
that fits in the domain.  It stops once it is within ``epsilon_shell`` of the
boundary and scores ``g`` at the radial projection.  Source terms follow the
convention ``Lap psi = f``; every sphere of radius ``r`` centred at ``x_k``
contributes ``-f(x_k) r**2 / (2 n)`` (the mean exit time weight).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import InvalidArgument, OutOfDomain, UnsupportedGeometry
from .geometry import _Round
from .harmonic import BoundaryData
from .mc import batch_means, ordered_map, sample_rng

BLOCK = 64
NONCONVERGENCE_FRACTION = 0.01


class NonConvergenceWarning(RuntimeWarning):
    """More than 1% of walkers hit the step cap."""


@dataclass(frozen=True)
class WalkConfig:
    """Walker settings.

    ``epsilon_shell=None`` means ``1e-3 * R`` of the domain.
    """

    epsilon_shell: float | None = None
    max_steps: int = 10_000
    n_walkers: int = 10_000
    seed: int = 0
    workers: int | None = None
    chunk: int = 1000

    def __post_init__(self):
        if self.epsilon_shell is not None and self.epsilon_shell <= 0:
            raise InvalidArgument("epsilon_shell must be positive")
        if self.n_walkers < 100:
            raise InvalidArgument("n_walkers must be at least 100")
        if self.max_steps < 1:
            raise InvalidArgument("max_steps must be positive")

    def eps(self, domain) -> float:
        return self.epsilon_shell if self.epsilon_shell is not None else 1e-3 * domain.R


@dataclass
class WalkResult:
    estimate: float
    stderr: float
    mean_steps: float
    n_walkers: int
    steps: np.ndarray = field(repr=False)
    exit_points: np.ndarray = field(repr=False)
    scores: np.ndarray = field(repr=False)
    capped_fraction: float = 0.0
    warning: str | None = None

    def row(self, x) -> dict:
        return {"x": ";".join(repr(float(v)) for v in np.atleast_1d(x)),
                "estimate": self.estimate, "stderr": self.stderr,
                "n_walkers": self.n_walkers, "mean_steps": self.mean_steps}


def _check(domain, x, eps):
    if not isinstance(domain, _Round):
        raise UnsupportedGeometry("walk-on-spheres supports balls and discs")
    x = np.asarray(x, dtype=float)
    if x.shape != (domain.dim,):
        raise InvalidArgument(f"start point must have {domain.dim} coordinates")
    if domain.distance_to_boundary(x)[0] <= eps:
        raise OutOfDomain("start point must lie inside the domain beyond the absorption shell")
    return x


def _walk_chunk(domain, x, eps, max_steps, seed, lo, hi, source):
    """Run walkers ``lo..hi-1``; returns exit points, step counts and source sums."""
    m, d = hi - lo, domain.dim
    rngs = [sample_rng(seed, i) for i in range(lo, hi)]
    pos = np.tile(x, (m, 1))
    steps = np.zeros(m, dtype=np.int64)
    acc = np.zeros(m)
    active = np.ones(m, dtype=bool)
    block = np.empty((m, BLOCK, d))
    k = 0
    while k < max_steps:
        r = domain.distance_to_boundary(pos)
        active &= r > eps
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        j = k % BLOCK
        if j == 0:
            for i in idx:
                block[i] = rngs[i].standard_normal((BLOCK, d))
        z = block[idx, j]
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        ri = r[idx]
        if source is not None:
            acc[idx] += source(pos[idx]) * ri**2 / (2 * d)
        pos[idx] += ri[:, None] * z
        steps[idx] += 1
        k += 1
    capped = domain.distance_to_boundary(pos) > eps
    return np.column_stack([domain.project(pos), steps, acc, capped])


def _run(domain, g, x, cfg: WalkConfig, source=None) -> WalkResult:
    eps = cfg.eps(domain)
    x = _check(domain, x, eps)
    d = domain.dim
    out = ordered_map(lambda lo, hi: _walk_chunk(domain, x, eps, cfg.max_steps, cfg.seed,
                                                 lo, hi, source),
                      cfg.n_walkers, cfg.chunk, cfg.workers)
    exits, steps, acc, capped = out[:, :d], out[:, d].astype(int), out[:, d + 1], out[:, d + 2] > 0
    gv = _score(g, exits, domain)
    scores = gv - acc
    est, se = batch_means(scores)
    msg = None
    frac = float(capped.mean())
    if frac > NONCONVERGENCE_FRACTION:
        msg = f"{frac:.1%} of walkers exceeded max_steps={cfg.max_steps}"
        warnings.warn(msg, NonConvergenceWarning, stacklevel=3)
    return WalkResult(float(est), float(se), float(steps.mean()), cfg.n_walkers,
                      steps, exits, scores, frac, msg)


def _score(g, pts, domain) -> np.ndarray:
    if isinstance(g, BoundaryData):
        return g.on_points(pts, domain.c, domain.R)
    if np.isscalar(g):
        return np.full(len(pts), float(g))
    return np.asarray(g(pts), dtype=float) * np.ones(len(pts))


def wos_laplace(domain, g: BoundaryData | Callable | float, x, cfg: WalkConfig | None = None) -> WalkResult:
    """Estimate the harmonic extension of ``g`` at ``x``.

    ``g`` may be :class:`BoundaryData` (point functions receive unit
    vectors from the centre), a callable on Cartesian boundary points, or a
    constant.
    """
    return _run(domain, g, x, cfg or WalkConfig())


def wos_poisson(domain, f: Callable | float | None, g, x, cfg: WalkConfig | None = None) -> WalkResult:
    """Estimate the solution of ``Lap psi = f`` in the domain, ``psi = g`` on the boundary."""
    if f is None:
        return wos_laplace(domain, g, x, cfg)
    src = (lambda P: np.full(len(P), float(f))) if np.isscalar(f) else f
    return _run(domain, g, x, cfg or WalkConfig(), src)


@dataclass(frozen=True)
class PassageStats:
    mean_steps: float
    stderr: float
    histogram: np.ndarray
    capped_fraction: float


def first_passage_stats(domain, x, cfg: WalkConfig | None = None) -> PassageStats:
    """Step-count statistics of walkers started at ``x``."""
    cfg = cfg or WalkConfig()
    res = _run(domain, 0.0, x, cfg)
    m, se = batch_means(res.steps.astype(float))
    return PassageStats(float(m), float(se), np.bincount(res.steps), res.capped_fraction)
