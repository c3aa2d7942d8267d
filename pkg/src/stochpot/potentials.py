"""Riesz and Newtonian potentials by quadrature, with closed-form ball oracles.

Convention: ``psi(x) = gamma * int g(y) / |x - y|**(n - a) dy`` is non-negative
for non-negative densities.  With ``n = 3, a = 2`` this is the Newtonian
potential and ``Lap psi = -4 pi g`` inside the support.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import EmbeddingViolation, InvalidArgument, InvalidOrder, OutOfDomain
from .geometry import Ball, DomainGrid, _Round, build_grid, cell_subsamples

SUBSAMPLE_FACTOR = 8
_CHUNK = 2_000_000  # pair evaluations per block


def _const_density(value: float) -> Callable:
    return lambda Y: np.full(len(Y), float(value))


@dataclass(frozen=True, eq=False)
class RieszSpec:
    """Riesz potential of order ``a`` of a density on a gridded domain.

    Parameters
    ----------
    n : int
        Ambient dimension.
    a : float
        Order, ``0 < a < n``.
    density : callable or float
        ``g(Y)`` on an ``(m, n)`` array, or a constant.
    domain : Ball, Disc, Shell or Cylinder
    resolution : int
        Midpoint cells per axis.
    gamma : float
        Normalization, default 1.
    rule : {"midpoint", "gauss"}
        Volume rule.  Gauss grids skip the singular-cell treatment and are
        meant for evaluation points away from the support.
    """

    n: int = 3
    a: float = 2.0
    density: Callable | float = 1.0
    domain: object = None
    resolution: int = 32
    gamma: float = 1.0
    rule: str = "midpoint"

    def __post_init__(self):
        if not 0 < self.a < self.n:
            raise InvalidOrder(f"Riesz order must satisfy 0 < a < n, got a={self.a}, n={self.n}")
        if self.domain is None:
            object.__setattr__(self, "domain", Ball(self.n, 1.0))
        if self.domain.dim != self.n:
            raise InvalidArgument("domain dimension does not match n")
        if not callable(self.density):
            object.__setattr__(self, "density", _const_density(self.density))

    @property
    def exponent(self) -> float:
        return self.n - self.a

    def grid(self) -> DomainGrid:
        return _cached_grid(self.domain, self.resolution, self.rule)

    def kernel(self, r):
        return 1.0 / r**self.exponent


_GRIDS: dict = {}


def _cached_grid(domain, resolution, rule="midpoint"):
    key = (domain.describe(), resolution, rule)
    if key not in _GRIDS:
        if len(_GRIDS) > 8:
            _GRIDS.clear()
        _GRIDS[key] = build_grid(domain, "volume", resolution, rule)
    return _GRIDS[key]


def riesz_weights(spec: RieszSpec, x) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and kernel-times-measure weights whose sum against ``g`` is ``psi(x)``.

    The potential at ``x`` is ``gamma * sum_k g(Y_k) W_k``.  Cells whose node
    lies within half a cell diameter of ``x`` are replaced by their
    ``8**n`` subcells.
    """
    x = np.asarray(x, dtype=float)
    grid = spec.grid()
    Y, w = grid.points, grid.weights
    r = np.linalg.norm(Y - x, axis=1)
    h = grid.cell_size
    if h is None:
        return Y, w / r**spec.exponent
    near = r <= 0.5 * math.sqrt(spec.n) * h
    W = np.where(near, 0.0, w / np.where(near, 1.0, r) ** spec.exponent)
    if not np.any(near):
        return Y, W
    subs, sw = [], []
    for node in Y[near]:
        p, q = cell_subsamples(spec.domain, node, h, SUBSAMPLE_FACTOR)
        rr = np.linalg.norm(p - x, axis=1)
        keep = rr > 0
        subs.append(p[keep])
        sw.append(q[keep] / rr[keep] ** spec.exponent)
    return np.vstack([Y[~near], *subs]), np.concatenate([W[~near], *sw])


def riesz_potential(spec: RieszSpec, x) -> np.ndarray | float:
    """Quadrature value of the Riesz potential at one point or an array of points."""
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[1] != spec.n:
        raise InvalidArgument("evaluation points have the wrong dimension")
    grid = spec.grid()
    Y, w = grid.points, grid.weights
    gw = spec.density(Y) * w
    h = grid.cell_size
    trigger = -1.0 if h is None else 0.5 * math.sqrt(spec.n) * h
    out = np.empty(X.shape[0])
    step = max(1, _CHUNK // len(Y))
    for s in range(0, X.shape[0], step):
        blk = X[s:s + step]
        r = np.linalg.norm(blk[:, None, :] - Y[None, :, :], axis=2)
        near = r <= trigger
        r = np.where(near, np.inf, r)
        out[s:s + step] = (gw / r**spec.exponent).sum(axis=1)
        for i in np.flatnonzero(near.any(axis=1)):
            xi = blk[i]
            for node in Y[near[i]]:
                p, q = cell_subsamples(spec.domain, node, h, SUBSAMPLE_FACTOR)
                rr = np.linalg.norm(p - xi, axis=1)
                keep = rr > 0
                out[s + i] += np.sum(spec.density(p[keep]) * q[keep] / rr[keep] ** spec.exponent)
    out *= spec.gamma
    return float(out[0]) if np.ndim(x) == 1 else out


def scaled_density_spec(spec: RieszSpec, zeta: float) -> RieszSpec:
    """Spec for ``g_zeta(y) = g(zeta y)`` on the domain shrunk by ``1/zeta``.

    Substituting ``y = z / zeta`` gives
    ``F_a g_zeta(x) = zeta**(-a) F_a g(zeta x)``.
    """
    if zeta <= 0:
        raise InvalidArgument("scale factor must be positive")
    d = spec.domain
    if not isinstance(d, _Round):
        raise InvalidArgument("scaling is implemented for balls and discs")
    dom = type(d)(d.n, d.R / zeta, tuple(np.asarray(d.center) / zeta)) if isinstance(d, Ball) \
        else type(d)(d.R / zeta, tuple(np.asarray(d.center) / zeta))
    g = spec.density
    return RieszSpec(spec.n, spec.a, lambda Y: g(zeta * Y), dom, spec.resolution, spec.gamma,
                     spec.rule)


def ball_newton_closed(R: float, a: float, C: float = 1.0, rho: float = 1.0) -> float:
    """Potential ``(C/4pi) int_{B_R} rho / |x - y|`` of a uniform ball at ``|x| = a``."""
    if R <= 0 or a < 0:
        raise InvalidArgument("need R > 0 and a >= 0")
    if a <= R:
        return C / (4 * math.pi) * rho * 2 * math.pi * (R * R - a * a / 3)
    return C * rho * R**3 / (3 * a)


def ball_integral_closed(R: float, a: float) -> float:
    """``int_{B_R} d^3y / |x - y|`` at ``|x| = a``."""
    return ball_newton_closed(R, a, 4 * math.pi, 1.0)


def ball_newton_gradient_closed(R: float, a_vec) -> np.ndarray:
    """Gradient of ``int_{B_R} d^3y / |x - y|`` at an exterior point.

    Equals ``-(4 pi / 3) R^3 a / |a|^3``.
    """
    a_vec = np.asarray(a_vec, dtype=float)
    na = float(np.linalg.norm(a_vec))
    if na <= R:
        raise OutOfDomain("gradient closed form needs an exterior point")
    return -(4 * math.pi / 3) * R**3 * a_vec / na**3


def riesz_lq_exponent(n: int, p: float, a: float) -> float:
    """Target exponent ``q = n p / (n - a p)`` of the Riesz embedding."""
    if a * p >= n:
        raise EmbeddingViolation(f"need a*p < n, got a*p = {a * p:g}")
    return n * p / (n - a * p)


def capacity(spec: RieszSpec, p: float = 1.0, eval_resolution: int = 12) -> float:
    """``int_D |F_a g(x)|^p dx``; the outer integral uses a Gauss rule when available."""
    rule = "gauss" if isinstance(spec.domain, _Round) else "midpoint"
    outer = build_grid(spec.domain, "volume", eval_resolution, rule)
    vals = riesz_potential(spec, outer.points)
    return float(outer.integrate(np.abs(vals) ** p))


def capacity_closed_unit_ball() -> float:
    """``int_{B_1} 2 pi (1 - r^2/3) dx = 32 pi^2 / 15``."""
    return 32 * math.pi**2 / 15


def ray_points(origin, direction, r_max: float, m: int = 50) -> np.ndarray:
    """``m`` equispaced points along a ray, excluding the origin."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    t = np.linspace(r_max / m, r_max, m)
    return np.asarray(origin, dtype=float) + t[:, None] * d


def write_potential_csv(path, points, values, header: str | None = None):
    """Write ``(x0, .., psi)`` rows; an optional ``#`` comment line comes first."""
    points = np.atleast_2d(points)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(points.shape[1])] + ["psi"])
        for p, v in zip(points, np.atleast_1d(values)):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v))])
