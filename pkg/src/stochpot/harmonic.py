"""Harmonic functions, Dirichlet solvers on discs and balls, classical estimates.

Built-in function variants carry analytic gradients and Hessians; a
:class:`Custom` function falls back to central differences.  Solvers use the
periodic trapezoid rule on circles and product Gauss rules on spheres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import (IllConditionedStep, InvalidArgument, InvalidComparison,
                         OutOfDomain, SingularPoint)
from .geometry import Ball, Disc, DomainGrid, Shell, build_grid, circle_grid, sphere_grid

FD_STEP = 1e-4


def _points(X, dim: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != dim:
        raise InvalidArgument(f"expected points of dimension {dim}, got {X.shape[1]}")
    return X


# --------------------------------------------------------------------------
# finite differences
# --------------------------------------------------------------------------


def fd_grad(func: Callable, X: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    X = np.atleast_2d(X)
    d = X.shape[1]
    out = np.empty_like(X, dtype=float)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[:, i] = (func(X + e) - func(X - e)) / (2 * h)
    return out


def fd_hessian(func: Callable, X: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    X = np.atleast_2d(X)
    m, d = X.shape
    H = np.empty((m, d, d))
    f0 = func(X)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h
        H[:, i, i] = (func(X + ei) - 2 * f0 + func(X - ei)) / h**2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h
            v = (func(X + ei + ej) - func(X + ei - ej) - func(X - ei + ej)
                 + func(X - ei - ej)) / (4 * h * h)
            H[:, i, j] = H[:, j, i] = v
    return H


def fd_laplacian(func: Callable, X: np.ndarray, h: float = FD_STEP, order: int = 2) -> np.ndarray:
    """Central-difference Laplacian with a 3-point (order 2) or 5-point (order 4) stencil."""
    X = np.atleast_2d(X)
    d = X.shape[1]
    f0 = func(X)
    out = np.zeros(X.shape[0])
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        if order == 2:
            out += func(X + e) - 2 * f0 + func(X - e)
        elif order == 4:
            out += (-func(X + 2 * e) + 16 * func(X + e) - 30 * f0 + 16 * func(X - e)
                    - func(X - 2 * e)) / 12
        else:
            raise InvalidArgument("stencil order must be 2 or 4")
    return out / h**2


# --------------------------------------------------------------------------
# harmonic function variants
# --------------------------------------------------------------------------


class HarmonicFn:
    """Base class: ``value``, ``grad``, ``hessian`` on point arrays (m, dim)."""

    dim: int = 2
    scale: float = 1.0

    def value(self, X) -> np.ndarray:
        raise NotImplementedError

    def grad(self, X) -> np.ndarray:
        return fd_grad(self.value, _points(X, self.dim), FD_STEP * self.scale)

    def hessian(self, X) -> np.ndarray:
        return fd_hessian(self.value, _points(X, self.dim), 1e-3 * self.scale)

    def laplacian(self, X) -> np.ndarray:
        return np.trace(self.hessian(X), axis1=1, axis2=2)

    def __call__(self, X) -> np.ndarray:
        return self.value(X)

    def check_regular(self, X):
        pass


@dataclass(frozen=True)
class ComplexPoly(HarmonicFn):
    """Real or imaginary part of a complex polynomial in ``z = x + i y``.

    With ``coeffs=None`` the polynomial is ``z**degree``.  In three
    dimensions the function ignores the third coordinate.
    """

    degree: int = 2
    part: str = "real"
    dim: int = 2
    coeffs: tuple | None = None

    def __post_init__(self):
        if self.part not in ("real", "imag"):
            raise InvalidArgument("part must be 'real' or 'imag'")
        if self.dim not in (2, 3):
            raise InvalidArgument("ComplexPoly needs dim 2 or 3")
        if self.coeffs is None:
            c = np.zeros(self.degree + 1, dtype=complex)
            c[self.degree] = 1.0
        else:
            c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", tuple(complex(v) for v in c))
        object.__setattr__(self, "degree", len(c) - 1)

    def _eval(self, X, k=0):
        X = _points(X, self.dim)
        z = X[:, 0] + 1j * X[:, 1]
        p = np.polynomial.Polynomial(np.asarray(self.coeffs)).deriv(k) if k else \
            np.polynomial.Polynomial(np.asarray(self.coeffs))
        return p(z)

    def value(self, X):
        f = self._eval(X)
        return f.real if self.part == "real" else f.imag

    def grad(self, X):
        f1 = self._eval(X, 1)
        if self.part == "real":
            g = [f1.real, -f1.imag]
        else:
            g = [f1.imag, f1.real]
        if self.dim == 3:
            g.append(np.zeros_like(f1.real))
        return np.stack(g, axis=1)

    def hessian(self, X):
        f2 = self._eval(X, 2)
        if self.part == "real":
            hxx, hxy = f2.real, -f2.imag
        else:
            hxx, hxy = f2.imag, f2.real
        H = np.zeros((f2.shape[0], self.dim, self.dim))
        H[:, 0, 0], H[:, 1, 1] = hxx, -hxx
        H[:, 0, 1] = H[:, 1, 0] = hxy
        return H


def _radial_parts(X, center):
    d = X - np.asarray(center)
    r = np.linalg.norm(d, axis=1)
    if np.any(r == 0):
        raise SingularPoint("radial function evaluated at its centre")
    return d, r


@dataclass(frozen=True)
class Radial3D(HarmonicFn):
    """``-C1 / r + C2`` in three dimensions."""

    C1: float = 1.0
    C2: float = 0.0
    center: tuple = (0.0, 0.0, 0.0)
    dim: int = 3

    def value(self, X):
        _, r = _radial_parts(_points(X, 3), self.center)
        return -self.C1 / r + self.C2

    def grad(self, X):
        d, r = _radial_parts(_points(X, 3), self.center)
        return self.C1 * d / r[:, None] ** 3

    def hessian(self, X):
        d, r = _radial_parts(_points(X, 3), self.center)
        eye = np.eye(3)[None]
        return self.C1 * (eye / r[:, None, None] ** 3
                          - 3 * d[:, :, None] * d[:, None, :] / r[:, None, None] ** 5)


@dataclass(frozen=True)
class RadialLog2D(HarmonicFn):
    """``C1 log r + C2`` in the plane."""

    C1: float = 1.0
    C2: float = 0.0
    center: tuple = (0.0, 0.0)
    dim: int = 2

    def value(self, X):
        _, r = _radial_parts(_points(X, 2), self.center)
        return self.C1 * np.log(r) + self.C2

    def grad(self, X):
        d, r = _radial_parts(_points(X, 2), self.center)
        return self.C1 * d / r[:, None] ** 2

    def hessian(self, X):
        d, r = _radial_parts(_points(X, 2), self.center)
        eye = np.eye(2)[None]
        return self.C1 * (eye / r[:, None, None] ** 2
                          - 2 * d[:, :, None] * d[:, None, :] / r[:, None, None] ** 4)


@dataclass(frozen=True)
class FlowPastSphere(HarmonicFn):
    """Velocity potential ``u z (1 + R^3 / (2 |x|^3))`` of flow around a sphere."""

    u: float = 1.0
    R: float = 1.0
    dim: int = 3

    def value(self, X):
        X = _points(X, 3)
        _, r = _radial_parts(X, (0, 0, 0))
        return self.u * X[:, 2] * (1 + self.R**3 / (2 * r**3))

    def grad(self, X):
        X = _points(X, 3)
        _, r = _radial_parts(X, (0, 0, 0))
        A = self.R**3 / (2 * r**3)
        g = -3 * self.u * X[:, 2, None] * A[:, None] * X / r[:, None] ** 2
        g[:, 2] += self.u * (1 + A)
        return g

    def hessian(self, X):
        X = _points(X, 3)
        _, r = _radial_parts(X, (0, 0, 0))
        k = 1.5 * self.R**3
        dA = -k * X / r[:, None] ** 5
        ddA = -k * (np.eye(3)[None] / r[:, None, None] ** 5
                    - 5 * X[:, :, None] * X[:, None, :] / r[:, None, None] ** 7)
        H = self.u * X[:, 2, None, None] * ddA
        H[:, 2, :] += self.u * dA
        H[:, :, 2] += self.u * dA
        return H


@dataclass(frozen=True)
class LineVortex(HarmonicFn):
    """Angle potential ``k * theta`` of a planar vortex (valid off the cut)."""

    k: float = 1.0
    dim: int = 2

    def value(self, X):
        X = _points(X, self.dim)
        _radial_parts(X[:, :2], (0, 0))
        return self.k * np.arctan2(X[:, 1], X[:, 0])

    def grad(self, X):
        X = _points(X, self.dim)
        _, r = _radial_parts(X[:, :2], (0, 0))
        g = np.zeros_like(X)
        g[:, 0] = -self.k * X[:, 1] / r**2
        g[:, 1] = self.k * X[:, 0] / r**2
        return g

    def hessian(self, X):
        X = _points(X, self.dim)
        _, r = _radial_parts(X[:, :2], (0, 0))
        x, y = X[:, 0], X[:, 1]
        H = np.zeros((X.shape[0], self.dim, self.dim))
        H[:, 0, 0] = 2 * self.k * x * y / r**4
        H[:, 1, 1] = -H[:, 0, 0]
        H[:, 0, 1] = H[:, 1, 0] = self.k * (y * y - x * x) / r**4
        return H


@dataclass(frozen=True)
class Linear(HarmonicFn):
    """Affine function ``a . x + c``."""

    a: tuple = (1.0, 0.0)
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))

    @property
    def dim(self) -> int:
        return len(self.a)

    def value(self, X):
        return _points(X, self.dim) @ np.asarray(self.a) + self.c

    def grad(self, X):
        X = _points(X, self.dim)
        return np.tile(np.asarray(self.a), (X.shape[0], 1))

    def hessian(self, X):
        X = _points(X, self.dim)
        return np.zeros((X.shape[0], self.dim, self.dim))


@dataclass(frozen=True)
class Custom(HarmonicFn):
    """User function with optional analytic derivatives.

    Missing derivatives are taken by central differences with step
    ``1e-4 * scale`` (gradient) and ``1e-3 * scale`` (Hessian).
    """

    func: Callable = field(default=lambda X: np.zeros(len(X)))
    dim: int = 2
    grad_func: Callable | None = None
    hessian_func: Callable | None = None
    scale: float = 1.0

    def value(self, X):
        return np.asarray(self.func(_points(X, self.dim)), dtype=float)

    def grad(self, X):
        if self.grad_func is not None:
            return np.asarray(self.grad_func(_points(X, self.dim)), dtype=float)
        return super().grad(X)

    def hessian(self, X):
        if self.hessian_func is not None:
            return np.asarray(self.hessian_func(_points(X, self.dim)), dtype=float)
        return super().hessian(X)

    def laplacian(self, X):
        if self.hessian_func is not None:
            return super().laplacian(X)
        return fd_laplacian(self.value, _points(X, self.dim), 1e-3 * self.scale)


def random_harmonic_polynomial(rng: np.random.Generator, max_degree: int = 5,
                               dim: int = 2) -> ComplexPoly:
    """Random member of the complex-polynomial family (coefficients ~ N(0,1))."""
    deg = int(rng.integers(1, max_degree + 1))
    c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    part = "real" if rng.random() < 0.5 else "imag"
    return ComplexPoly(deg, part, dim, tuple(c))


# --------------------------------------------------------------------------
# boundary data
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryData:
    """Boundary values on a circle (by angle) or on a sphere (by point).

    Exactly one of ``angle_func`` and ``point_func`` is normally supplied; an
    angle function is applied to points through ``atan2`` about ``center``.
    """

    angle_func: Callable | None = None
    point_func: Callable | None = None
    name: str = "custom"

    def on_angles(self, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        if self.angle_func is not None:
            return np.asarray(self.angle_func(beta), dtype=float) * np.ones_like(beta)
        pts = np.stack([np.cos(beta), np.sin(beta)], axis=-1)
        return np.asarray(self.point_func(pts), dtype=float)

    def on_points(self, P, center=None, R: float = 1.0) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if self.point_func is not None:
            c = np.zeros(P.shape[1]) if center is None else np.asarray(center)
            return np.asarray(self.point_func((P - c) / R), dtype=float) * np.ones(P.shape[0])
        c = np.zeros(2) if center is None else np.asarray(center)[:2]
        return self.on_angles(np.arctan2(P[:, 1] - c[1], P[:, 0] - c[0]))

    def __add__(self, other: "BoundaryData") -> "BoundaryData":
        return BoundaryData(point_func=lambda U: self.on_points(U) + other.on_points(U),
                            name=f"{self.name}+{other.name}")


def boundary_preset(spec: str) -> BoundaryData:
    """Named boundary data.

    ``const:c``, ``cos:m``, ``sin:m``, ``step`` (1 on the upper half circle),
    ``zdir`` / ``xdir`` (the unit-sphere coordinate ``sigma_z / R`` or
    ``sigma_x / R``).  The forms ``cos1`` and ``sin3`` are also accepted.
    """
    s = spec.strip().lower()
    name, _, arg = s.partition(":")
    if not arg:
        for pre in ("cos", "sin"):
            if name.startswith(pre) and name[len(pre):].isdigit():
                name, arg = pre, name[len(pre):]
    if name in ("const", "constant"):
        c = float(arg or 1.0)
        return BoundaryData(point_func=lambda U: np.full(len(U), c), name=s)
    if name in ("cos", "sin"):
        m = int(arg or 1)
        fn = np.cos if name == "cos" else np.sin
        return BoundaryData(angle_func=lambda b: fn(m * b), name=s)
    if name == "step":
        return BoundaryData(angle_func=lambda b: (np.mod(b, 2 * np.pi) < np.pi).astype(float),
                            name=s)
    if name in ("zdir", "xdir", "ydir"):
        k = "xyz".index(name[0])
        return BoundaryData(point_func=lambda U: U[:, k], name=s)
    raise InvalidArgument(f"unknown boundary preset {spec!r}")


# --------------------------------------------------------------------------
# disc solvers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscFourierCoeffs:
    """Coefficients of ``A0/2 + sum (r/R)^m (A_m cos m t + B_m sin m t)``."""

    A: np.ndarray
    B: np.ndarray

    @property
    def M(self) -> int:
        return len(self.A) - 1


def disc_fourier_solve(g: BoundaryData | Callable, M: int, n_quad: int | None = None) -> DiscFourierCoeffs:
    """Fourier coefficients of boundary data by the periodic trapezoid rule.

    ``A_m = (1/pi) int g(b) cos(m b) db`` and likewise for ``B_m``.
    """
    if int(M) != M or M < 1:
        raise InvalidArgument("mode count must be a positive integer")
    M = int(M)
    N = n_quad or max(4 * M + 4, 512)
    beta = np.arange(N) * (2 * math.pi / N)
    gv = _angle_values(g, beta)
    m = np.arange(M + 1)[:, None]
    A = (2.0 / N) * (np.cos(m * beta) @ gv)
    B = (2.0 / N) * (np.sin(m * beta) @ gv)
    B[0] = 0.0
    return DiscFourierCoeffs(A, B)


def _angle_values(g, beta):
    if isinstance(g, BoundaryData):
        return g.on_angles(beta)
    return np.asarray(g(beta), dtype=float) * np.ones_like(beta)


def _check_radius(r, R):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= R):
        raise OutOfDomain("evaluation radius must satisfy 0 <= r < R")
    return r


def disc_fourier_eval(coeffs: DiscFourierCoeffs, R: float, r, theta):
    """Evaluate the damped Fourier series at polar points ``(r, theta)``."""
    r = _check_radius(r, R)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    m = np.arange(coeffs.M + 1)
    damp = (r[..., None] / R) ** m
    terms = damp * (coeffs.A * np.cos(m * theta[..., None]) + coeffs.B * np.sin(m * theta[..., None]))
    out = terms.sum(axis=-1) - 0.5 * coeffs.A[0]
    return out[()] if out.ndim == 0 else out


def poisson_kernel_disc(R: float, r, theta, beta):
    """``(R^2 - r^2) / (R^2 - 2 r R cos(theta - beta) + r^2)``."""
    return (R * R - r * r) / (R * R - 2 * r * R * np.cos(theta - beta) + r * r)


NEAR_BOUNDARY = 0.95


def disc_poisson_eval(g: BoundaryData | Callable, R: float, r, theta, n_quad: int = 512):
    """Poisson integral solution of the disc Dirichlet problem.

    Uses ``(1/2pi) int P(r, theta - b) g(b) db`` by the periodic trapezoid
    rule.  Points with ``r > 0.95 R`` are evaluated through the Fourier series
    instead, where the kernel becomes too peaked for the rule.
    """
    r = _check_radius(r, R)
    theta = np.asarray(theta, dtype=float)
    r, theta = np.broadcast_arrays(r, theta)
    beta = np.arange(n_quad) * (2 * math.pi / n_quad)
    gv = _angle_values(g, beta)
    P = poisson_kernel_disc(R, r[..., None], theta[..., None], beta)
    out = (P @ gv) / n_quad
    near = r > NEAR_BOUNDARY * R
    if np.any(near):
        coeffs = disc_fourier_solve(g, n_quad // 2 - 1, n_quad)
        out = np.where(near, disc_fourier_eval(coeffs, R, np.where(near, r, 0.0), theta), out)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# ball solvers
# --------------------------------------------------------------------------


def ball_green(x, y, R: float = 1.0, p=None) -> float:
    """Dirichlet Green function of the ball ``B_R(p)`` in three dimensions.

    ``G(x, y) = -1/(4 pi |x - y|) + R / (4 pi |x - p| |x* - (y - p)|)`` where
    ``x* = R^2 (x - p) / |x - p|^2`` is the inverse point.  It vanishes for
    ``y`` on the sphere.
    """
    p = np.zeros(3) if p is None else np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - p
    ax = np.linalg.norm(dx)
    if ax >= R:
        raise OutOfDomain("Green function needs x inside the ball")
    dxy = np.linalg.norm(x - y)
    if dxy == 0:
        raise SingularPoint("Green function is singular at x = y")
    if ax == 0:
        return -1 / (4 * math.pi * dxy) + 1 / (4 * math.pi * R)
    xstar = R * R * dx / ax**2
    return -1 / (4 * math.pi * dxy) + R / (4 * math.pi * ax * np.linalg.norm(xstar - (y - p)))


def default_sphere_grid(R: float, center, resolution: int = 48) -> DomainGrid:
    return sphere_grid(R, resolution, center=center, rule="gauss")


def ball_poisson_eval(g: BoundaryData | Callable, x, R: float = 1.0, p=None,
                      grid: DomainGrid | None = None):
    """Poisson formula ``((R^2 - |x-p|^2) / (4 pi R)) int g / |x - s|^3 ds``.

    ``g`` is a :class:`BoundaryData` (point functions receive unit vectors)
    or a callable taking Cartesian boundary points.
    """
    p = np.zeros(3) if p is None else np.asarray(p, dtype=float)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    a = np.linalg.norm(X - p, axis=1)
    if np.any(a >= R):
        raise OutOfDomain("Poisson formula needs interior points")
    grid = grid or default_sphere_grid(R, p)
    if isinstance(g, BoundaryData):
        gv = g.on_points(grid.points, p, R)
    else:
        gv = np.asarray(g(grid.points), dtype=float)
    d = np.linalg.norm(X[:, None, :] - grid.points[None, :, :], axis=2)
    out = (R * R - a * a) / (4 * math.pi * R) * ((gv * grid.weights) / d**3).sum(axis=1)
    return out[0] if np.ndim(x) == 1 else out


# --------------------------------------------------------------------------
# classical estimates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MVPResidual:
    volume: float
    surface: float
    scale: float

    @property
    def volume_rel(self) -> float:
        return self.volume / self.scale

    @property
    def surface_rel(self) -> float:
        return self.surface / self.scale


def mvp_residual(f: HarmonicFn, ball, resolution: int = 24, rule: str = "gauss") -> MVPResidual:
    """Ball and sphere averages of ``f`` against its centre value.

    The relative scale is ``max(|f(c)|, max over the grids of |f|)``.
    """
    vol = build_grid(ball, "volume", resolution, rule)
    surf = build_grid(ball, "surface", resolution, rule)
    c = ball.c[None, :]
    fc = float(f.value(c)[0])
    fv = f.value(vol.points)
    fs = f.value(surf.points)
    avg_v = vol.integrate(fv) / vol.total_weight
    avg_s = surf.integrate(fs) / surf.total_weight
    scale = max(abs(fc), float(np.max(np.abs(fv))), float(np.max(np.abs(fs))), 1e-300)
    return MVPResidual(abs(avg_v - fc), abs(avg_s - fc), scale)


def harnack_factors(R: float, d: float, n: int, form: str = "classical") -> tuple[float, float]:
    """Lower and upper Harnack factors for a non-negative harmonic function.

    ``form="classical"`` gives ``R^(n-2)(R-d)/(R+d)^(n-1)`` and
    ``R^(n-2)(R+d)/(R-d)^(n-1)``, which tend to 1 as ``R -> inf``.
    ``form="paper"`` uses ``R^(n-1)`` in place of ``R^(n-2)``; the two agree
    at ``R = 1``.
    """
    if R <= 0 or n < 1:
        raise InvalidArgument("need R > 0 and n >= 1")
    if not 0 <= d < R:
        raise OutOfDomain("Harnack bounds need 0 <= d < R")
    k = {"classical": n - 2, "paper": n - 1}[form]
    lo = R**k * (R - d) / (R + d) ** (n - 1)
    hi = R**k * (R + d) / (R - d) ** (n - 1)
    return lo, hi


def harnack_bounds(psi_y: float, R: float, d: float, n: int,
                   form: str = "classical") -> tuple[float, float]:
    """Bounds ``(X psi, Y psi)`` on ``psi(x)`` for ``|x - y| = d`` in ``B_R(y)``."""
    if psi_y < 0:
        raise InvalidArgument("Harnack bounds need a non-negative centre value")
    lo, hi = harnack_factors(R, d, n, form)
    return lo * psi_y, hi * psi_y


@dataclass(frozen=True)
class MaxPrincipleVerdict:
    holds: bool
    constant: bool
    interior_max: float
    boundary_max: float
    interior_min: float
    boundary_min: float
    power_checks: dict

    @property
    def label(self) -> str:
        if self.constant:
            return "constant"
        return "holds" if self.holds else "violated"


def max_principle_check(f: HarmonicFn, interior: DomainGrid, boundary: DomainGrid,
                        powers=(2, 3), rtol: float = 1e-9) -> MaxPrincipleVerdict:
    """Interior extrema strictly inside the boundary extrema, and ``|f|^p`` maxima."""
    fi = f.value(interior.points)
    fb = f.value(boundary.points)
    scale = max(float(np.max(np.abs(fb))), 1e-300)
    if np.ptp(fb) <= rtol * scale and np.ptp(fi) <= rtol * scale:
        return MaxPrincipleVerdict(True, True, fi.max(), fb.max(), fi.min(), fb.min(), {})
    tol = rtol * scale
    ok = fi.max() < fb.max() + tol and fi.min() > fb.min() - tol
    pw = {}
    for p in powers:
        mi = float(np.max(np.abs(fi) ** p))
        mb = float(np.max(np.abs(fb) ** p))
        pw[p] = (mi, mb, mi <= mb * (1 + rtol))
    ok = ok and all(v[2] for v in pw.values())
    return MaxPrincipleVerdict(bool(ok), False, fi.max(), fb.max(), fi.min(), fb.min(), pw)


@dataclass(frozen=True)
class StabilityResult:
    max_solution_gap: float
    max_boundary_gap: float
    ordered: bool | None

    @property
    def holds(self) -> bool:
        return self.max_solution_gap <= self.max_boundary_gap * (1 + 1e-9) and self.ordered is not False


def stability_check(g1, g2, R: float = 1.0, n_points: int = 200, seed: int = 0,
                    n_quad: int = 1024) -> StabilityResult:
    """Compare disc solutions for two boundary data.

    Checks ``|psi_1 - psi_2| <= max |g1 - g2|`` at random interior points and,
    when ``g1 >= g2`` on the circle, that ``psi_1 >= psi_2``.
    """
    rng = np.random.default_rng(seed)
    r = R * np.sqrt(rng.random(n_points)) * 0.95
    t = rng.random(n_points) * 2 * math.pi
    beta = np.arange(n_quad) * (2 * math.pi / n_quad)
    d = _angle_values(g1, beta) - _angle_values(g2, beta)
    u1 = disc_poisson_eval(g1, R, r, t, n_quad)
    u2 = disc_poisson_eval(g2, R, r, t, n_quad)
    ordered = None
    if np.all(d >= 0):
        ordered = bool(np.all(u1 - u2 >= -1e-12))
    return StabilityResult(float(np.max(np.abs(u1 - u2))), float(np.max(np.abs(d))), ordered)


def dirichlet_energy(f: HarmonicFn, grid: DomainGrid) -> float:
    """``(1/2) int |grad f|^2`` by quadrature."""
    g = f.grad(grid.points)
    return 0.5 * float(grid.integrate(np.sum(g * g, axis=1)))


def energy_comparison(f: HarmonicFn, phi: HarmonicFn, grid: DomainGrid,
                      boundary: DomainGrid, atol: float = 1e-8) -> tuple[float, float]:
    """Energies of a harmonic function and a competitor with equal boundary values."""
    gap = np.max(np.abs(f.value(boundary.points) - phi.value(boundary.points)))
    if gap > atol:
        raise InvalidComparison(f"boundary values differ by {gap:.3g}")
    return dirichlet_energy(f, grid), dirichlet_energy(phi, grid)


@dataclass(frozen=True)
class CacciopolliResult:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-300


def _round(n: int, R: float, center=None):
    return Disc(R, center) if n == 2 else Ball(n, R, center)


def cacciopolli_check(f: HarmonicFn, R: float = 1.0, center=None, resolution: int = 24,
                      rule: str = "gauss") -> CacciopolliResult:
    """Both sides of ``int_{B_R} |grad f|^2 <= (4/R^2) int_{B_2R - B_R} f^2``."""
    n = f.dim
    inner = build_grid(_round(n, R, center), "volume", resolution, rule)
    shell = build_grid(Shell(n, R, 2 * R, center), "volume", resolution, rule)
    g = f.grad(inner.points)
    lhs = float(inner.integrate(np.sum(g * g, axis=1)))
    rhs = 4.0 / R**2 * float(shell.integrate(f.value(shell.points) ** 2))
    return CacciopolliResult(lhs, rhs)


@dataclass(frozen=True)
class BochnerTerms:
    half_lap_grad_sq: float
    grad_lap_dot_grad: float
    hessian_sq: float

    @property
    def residual(self) -> float:
        return abs(self.half_lap_grad_sq - self.grad_lap_dot_grad - self.hessian_sq)

    @property
    def harmonic_residual(self) -> float:
        return abs(self.half_lap_grad_sq - self.hessian_sq)


def bochner_terms(f: HarmonicFn, x, h: float = 1e-2) -> BochnerTerms:
    """The three terms of the flat Bochner identity at one point.

    ``(1/2) Lap |grad f|^2`` uses a fourth-order stencil on ``|grad f|^2``;
    ``grad(Lap f) . grad f`` differences the Laplacian with step ``h``.
    """
    scale = getattr(f, "scale", 1.0)
    if h < 1e-6 * scale:
        raise IllConditionedStep(f"step {h:g} is too small for nested differences")
    X = _points(x, f.dim)[:1]

    def grad_sq(P):
        g = f.grad(P)
        return np.sum(g * g, axis=1)

    half = 0.5 * float(fd_laplacian(grad_sq, X, h, order=4)[0])
    glap = fd_grad(f.laplacian, X, h)[0]
    dot = float(glap @ f.grad(X)[0])
    H = f.hessian(X)[0]
    return BochnerTerms(half, dot, float(np.sum(H * H)))


def bochner_residual(f: HarmonicFn, x, h: float = 1e-2) -> float:
    return bochner_terms(f, x, h).residual


def gradient_estimate_ratio(f: HarmonicFn, R: float = 1.0, center=None,
                            resolution: int = 24) -> float:
    """``sup_{B_R} |grad f| * R / sup_{B_2R} |f|`` over volume and sphere grids."""
    n = f.dim
    pts_R = np.vstack([build_grid(_round(n, R, center), "volume", resolution, "gauss").points,
                       build_grid(_round(n, R, center), "surface", 4 * resolution, "gauss").points])
    pts_2R = np.vstack([build_grid(_round(n, 2 * R, center), "volume", resolution, "gauss").points,
                        build_grid(_round(n, 2 * R, center), "surface", 4 * resolution, "gauss").points])
    sup_f = float(np.max(np.abs(f.value(pts_2R))))
    if sup_f == 0:
        return 0.0
    return float(np.max(np.linalg.norm(f.grad(pts_R), axis=1))) * R / sup_f


def doubling_ratio(f: HarmonicFn, R: float = 1.0, center=None, resolution: int = 24) -> float:
    """``int_{B_2R} f^2 / int_{B_R} f^2``."""
    n = f.dim
    big = build_grid(_round(n, 2 * R, center), "volume", resolution, "gauss")
    small = build_grid(_round(n, R, center), "volume", resolution, "gauss")
    return float(big.integrate(f.value(big.points) ** 2) / small.integrate(f.value(small.points) ** 2))


def exponential_identity_residual(f: HarmonicFn, eta: float, X, h: float = 1e-3) -> np.ndarray:
    """Relative gap between ``Lap exp(eta f)`` and ``eta^2 |grad f|^2 exp(eta f)``."""
    X = _points(X, f.dim)
    lap = fd_laplacian(lambda P: np.exp(eta * f.value(P)), X, h)
    g = f.grad(X)
    exact = eta**2 * np.sum(g * g, axis=1) * np.exp(eta * f.value(X))
    return np.abs(lap - exact) / np.maximum(np.abs(exact), 1e-300)
