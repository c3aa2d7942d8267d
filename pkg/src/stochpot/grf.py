"""Gaussian random scalar fields: kernels, sampling, integrals and moments.

Sampling is exact on a finite point set: the covariance matrix is factorized
by Cholesky with a small diagonal jitter and sample ``i`` of seed ``s`` is
``L @ z`` with ``z`` drawn from the counter-based stream ``(s, i)``.  Linear
statistics of the field (integrals, finite differences, Poisson sums) are
evaluated as ``z @ (L.T @ A)`` which is the same draw, only cheaper.
"""

from __future__ import annotations

import io
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist
from scipy.special import eval_hermite

from . import mc
from .exceptions import (ChartSingularity, FactorizationFailure, InadmissibleKernel,
                         InvalidArgument, InvalidPairing, MissingConstant,
                         NonDifferentiableKernel, NonPointwiseKernel, ResourceLimit,
                         SingularKernel)
from .geometry import FRAMES, DomainGrid

MAX_POINTS = 4000
JITTER_START = 1e-10
JITTER_STOP = 1e-6
METRICS = ("euclidean", "angular")


def _fmt(v) -> str:
    return repr(float(v))


def _pairwise(X, Y, metric: str) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if metric == "euclidean":
        return cdist(X, Y)
    # angle subtended at the origin; on a circle this is the periodic
    # distance min(|b - b'|, 2 pi - |b - b'|)
    nx = X / np.linalg.norm(X, axis=1, keepdims=True)
    ny = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    return np.arccos(np.clip(nx @ ny.T, -1.0, 1.0))


def _positive(obj, *names):
    for name in names:
        v = getattr(obj, name)
        if not (np.isfinite(v) and v > 0):
            raise InvalidArgument(f"{name} must be positive, got {v}")


def _check_metric(metric: str) -> str:
    if metric not in METRICS:
        raise InvalidArgument(f"metric must be one of {METRICS}, got {metric!r}")
    return metric


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Admissibility:
    """Outcome of the continuity test for a kernel."""

    admissible: bool
    reason: str

    def __bool__(self) -> bool:
        return self.admissible


_KC_OK = "Kolmogorov continuity condition is satisfied"
_KC_FAIL = "Kolmogorov continuity condition is not satisfied"


class CovKernel:
    """Base class; subclasses implement ``matrix`` and ``describe``."""

    differentiable = False

    @property
    def variance(self) -> float:
        raise NonPointwiseKernel(f"{type(self).__name__} has no pointwise variance")

    def matrix(self, X, Y=None) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, y) -> float:
        return float(self.matrix(np.atleast_2d(x), np.atleast_2d(y))[0, 0])

    def admissibility(self) -> Admissibility:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(CovKernel):
    """Colored noise ``alpha * exp(-d / xi)``."""

    alpha: float = 1.0
    xi: float = 1.0
    metric: str = "euclidean"

    def __post_init__(self):
        _positive(self, "alpha", "xi")
        _check_metric(self.metric)

    @property
    def variance(self) -> float:
        return self.alpha

    def profile(self, d):
        return self.alpha * np.exp(-np.asarray(d) / self.xi)

    def matrix(self, X, Y=None):
        Y = X if Y is None else Y
        return self.profile(_pairwise(X, Y, self.metric))

    def admissibility(self):
        return Admissibility(True, f"{_KC_OK}: exponential kernel is Lipschitz at coincidence")

    def describe(self):
        return f"Exponential(alpha={_fmt(self.alpha)},xi={_fmt(self.xi)},metric={self.metric})"


@dataclass(frozen=True)
class GaussianCorr(CovKernel):
    """Squared-exponential kernel ``alpha * exp(-d**2 / xi**2)``."""

    alpha: float = 1.0
    xi: float = 1.0
    metric: str = "euclidean"
    differentiable = True

    def __post_init__(self):
        _positive(self, "alpha", "xi")
        _check_metric(self.metric)

    @property
    def variance(self) -> float:
        return self.alpha

    def profile(self, d):
        return self.alpha * np.exp(-(np.asarray(d) / self.xi) ** 2)

    def matrix(self, X, Y=None):
        Y = X if Y is None else Y
        return self.profile(_pairwise(X, Y, self.metric))

    def admissibility(self):
        return Admissibility(True, f"{_KC_OK}: Gaussian kernel is smooth at coincidence")

    def describe(self):
        return f"GaussianCorr(alpha={_fmt(self.alpha)},xi={_fmt(self.xi)},metric={self.metric})"


@dataclass(frozen=True)
class PowerLaw(CovKernel):
    """Scale-free kernel ``(xi / d)**p``; singular at coincidence."""

    xi: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        _positive(self, "xi")
        if not self.p >= 1:
            raise InvalidArgument(f"power-law exponent must be >= 1, got {self.p}")

    def matrix(self, X, Y=None):
        Y = X if Y is None else Y
        d = _pairwise(X, Y, "euclidean")
        if np.any(d == 0):
            raise SingularKernel("power-law kernel diverges at coincident points")
        return (self.xi / d) ** self.p

    def admissibility(self):
        return Admissibility(False, f"{_KC_FAIL}: power-law kernel diverges at coincidence")

    def describe(self):
        return f"PowerLaw(xi={_fmt(self.xi)},p={_fmt(self.p)})"


@dataclass(frozen=True)
class WhiteNoise(CovKernel):
    """Delta-correlated noise; only defined as a distribution."""

    def matrix(self, X, Y=None):
        raise NonPointwiseKernel("white noise has no pointwise covariance")

    def admissibility(self):
        return Admissibility(False, f"{_KC_FAIL}: white noise is delta-correlated")

    def describe(self):
        return "WhiteNoise()"


FACTOR_KINDS = ("gaussian", "exponential", "constant")


@dataclass(frozen=True)
class SeparableFactor:
    """One-dimensional stationary factor ``f(u - v)`` with ``f(0) = 1``."""

    kind: str = "gaussian"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in FACTOR_KINDS:
            raise InvalidArgument(f"factor kind must be one of {FACTOR_KINDS}")
        if self.kind != "constant":
            _positive(self, "scale")

    @property
    def smooth(self) -> bool:
        return self.kind != "exponential"

    def value(self, d):
        d = np.asarray(d, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-(d / self.scale) ** 2)
        if self.kind == "exponential":
            return np.exp(-np.abs(d) / self.scale)
        return np.ones_like(d)

    def d1(self, d):
        d = np.asarray(d, dtype=float)
        if self.kind == "gaussian":
            return -2 * d / self.scale**2 * self.value(d)
        if self.kind == "exponential":
            if np.any(d == 0):
                raise NonDifferentiableKernel("exponential factor has a kink at coincidence")
            return -np.sign(d) / self.scale * self.value(d)
        return np.zeros_like(d)

    def d2(self, d):
        d = np.asarray(d, dtype=float)
        if self.kind == "gaussian":
            e2 = self.scale**2
            return (4 * d * d / e2**2 - 2 / e2) * self.value(d)
        if self.kind == "exponential":
            if np.any(d == 0):
                raise NonDifferentiableKernel("exponential factor has a kink at coincidence")
            return self.value(d) / self.scale**2
        return np.zeros_like(d)

    def describe(self):
        return f"{self.kind}({_fmt(self.scale)})"


FRAME_COORDS = {
    "spherical": ("r", "theta", "phi"),
    "cylindrical": ("r", "phi", "z"),
    "polar": ("r", "theta"),
}


@dataclass(frozen=True)
class Separable(CovKernel):
    """Product kernel ``lam * prod_k f_k(u_k - v_k)`` over chart coordinates.

    Parameters
    ----------
    frame : {"spherical", "cylindrical", "polar"}
    factors : tuple of SeparableFactor
        One factor per chart coordinate, in the frame's coordinate order.
    lam : float
        Amplitude; the kernel equals ``lam`` at coincident points.
    """

    frame: str = "spherical"
    factors: tuple = (SeparableFactor(), SeparableFactor(), SeparableFactor())
    lam: float = 1.0

    def __post_init__(self):
        if self.frame not in FRAME_COORDS:
            raise InvalidArgument(f"frame must be one of {tuple(FRAME_COORDS)}")
        if len(self.factors) != len(FRAME_COORDS[self.frame]):
            raise InvalidArgument(f"{self.frame} frame needs {len(FRAME_COORDS[self.frame])} factors")
        _positive(self, "lam")
        object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def differentiable(self) -> bool:
        return all(f.smooth for f in self.factors)

    @property
    def variance(self) -> float:
        return self.lam

    def chart(self, X) -> np.ndarray:
        return FRAMES[self.frame][0](X)

    def matrix_chart(self, U, V) -> np.ndarray:
        U = np.atleast_2d(U)
        V = np.atleast_2d(V)
        out = np.full((U.shape[0], V.shape[0]), self.lam)
        for k, f in enumerate(self.factors):
            out = out * f.value(U[:, k, None] - V[None, :, k])
        return out

    def matrix(self, X, Y=None):
        Y = X if Y is None else Y
        return self.matrix_chart(self.chart(X), self.chart(Y))

    def admissibility(self):
        bad = [f.describe() for f in self.factors if not f.smooth]
        if bad:
            return Admissibility(False, f"{_KC_FAIL} for a smooth separable field: "
                                        f"non-smooth factor(s) {', '.join(bad)}")
        return Admissibility(True, f"{_KC_OK}: every factor is smooth and bounded")

    def describe(self):
        fs = ";".join(f.describe() for f in self.factors)
        return f"Separable(frame={self.frame},factors=[{fs}],lam={_fmt(self.lam)})"


def kernel_eval(kernel: CovKernel, x, y) -> float:
    """Covariance between the field at ``x`` and at ``y``.

    Examples
    --------
    >>> kernel_eval(Exponential(alpha=2.0, xi=1.0), [0.0, 0.0], [1.0, 0.0])  # doctest: +ELLIPSIS
    0.7357...
    """
    return kernel(np.ravel(x), np.ravel(y))


def kc_admissible(kernel: CovKernel) -> Admissibility:
    """Whether a continuous modification of the field exists, with a reason."""
    return kernel.admissibility()


def _require_admissible(kernel: CovKernel):
    verdict = kc_admissible(kernel)
    if not verdict.admissible:
        raise InadmissibleKernel(verdict.reason)


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


_CACHE: "OrderedDict[tuple, tuple[np.ndarray, float]]" = OrderedDict()
_CACHE_LOCK = threading.Lock()
_CACHE_SIZE = 16


def _points_of(grid_or_points) -> np.ndarray:
    if isinstance(grid_or_points, DomainGrid):
        return grid_or_points.points
    return np.atleast_2d(np.asarray(grid_or_points, dtype=float))


def covariance_matrix(kernel: CovKernel, points) -> np.ndarray:
    pts = _points_of(points)
    return kernel.matrix(pts, pts)


def jittered_cholesky(C: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky factor of ``C + eps * mean(diag C) * I`` with escalating ``eps``.

    ``eps`` runs from ``1e-10`` to ``1e-6`` in factors of ten.  Returns the
    read-only factor and the absolute shift used.
    """
    C = np.asarray(C, dtype=float)
    m = C.shape[0]
    scale = float(np.mean(np.diag(C)))
    jit = JITTER_START
    while jit <= JITTER_STOP * (1 + 1e-9):
        try:
            L = scipy.linalg.cholesky(C + jit * scale * np.eye(m), lower=True,
                                      check_finite=False)
            if np.all(np.isfinite(L)):
                break
        except np.linalg.LinAlgError:
            pass
        jit *= 10
    else:
        raise FactorizationFailure(
            f"covariance matrix is not positive definite even with jitter {JITTER_STOP:g}*alpha")
    L.setflags(write=False)
    return L, jit * scale


def factorize(kernel: CovKernel, points, max_points: int = MAX_POINTS):
    """Lower Cholesky factor of the jittered covariance matrix.

    The jitter starts at ``1e-10`` times the mean variance and grows tenfold up
    to ``1e-6`` times it.  Factors are cached per (kernel, point set).

    Returns
    -------
    L : ndarray, shape (m, m)
    jitter : float
        The absolute diagonal shift that succeeded.
    """
    _require_admissible(kernel)
    pts = _points_of(points)
    m = pts.shape[0]
    if m > max_points:
        raise ResourceLimit(f"{m} points exceed the dense factorization cap of {max_points}")
    import hashlib

    key = (kernel.describe(), hashlib.sha1(np.ascontiguousarray(pts).tobytes()).hexdigest())
    with _CACHE_LOCK:
        if key in _CACHE:
            _CACHE.move_to_end(key)
            return _CACHE[key]
    C = kernel.matrix(pts, pts)
    L, shift = jittered_cholesky(C)
    result = (L, shift)
    with _CACHE_LOCK:
        _CACHE[key] = result
        while len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    return result


class FieldSampler:
    """Exact Gaussian sampler on a fixed point set.

    Parameters
    ----------
    kernel : CovKernel
        Must pass :func:`kc_admissible`.
    points : DomainGrid or array_like, shape (m, d)
    max_points : int
        Dense factorization cap.
    """

    def __init__(self, kernel: CovKernel, points, max_points: int = MAX_POINTS):
        self.kernel = kernel
        self.points = _points_of(points)
        self.L, self.jitter = factorize(kernel, self.points, max_points)

    @classmethod
    def from_covariance(cls, C, points=None, kernel: CovKernel | None = None,
                        max_points: int = MAX_POINTS) -> "FieldSampler":
        """Sampler for an explicit covariance matrix (e.g. derivative blocks)."""
        C = np.asarray(C, dtype=float)
        if C.shape[0] > max_points:
            raise ResourceLimit(f"{C.shape[0]} variables exceed the dense factorization cap of {max_points}")
        obj = cls.__new__(cls)
        obj.kernel = kernel
        obj.points = np.zeros((C.shape[0], 0)) if points is None else _points_of(points)
        obj.L, obj.jitter = jittered_cholesky(C)
        return obj

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def normals(self, seed: int, start: int, stop: int) -> np.ndarray:
        return mc.standard_normals(seed, start, stop, self.size)

    def draw(self, seed: int, start: int = 0, stop: int = 1) -> np.ndarray:
        """Field values for samples ``start..stop-1``, shape (stop-start, m)."""
        return self.normals(seed, start, stop) @ self.L.T

    def project(self, A) -> np.ndarray:
        """Matrix ``L.T @ A`` so that ``normals @ M == draw @ A``."""
        return self.L.T @ np.asarray(A, dtype=float)

    def linear_stats(self, seed: int, n_samples: int, A, workers: int | None = None,
                     chunk: int = mc.DEFAULT_CHUNK) -> np.ndarray:
        """Per-sample values of the linear functionals ``field @ A``.

        ``A`` has shape (m,) or (m, k); the result has shape (n,) or (n, k).
        """
        A = np.asarray(A, dtype=float)
        M = self.project(A)

        def work(lo, hi):
            return self.normals(seed, lo, hi) @ M

        return mc.ordered_map(work, n_samples, chunk, workers)

    def quadratic_stats(self, seed: int, n_samples: int, M, b=None, c: float = 0.0,
                        workers: int | None = None, chunk: int = mc.DEFAULT_CHUNK) -> np.ndarray:
        """Per-sample values of ``F @ M @ F + b @ F + c`` for field draws ``F``.

        With ``F = L z`` the form is ``z' (L' M L) z + (L' b) z + c``.  The
        symmetric middle matrix is diagonalized once, ``L' M L = V diag(mu) V'``,
        and each sample draws ``y = V' z`` directly (it is again standard
        normal), so a sample costs O(m) instead of O(m^2).
        """
        M = np.asarray(M, dtype=float)
        S = self.L.T @ (0.5 * (M + M.T)) @ self.L
        mu, V = np.linalg.eigh(0.5 * (S + S.T))
        lin = np.zeros(self.size) if b is None else V.T @ (self.L.T @ np.asarray(b, dtype=float))

        def work(lo, hi):
            y = self.normals(seed, lo, hi)
            return (y * y) @ mu + y @ lin + c

        return mc.ordered_map(work, n_samples, chunk, workers)

    def map(self, seed: int, n_samples: int, fn: Callable[[np.ndarray], np.ndarray],
            workers: int | None = None, chunk: int = mc.DEFAULT_CHUNK) -> np.ndarray:
        """Apply ``fn`` to blocks of full field draws and concatenate."""

        def work(lo, hi):
            return np.asarray(fn(self.draw(seed, lo, hi)))

        return mc.ordered_map(work, n_samples, chunk, workers)


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One realization of a field on a point set."""

    points: np.ndarray
    values: np.ndarray
    seed: int
    kernel: CovKernel
    index: int = 0
    grid: DomainGrid | None = field(default=None, repr=False)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed}; index={self.index}; kernel={self.kernel.describe()}\n")
        d = self.points.shape[1]
        buf.write(",".join([f"x{i}" for i in range(d)] + ["value"]) + "\n")
        for p, v in zip(self.points, self.values):
            buf.write(",".join(_fmt(t) for t in (*p, v)) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    def scaled(self, lam: float) -> "FieldSample":
        return FieldSample(self.points, lam * self.values, self.seed, self.kernel,
                           self.index, self.grid)


def sample_field(kernel: CovKernel, grid, seed: int, index: int = 0,
                 max_points: int = MAX_POINTS) -> FieldSample:
    """Draw sample ``index`` of the stream ``seed`` on a grid or point set.

    Raises
    ------
    InadmissibleKernel
        If the kernel fails the continuity test.
    FactorizationFailure, ResourceLimit
    """
    sampler = FieldSampler(kernel, grid, max_points)
    values = sampler.draw(seed, index, index + 1)[0]
    return FieldSample(sampler.points, values, int(seed), kernel, int(index),
                       grid if isinstance(grid, DomainGrid) else None)


def stochastic_integral(sample: FieldSample, grid: DomainGrid) -> float:
    """Riemann sum ``sum_q F(x_q) w_q`` of a sampled field over its grid."""
    if sample.points.shape != grid.points.shape or not np.array_equal(sample.points, grid.points):
        raise InvalidPairing("sample was not drawn on this grid")
    return float(sample.values @ grid.weights)


def integral_covariance_closed(kernel: CovKernel, gridA: DomainGrid,
                               gridB: DomainGrid | None = None) -> float:
    """Double quadrature ``sum_pq K(x_p, y_q) w_p w_q``."""
    _require_admissible(kernel)
    gridB = gridA if gridB is None else gridB
    return float(gridA.weights @ kernel.matrix(gridA.points, gridB.points) @ gridB.weights)


def superpose(fields: Sequence[FieldSample], coeffs: Sequence[float]) -> FieldSample:
    """Pointwise linear combination of independent samples on one grid."""
    if len(fields) != len(coeffs) or not fields:
        raise InvalidArgument("need one coefficient per field")
    base = fields[0]
    for f in fields[1:]:
        if f.points.shape != base.points.shape or not np.array_equal(f.points, base.points):
            raise InvalidPairing("superposed fields must share their points")
    values = sum(c * f.values for c, f in zip(coeffs, fields))
    return FieldSample(base.points, values, base.seed, base.kernel, base.index, base.grid)


def predicted_variance(coeffs: Sequence[float], variances: Sequence[float]) -> float:
    """Coincident variance of a superposition of independent fields."""
    if len(coeffs) != len(variances):
        raise InvalidArgument("need one variance per coefficient")
    return float(sum(c * c * v for c, v in zip(coeffs, variances)))


def complex_pair_covariances(alpha_A: float, beta_B: float) -> dict:
    """Covariances of ``Z = X + iY`` built from independent real fields.

    ``alpha_A`` and ``beta_B`` are the covariances of X and Y at the chosen
    pair of points.  Returns ``{"zz": E[Z Z], "zzbar": E[Z conj(Z)]}``.
    """
    return {"zz": alpha_A - beta_B, "zzbar": alpha_A + beta_B}


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------


def _check_order(Q) -> int:
    if int(Q) != Q or Q < 0:
        raise InvalidArgument(f"moment order must be a non-negative integer, got {Q}")
    return int(Q)


def paper_moment(alpha: float, Q: int) -> float:
    """Even-moment rule ``(alpha**(Q/2) + (-1)**Q * alpha**(Q/2)) / 2``.

    This is ``alpha**(Q/2)`` for even Q and 0 for odd Q; it omits the
    ``(Q-1)!!`` factor of true Gaussian moments.
    """
    Q = _check_order(Q)
    if alpha < 0:
        raise InvalidArgument(f"variance must be non-negative, got {alpha}")
    a = alpha ** (Q / 2)
    return 0.5 * (a + (-1) ** Q * a)


def gaussian_moment(alpha: float, Q: int) -> float:
    """Moment ``E[X**Q]`` of a centred Gaussian with variance ``alpha``."""
    Q = _check_order(Q)
    if alpha < 0:
        raise InvalidArgument(f"variance must be non-negative, got {alpha}")
    if Q % 2:
        return 0.0
    return float(math.prod(range(Q - 1, 0, -2))) * alpha ** (Q // 2)


MOMENT_RULES = {"paper": paper_moment, "gaussian": gaussian_moment}


# --------------------------------------------------------------------------
# derivative covariances
# --------------------------------------------------------------------------


def gaussian_derivative_covariance(kernel: GaussianCorr, x, y, a, b) -> float:
    """``Cov(d^a F(x), d^b F(y))`` for the squared-exponential kernel.

    ``a`` and ``b`` are multi-indices (one derivative order per axis).  Uses
    ``d^m/dh^m exp(-h^2/xi^2) = (-1/xi)^m H_m(h/xi) exp(-h^2/xi^2)`` with
    physicists' Hermite polynomials ``H_m``.
    """
    if not isinstance(kernel, GaussianCorr) or kernel.metric != "euclidean":
        raise NonDifferentiableKernel("closed-form derivative covariances need a Euclidean GaussianCorr kernel")
    x = np.ravel(np.asarray(x, dtype=float))
    y = np.ravel(np.asarray(y, dtype=float))
    a = np.asarray(a, dtype=int)
    b = np.asarray(b, dtype=int)
    if not (x.shape == y.shape == a.shape == b.shape):
        raise InvalidArgument("points and multi-indices must share a dimension")
    xi = kernel.xi
    u = (x - y) / xi
    out = kernel.alpha * (-1.0) ** int(b.sum())
    for ui, m in zip(u, a + b):
        out *= (-1.0 / xi) ** int(m) * eval_hermite(int(m), ui) * math.exp(-ui * ui)
    return float(out)


def gaussian_derivative_matrix(kernel: GaussianCorr, X, Y, a, b) -> np.ndarray:
    """Matrix of ``Cov(d^a F(X_p), d^b F(Y_q))``; vectorized form of
    :func:`gaussian_derivative_covariance`."""
    if not isinstance(kernel, GaussianCorr) or kernel.metric != "euclidean":
        raise NonDifferentiableKernel("closed-form derivative covariances need a Euclidean GaussianCorr kernel")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    a = np.asarray(a, dtype=int)
    b = np.asarray(b, dtype=int)
    xi = kernel.xi
    out = np.full((X.shape[0], Y.shape[0]), kernel.alpha * (-1.0) ** int(b.sum()))
    for k, m in enumerate(a + b):
        u = (X[:, None, k] - Y[None, :, k]) / xi
        out *= (-1.0 / xi) ** int(m) * eval_hermite(int(m), u) * np.exp(-u * u)
    return out


def _unit(n, *axes):
    v = np.zeros(n, dtype=int)
    for ax in axes:
        v[ax] += 1
    return v


@dataclass(frozen=True)
class NoiseConstants:
    """Coincident derivative variances of a field.

    Attributes
    ----------
    alpha : float
        ``E[F^2]``.
    beta : float
        ``E[|grad F|^2]``, the total over all components.
    Theta : float
        Per-component variance of ``grad (Laplacian F)``.
    Xi : float
        ``sum_ij E[(d_i d_j F)^2] / n``.
    lam : float
        Amplitude multiplying the field.
    n : int
    """

    alpha: float
    beta: float | None = None
    Theta: float | None = None
    Xi: float | None = None
    lam: float = 1.0
    n: int = 3

    def __post_init__(self):
        for name in ("alpha", "beta", "Theta", "Xi", "lam"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise InvalidArgument(f"{name} must be non-negative")

    def require(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise MissingConstant(f"noise constant {name} is neither derivable nor supplied")
        return v

    @property
    def grad_component_variance(self) -> float:
        return self.require("beta") / self.n

    @classmethod
    def from_kernel(cls, kernel: CovKernel, n: int = 3, lam: float = 1.0,
                    **supplied) -> "NoiseConstants":
        """Derive the constants analytically for GaussianCorr kernels.

        Other kernels only provide ``alpha``; the remaining constants must be
        passed in ``supplied``.
        """
        if isinstance(kernel, GaussianCorr) and kernel.metric == "euclidean":
            z = np.zeros(n)

            def cov(a, b):
                return gaussian_derivative_covariance(kernel, z, z, a, b)

            beta = sum(cov(_unit(n, i), _unit(n, i)) for i in range(n))
            Xi = sum(cov(_unit(n, i, j), _unit(n, i, j)) for i in range(n) for j in range(n)) / n
            Theta = sum(cov(_unit(n, 0, k, k), _unit(n, 0, l, l)) for k in range(n) for l in range(n))
            vals = dict(beta=beta, Theta=Theta, Xi=Xi)
            vals.update(supplied)
            return cls(kernel.alpha, lam=lam, n=n, **vals)
        return cls(kernel.variance, lam=lam, n=n, **supplied)


SELECTORS = {
    "spherical": ("id", "r", "theta", "phi"),
    "cylindrical": ("id", "r", "phi", "z"),
    "polar": ("id", "r", "theta"),
}


@dataclass(frozen=True)
class DerivCovSpec:
    """Frame and first-derivative selectors for a separable covariance.

    Selectors are ``"id"`` or a chart coordinate name; angular selectors carry
    the orthonormal metric factors (``1/r`` and ``1/(r sin theta)``).
    """

    frame: str = "spherical"
    left: str = "id"
    right: str = "id"

    def __post_init__(self):
        if self.frame not in SELECTORS:
            raise InvalidArgument(f"frame must be one of {tuple(SELECTORS)}")
        for s in (self.left, self.right):
            if s not in SELECTORS[self.frame]:
                raise InvalidArgument(f"selector {s!r} is not valid in the {self.frame} frame")


def _metric_factor(frame: str, sel: str, u: np.ndarray) -> float:
    if sel in ("id", "r", "z"):
        return 1.0
    r = u[0]
    if r == 0:
        raise ChartSingularity(f"{sel} derivative is singular at r = 0")
    if frame == "spherical" and sel == "phi":
        s = math.sin(u[1])
        if abs(s) < 1e-14:
            raise ChartSingularity("azimuthal derivative is singular on the polar axis")
        return 1.0 / (r * s)
    return 1.0 / r


def separable_derivative_covariance(kernel: Separable, spec: DerivCovSpec, x, y,
                                    coords: str = "cartesian") -> float:
    """Analytic covariance of frame derivatives of a separable field.

    Parameters
    ----------
    kernel : Separable
    spec : DerivCovSpec
        Must use the kernel's frame.
    x, y : array_like
        Left and right points, Cartesian unless ``coords="chart"``.

    Returns
    -------
    float
        ``Cov(D_left F(x), D_right F(y))``.  At coincidence with identity
        selectors this is ``lam``.
    """
    if spec.frame != kernel.frame:
        raise InvalidArgument("derivative spec and kernel use different frames")
    if coords == "chart":
        u = np.ravel(np.asarray(x, dtype=float))
        v = np.ravel(np.asarray(y, dtype=float))
    else:
        u = kernel.chart(np.atleast_2d(x))[0]
        v = kernel.chart(np.atleast_2d(y))[0]
    names = FRAME_COORDS[kernel.frame]
    fl = _metric_factor(kernel.frame, spec.left, u)
    fr = _metric_factor(kernel.frame, spec.right, v)
    li = names.index(spec.left) if spec.left != "id" else None
    ri = names.index(spec.right) if spec.right != "id" else None
    out = kernel.lam * fl * fr
    for k, f in enumerate(kernel.factors):
        d = u[k] - v[k]
        if k == li and k == ri:
            out *= -float(f.d2(d))
        elif k == li:
            out *= float(f.d1(d))
        elif k == ri:
            out *= -float(f.d1(d))
        else:
            out *= float(f.value(d))
    return float(out)


def paper_coincident_value(kernel: Separable) -> float:
    """Coincident derivative covariance as asserted in the source (``lam``)."""
    return kernel.lam
