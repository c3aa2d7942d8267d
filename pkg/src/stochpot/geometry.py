"""Domains, quadrature grids, curves and curvilinear coordinate conversions.

All coordinates are stored in Cartesian form.  Volume grids come in two
flavours:

``rule="midpoint"``
    Tensor-product midpoint cells over the bounding box, clipped to the domain.
    Cells cut by the boundary get a weight equal to the cell volume times the
    fraction of subsample points that fall inside, and their node is moved to
    the centroid of those inside subsamples.
``rule="gauss"``
    Product Gauss rules in spherical or polar coordinates (balls, discs,
    shells only).  These integrate smooth functions to near machine precision
    and are used wherever a test tolerance is tighter than a midpoint rule can
    reach.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from .exceptions import InvalidArgument, InvalidCurve, UnsupportedGeometry

MEASURE_KINDS = ("volume", "surface", "curve")
RULES = ("midpoint", "gauss")
# columns per transverse axis used to measure the inside fraction of cut cells
_CUT_SUBSAMPLES = {2: 32, 3: 16}


def _fmt(v: float) -> str:
    return repr(float(v))


def _as_center(center, n: int) -> tuple[float, ...]:
    if center is None:
        return (0.0,) * n
    c = tuple(float(v) for v in np.ravel(center))
    if len(c) != n:
        raise InvalidArgument(f"center must have {n} coordinates, got {len(c)}")
    return c


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidArgument(f"{name} must be positive and finite, got {value}")
    return value


def ball_volume(n: int, R: float = 1.0) -> float:
    """Volume of the n-ball of radius R, ``pi^(n/2) R^n / Gamma(n/2 + 1)``.

    Examples
    --------
    >>> round(ball_volume(3, 1.0), 5)
    4.18879
    """
    if int(n) != n or n < 1:
        raise InvalidArgument(f"dimension must be a positive integer, got {n}")
    R = _check_positive("R", R)
    return math.pi ** (n / 2) * R**n / math.gamma(n / 2 + 1)


def sphere_area(n: int, R: float = 1.0) -> float:
    """Measure of the (n-1)-sphere bounding the n-ball of radius R."""
    return n * ball_volume(n, R) / R


def shell_volume_ratio(n: int, R: float = 1.0) -> float:
    """Ratio ``|B_2R minus B_R| / |B_R|``, which equals ``2**n - 1`` for any R."""
    if int(n) != n or n < 1:
        raise InvalidArgument(f"dimension must be a positive integer, got {n}")
    _check_positive("R", R)
    return float(2**int(n) - 1)


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------


class _Round:
    """Shared behaviour for balls and discs."""

    n: int
    R: float
    center: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.n

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def signed_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.linalg.norm(pts - self.c, axis=1) - self.R

    def contains(self, pts) -> np.ndarray:
        return self.signed_distance(pts) < 0

    def distance_to_boundary(self, pts) -> np.ndarray:
        return -self.signed_distance(pts)

    def project(self, pts) -> np.ndarray:
        """Radial projection onto the bounding sphere."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - self.c
        r = np.linalg.norm(d, axis=1, keepdims=True)
        r = np.where(r == 0, 1.0, r)
        return self.c + self.R * d / r

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.c - self.R, self.c + self.R

    def volume(self) -> float:
        return ball_volume(self.n, self.R)

    def boundary_measure(self) -> float:
        return sphere_area(self.n, self.R)


@dataclass(frozen=True)
class Ball(_Round):
    """Open ball ``{x : |x - center| < R}`` in ``n`` dimensions."""

    n: int = 3
    R: float = 1.0
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"dimension must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "R", _check_positive("R", self.R))
        object.__setattr__(self, "center", _as_center(self.center, self.n))

    def describe(self) -> str:
        return f"Ball(n={self.n},R={_fmt(self.R)},center={self.center})"


@dataclass(frozen=True)
class Disc(_Round):
    """Open disc of radius R in the plane."""

    R: float = 1.0
    center: tuple[float, ...] | None = None
    n: ClassVar[int] = 2

    def __post_init__(self):
        object.__setattr__(self, "R", _check_positive("R", self.R))
        object.__setattr__(self, "center", _as_center(self.center, 2))

    def describe(self) -> str:
        return f"Disc(R={_fmt(self.R)},center={self.center})"


@dataclass(frozen=True)
class Shell:
    """Annular shell ``R_inner < |x - center| < R_outer``."""

    n: int = 3
    R_inner: float = 1.0
    R_outer: float = 2.0
    center: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"dimension must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        ri = _check_positive("R_inner", self.R_inner)
        ro = _check_positive("R_outer", self.R_outer)
        if not ri < ro:
            raise InvalidArgument("Shell requires 0 < R_inner < R_outer")
        object.__setattr__(self, "R_inner", ri)
        object.__setattr__(self, "R_outer", ro)
        object.__setattr__(self, "center", _as_center(self.center, self.n))

    @property
    def dim(self) -> int:
        return self.n

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def signed_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.linalg.norm(pts - self.c, axis=1)
        return np.maximum(r - self.R_outer, self.R_inner - r)

    def contains(self, pts) -> np.ndarray:
        return self.signed_distance(pts) < 0

    def bbox(self):
        return self.c - self.R_outer, self.c + self.R_outer

    def volume(self) -> float:
        return ball_volume(self.n, self.R_outer) - ball_volume(self.n, self.R_inner)

    def boundary_measure(self) -> float:
        return sphere_area(self.n, self.R_outer) + sphere_area(self.n, self.R_inner)

    def describe(self) -> str:
        return (f"Shell(n={self.n},R_inner={_fmt(self.R_inner)},"
                f"R_outer={_fmt(self.R_outer)},center={self.center})")


@dataclass(frozen=True)
class Cylinder:
    """Solid circular cylinder of radius R along the z axis, ``0 <= z <= L``."""

    R: float = 1.0
    L: float = 1.0
    n: ClassVar[int] = 3

    def __post_init__(self):
        object.__setattr__(self, "R", _check_positive("R", self.R))
        object.__setattr__(self, "L", _check_positive("L", self.L))

    @property
    def dim(self) -> int:
        return 3

    def signed_distance(self, pts) -> np.ndarray:
        # max of two exact distances: exact inside, a lower bound outside
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        rho = np.hypot(pts[:, 0], pts[:, 1])
        return np.maximum(rho - self.R, np.abs(pts[:, 2] - self.L / 2) - self.L / 2)

    def contains(self, pts) -> np.ndarray:
        return self.signed_distance(pts) < 0

    def bbox(self):
        return np.array([-self.R, -self.R, 0.0]), np.array([self.R, self.R, self.L])

    def volume(self) -> float:
        return math.pi * self.R**2 * self.L

    def boundary_measure(self) -> float:
        return 2 * math.pi * self.R * self.L + 2 * math.pi * self.R**2

    def describe(self) -> str:
        return f"Cylinder(R={_fmt(self.R)},L={_fmt(self.L)})"


Domain = Ball | Disc | Shell | Cylinder


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DomainGrid:
    """Quadrature nodes and positive weights for a domain or its boundary.

    Attributes
    ----------
    points : ndarray, shape (m, d)
        Cartesian node coordinates.
    weights : ndarray, shape (m,)
        Positive weights in units of length**k (k = d, d-1 or 1).
    measure_kind : {"volume", "surface", "curve"}
    domain : Domain
    resolution : int
    rule : {"midpoint", "gauss"}
    exact_measure : float
        Exact measure of the discretized set.
    cell_size : float or None
        Edge length of the midpoint cells; None for other rules.
    """

    points: np.ndarray
    weights: np.ndarray
    measure_kind: str
    domain: object
    resolution: int
    rule: str
    exact_measure: float
    cell_size: float | None = None
    _key: str = field(default="", repr=False)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        w = np.ascontiguousarray(self.weights, dtype=float)
        pts.setflags(write=False)
        w.setflags(write=False)
        if pts.shape[0] != w.shape[0]:
            raise InvalidArgument("points and weights must have the same length")
        if np.any(w <= 0):
            raise InvalidArgument("grid weights must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def measure_error(self) -> float:
        """Absolute gap between the weight sum and the exact measure."""
        return abs(self.total_weight - self.exact_measure)

    @property
    def relative_measure_error(self) -> float:
        return self.measure_error / self.exact_measure

    def integrate(self, values) -> float:
        """Weighted sum of nodal values (last axis is the node axis)."""
        return np.asarray(values, dtype=float) @ self.weights

    def fingerprint(self) -> str:
        """Content hash, used as a cache key for covariance factorizations."""
        if not self._key:
            import hashlib

            h = hashlib.sha1(self.points.tobytes())
            h.update(self.weights.tobytes())
            object.__setattr__(self, "_key", h.hexdigest())
        return self._key

    def header(self) -> str:
        return (f"# domain={self.domain.describe()}; measure={self.measure_kind}; "
                f"resolution={self.resolution}; rule={self.rule}; "
                f"exact_measure={_fmt(self.exact_measure)}")

    def to_csv(self, path=None) -> str:
        """Write one row per node ``(x0, ..., weight)`` after a header comment."""
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        cols = [f"x{i}" for i in range(self.dim)] + ["weight"]
        buf.write(",".join(cols) + "\n")
        for p, w in zip(self.points, self.weights):
            buf.write(",".join(_fmt(v) for v in (*p, w)) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text


def _unit_directions_3d(n_theta: int, n_phi: int, rule: str):
    """Directions and solid-angle weights on the unit sphere."""
    if rule == "gauss":
        mu, wmu = np.polynomial.legendre.leggauss(n_theta)
        cos_t = mu[::-1]
        band = wmu[::-1]
    else:
        edges = np.linspace(0.0, math.pi, n_theta + 1)
        t_mid = 0.5 * (edges[:-1] + edges[1:])
        cos_t = np.cos(t_mid)
        # exact band areas: integral of sin(theta) over each band
        band = np.cos(edges[:-1]) - np.cos(edges[1:])
    phi = (np.arange(n_phi) + 0.5) * (2 * math.pi / n_phi)
    sin_t = np.sqrt(np.clip(1 - cos_t**2, 0, None))
    dirs = np.stack([
        np.outer(sin_t, np.cos(phi)),
        np.outer(sin_t, np.sin(phi)),
        np.outer(cos_t, np.ones_like(phi)),
    ], axis=-1).reshape(-1, 3)
    w = np.outer(band, np.full(n_phi, 2 * math.pi / n_phi)).ravel()
    return dirs, w


def _unit_directions_2d(m: int):
    beta = np.arange(m) * (2 * math.pi / m)
    return np.stack([np.cos(beta), np.sin(beta)], axis=1), np.full(m, 2 * math.pi / m)


def circle_grid(R: float = 1.0, m: int = 256, center=None) -> DomainGrid:
    """Uniform angular nodes on a circle, starting at angle 0."""
    dirs, w = _unit_directions_2d(int(m))
    c = np.asarray(_as_center(center, 2))
    disc = Disc(R, tuple(c))
    return DomainGrid(c + R * dirs, R * w, "curve", disc, int(m), "midpoint",
                      2 * math.pi * R)


def sphere_grid(R: float = 1.0, n_theta: int = 32, n_phi: int | None = None,
                center=None, rule: str = "midpoint") -> DomainGrid:
    """Latitude-longitude nodes on a 2-sphere.

    With ``rule="midpoint"`` the band weights are the exact band areas, so the
    weights sum to ``4 pi R^2`` to rounding.
    """
    n_phi = 2 * n_theta if n_phi is None else n_phi
    dirs, w = _unit_directions_3d(n_theta, n_phi, rule)
    c = np.asarray(_as_center(center, 3))
    return DomainGrid(c + R * dirs, R**2 * w, "surface", Ball(3, R, tuple(c)),
                      n_theta, rule, 4 * math.pi * R**2)


def _radial_gauss(r0: float, r1: float, n_r: int, power: int):
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (r1 - r0) * x + 0.5 * (r1 + r0)
    return r, 0.5 * (r1 - r0) * w * r**power


def _gauss_round_volume(n: int, r0: float, r1: float, center, res: int):
    r, wr = _radial_gauss(r0, r1, res, n - 1)
    if n == 3:
        dirs, wd = _unit_directions_3d(res, 2 * res, "gauss")
    elif n == 2:
        dirs, wd = _unit_directions_2d(2 * res)
    else:
        raise UnsupportedGeometry(f"gauss volume rule needs n in (2, 3), got {n}")
    pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, n) + np.asarray(center)
    w = np.outer(wr, wd).ravel()
    return pts, w


def _column_intervals(domain, perp: np.ndarray):
    """Inside intervals of vertical columns through ``perp`` (last axis free).

    Returns two ``(lo, hi)`` pairs per column; empty intervals have lo >= hi.
    """
    m = perp.shape[0]
    empty = (np.full(m, np.inf), np.full(m, -np.inf))
    if isinstance(domain, Cylinder):
        inside = np.hypot(perp[:, 0], perp[:, 1]) < domain.R
        lo = np.where(inside, 0.0, np.inf)
        hi = np.where(inside, domain.L, -np.inf)
        return (lo, hi), empty
    c = domain.c
    rho2 = np.sum((perp - c[:-1]) ** 2, axis=1)

    def chord(R):
        half = np.sqrt(np.clip(R * R - rho2, 0.0, None))
        ok = rho2 < R * R
        return np.where(ok, c[-1] - half, np.inf), np.where(ok, c[-1] + half, -np.inf)

    if isinstance(domain, Shell):
        olo, ohi = chord(domain.R_outer)
        ilo, ihi = chord(domain.R_inner)
        hollow = np.isfinite(ilo)
        # outer chord minus inner chord: lower and upper pieces
        return (olo, np.where(hollow, ilo, ohi)), (np.where(hollow, ihi, np.inf),
                                                     np.where(hollow, ohi, -np.inf))
    return chord(domain.R), empty


def _int_sqrt(a, b, r):
    """Integral of sqrt(r^2 - y^2) over [a, b] clipped to [-r, r] (elementwise)."""
    a = np.clip(a, -r, r)
    b = np.clip(b, -r, r)

    def prim(y):
        rr = np.where(r > 0, r, 1.0)
        return 0.5 * (y * np.sqrt(np.clip(r * r - y * y, 0, None))
                      + r * r * np.arcsin(np.clip(y / rr, -1, 1)))

    return np.where(b > a, prim(b) - prim(a), 0.0)


def _overlap(a0, a1, b0, b1):
    return np.clip(np.minimum(a1, b1) - np.maximum(a0, b0), 0.0, None)


def _below_area(t, y0, y1, r):
    """Area of ``{y0 < y < y1, z < t}`` inside the centred disc of radius r."""
    t = np.clip(t, -r, r)
    w = np.sqrt(np.clip(r * r - t * t, 0, None))
    # |y| < w: column from -s(y) to t; |y| >= w (t >= 0 only): full chord
    inner = _overlap(y0, y1, -w, w) * t + _int_sqrt(np.maximum(y0, -w), np.minimum(y1, w), r)
    outer = 2 * (_int_sqrt(y0, np.minimum(y1, -w), r) + _int_sqrt(np.maximum(y0, w), y1, r))
    return inner + np.where(t >= 0, outer, 0.0)


def disc_rect_area(r, y0, y1, z0, z1):
    """Exact area of a centred disc of radius ``r`` intersected with a rectangle."""
    r = np.asarray(r, dtype=float)
    return np.clip(_below_area(z1, y0, y1, r) - _below_area(z0, y0, y1, r), 0.0, None)


def _slice_fraction(domain, cc: np.ndarray, h: float, s: int) -> np.ndarray:
    """Inside fraction of 3-D cut cells: midpoint in x, exact in (y, z)."""
    c = domain.c
    xs = cc[:, :1] + ((np.arange(s) + 0.5) / s - 0.5) * h - c[0]
    y0 = (cc[:, 1:2] - h / 2 - c[1]) + 0 * xs
    z0 = (cc[:, 2:3] - h / 2 - c[2]) + 0 * xs

    def area(R):
        r = np.sqrt(np.clip(R * R - xs * xs, 0, None))
        return disc_rect_area(r, y0, y0 + h, z0, z0 + h)

    if isinstance(domain, Shell):
        a = area(domain.R_outer) - area(domain.R_inner)
    else:
        a = area(domain.R)
    return np.clip(a.mean(axis=1) / (h * h), 0.0, 1.0)


def _cut_cells(domain, cc: np.ndarray, offs: np.ndarray, h: float):
    """Inside fraction and inside centroid of each cut cell."""
    d = cc.shape[1]
    k = offs.shape[0]
    perp = (cc[:, None, :-1] + offs[None, :, :]).reshape(-1, d - 1)
    a = np.repeat(cc[:, -1] - h / 2, k)
    b = a + h
    length = np.zeros(perp.shape[0])
    moment = np.zeros(perp.shape[0])
    for ilo, ihi in _column_intervals(domain, perp):
        l0 = np.maximum(ilo, a)
        l1 = np.minimum(ihi, b)
        seg = np.clip(l1 - l0, 0.0, None)
        length += seg
        mid = 0.5 * (np.clip(l0, a, b) + np.clip(l1, a, b))
        moment += seg * mid
    length = length.reshape(-1, k)
    moment = moment.reshape(-1, k)
    perp = perp.reshape(-1, k, d - 1)
    tot = length.sum(axis=1)
    keep = tot > 1e-14 * h * k
    tot_safe = np.where(keep, tot, 1.0)
    cen_perp = np.einsum("ck,ckj->cj", length, perp) / tot_safe[:, None]
    cen_last = moment.sum(axis=1) / tot_safe
    nodes = np.column_stack([cen_perp, cen_last])
    return nodes, np.where(keep, tot / (h * k), 0.0)


def _midpoint_volume(domain, res: int):
    lo, hi = domain.bbox()
    d = domain.dim
    h = float(np.max(hi - lo)) / res
    axes = [lo[i] + (np.arange(res) + 0.5) * h for i in range(d)]
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    half_diag = 0.5 * h * math.sqrt(d)
    sd = domain.signed_distance(centers)
    inside = sd <= -half_diag
    cut = np.flatnonzero(np.abs(sd) < half_diag)
    cell = h**d
    pts = [centers[inside]]
    wts = [np.full(int(inside.sum()), cell)]
    if cut.size:
        # exact inside length along the last axis for a stratified set of
        # columns across the other axes
        s = _CUT_SUBSAMPLES[d]
        offs_1d = ((np.arange(s) + 0.5) / s - 0.5) * h
        offs = np.stack(np.meshgrid(*([offs_1d] * (d - 1)), indexing="ij"),
                        axis=-1).reshape(-1, d - 1)
        block = max(1, 2_000_000 // offs.shape[0])
        for start in range(0, cut.size, block):
            cc = centers[cut[start:start + block]]
            nodes, frac = _cut_cells(domain, cc, offs, h)
            if d == 3 and isinstance(domain, (_Round, Shell)):
                # exact slice areas give a weight whose error decays smoothly
                exact = _slice_fraction(domain, cc, h, _CUT_SUBSAMPLES[3])
                frac = np.where(frac > 0, exact, 0.0)
            keep = frac > 0
            pts.append(nodes[keep])
            wts.append(cell * frac[keep])
    return np.concatenate(pts), np.concatenate(wts), h


def cell_subsamples(domain, node: np.ndarray, h: float, factor: int = 8):
    """Refine the midpoint cell around ``node`` into ``factor**d`` subcells.

    Returns the inside subcell centres and their weights.  Used for singular
    integrands whose kernel blows up near the node.
    """
    d = node.shape[0]
    offs_1d = (np.arange(factor) + 0.5) / factor - 0.5
    offs = np.stack(np.meshgrid(*([offs_1d] * d), indexing="ij"), axis=-1).reshape(-1, d) * h
    sub = node + offs
    mask = domain.contains(sub)
    return sub[mask], np.full(int(mask.sum()), (h / factor) ** d)


def build_grid(domain, measure_kind: str = "volume", resolution: int = 16,
               rule: str = "midpoint") -> DomainGrid:
    """Discretize a domain or its boundary.

    Parameters
    ----------
    domain : Ball, Disc, Shell or Cylinder
    measure_kind : {"volume", "surface", "curve"}
        ``"curve"`` is the boundary circle of a planar disc.  ``"surface"`` on
        a planar domain is accepted as a synonym.
    resolution : int
        Cells per axis for midpoint volume grids; polar bands for spheres;
        ``4 * resolution`` nodes on circles; nodes per radial and polar axis
        for Gauss rules.  Must be at least 8.
    rule : {"midpoint", "gauss"}

    Returns
    -------
    DomainGrid
    """
    if measure_kind not in MEASURE_KINDS:
        raise UnsupportedGeometry(f"unknown measure kind {measure_kind!r}")
    if rule not in RULES:
        raise UnsupportedGeometry(f"unknown quadrature rule {rule!r}")
    if int(resolution) != resolution or resolution < 8:
        raise InvalidArgument(f"resolution must be an integer >= 8, got {resolution}")
    res = int(resolution)
    dim = domain.dim

    if measure_kind == "volume":
        if dim not in (2, 3):
            raise UnsupportedGeometry("volume grids need dimension 2 or 3")
        if rule == "gauss":
            if isinstance(domain, _Round):
                pts, w = _gauss_round_volume(dim, 0.0, domain.R, domain.c, res)
            elif isinstance(domain, Shell):
                pts, w = _gauss_round_volume(dim, domain.R_inner, domain.R_outer,
                                             domain.c, res)
            else:
                raise UnsupportedGeometry(
                    f"gauss volume rule is not available for {type(domain).__name__}")
            return DomainGrid(pts, w, "volume", domain, res, rule, domain.volume())
        pts, w, h = _midpoint_volume(domain, res)
        return DomainGrid(pts, w, "volume", domain, res, rule, domain.volume(), h)

    # boundary measures
    if dim == 2 and isinstance(domain, _Round):
        g = circle_grid(domain.R, 4 * res, domain.center)
        return DomainGrid(g.points, g.weights, "curve", domain, res, "midpoint",
                          g.exact_measure)
    if measure_kind == "curve":
        raise UnsupportedGeometry("curve grids exist only for planar discs")
    if dim != 3:
        raise UnsupportedGeometry("surface grids need dimension 3")
    if isinstance(domain, _Round):
        g = sphere_grid(domain.R, res, center=domain.center, rule=rule)
        return DomainGrid(g.points, g.weights, "surface", domain, res, rule,
                          g.exact_measure)
    if isinstance(domain, Shell):
        go = sphere_grid(domain.R_outer, res, center=domain.center, rule=rule)
        gi = sphere_grid(domain.R_inner, res, center=domain.center, rule=rule)
        return DomainGrid(np.vstack([go.points, gi.points]),
                          np.concatenate([go.weights, gi.weights]), "surface",
                          domain, res, rule, domain.boundary_measure())
    if isinstance(domain, Cylinder):
        n_phi, n_z = 4 * res, res
        phi = (np.arange(n_phi) + 0.5) * (2 * math.pi / n_phi)
        z = (np.arange(n_z) + 0.5) * (domain.L / n_z)
        P, Z = np.meshgrid(phi, z, indexing="ij")
        lat = np.stack([domain.R * np.cos(P), domain.R * np.sin(P), Z], -1).reshape(-1, 3)
        w_lat = np.full(lat.shape[0], domain.R * (2 * math.pi / n_phi) * (domain.L / n_z))
        cap_xy, cap_w = _gauss_round_volume(2, 0.0, domain.R, (0.0, 0.0), res)
        caps = [np.column_stack([cap_xy, np.full(len(cap_w), zc)]) for zc in (0.0, domain.L)]
        return DomainGrid(np.vstack([lat, *caps]),
                          np.concatenate([w_lat, cap_w, cap_w]), "surface",
                          domain, res, rule, domain.boundary_measure())
    raise UnsupportedGeometry(f"no surface grid for {type(domain).__name__}")


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Curve:
    """Polyline path through ``points`` (shape (m + 1, d)).

    A closed curve repeats its first sample as the last one.
    """

    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise InvalidCurve("a curve needs at least two samples")
        if self.closed and not np.array_equal(pts[0], pts[-1]):
            raise InvalidCurve("closed curve must end at its first sample")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def A(self) -> np.ndarray:
        return self.points[0]

    @property
    def B(self) -> np.ndarray:
        return self.points[-1]

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.points[1:] + self.points[:-1])

    @property
    def increments(self) -> np.ndarray:
        """Tangent increments ``dx`` of each segment."""
        return np.diff(self.points, axis=0)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.increments, axis=1).sum())

    @classmethod
    def circle(cls, R: float = 1.0, center=None, m: int = 128, dim: int = 2,
               phase: float = 0.0) -> "Curve":
        """Closed counter-clockwise circle in the x-y plane."""
        t = phase + np.arange(m + 1) * (2 * math.pi / m)
        c = np.asarray(_as_center(center, dim))
        pts = np.tile(c, (m + 1, 1))
        pts[:, 0] += R * np.cos(t)
        pts[:, 1] += R * np.sin(t)
        pts[-1] = pts[0]
        return cls(pts, closed=True)

    @classmethod
    def segment(cls, A, B, m: int = 64) -> "Curve":
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        t = np.linspace(0.0, 1.0, m + 1)[:, None]
        return cls(A + t * (B - A), closed=False)


# --------------------------------------------------------------------------
# curvilinear frames
# --------------------------------------------------------------------------


def to_spherical(pts) -> np.ndarray:
    """Cartesian to ``(r, theta, phi)`` with theta the polar angle."""
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    r = np.linalg.norm(p, axis=1)
    theta = np.arccos(np.clip(np.divide(p[:, 2], r, out=np.ones_like(r), where=r > 0), -1, 1))
    phi = np.arctan2(p[:, 1], p[:, 0])
    return np.column_stack([r, theta, phi])


def from_spherical(coords) -> np.ndarray:
    c = np.atleast_2d(np.asarray(coords, dtype=float))
    r, t, f = c[:, 0], c[:, 1], c[:, 2]
    return np.column_stack([r * np.sin(t) * np.cos(f), r * np.sin(t) * np.sin(f), r * np.cos(t)])


def to_cylindrical(pts) -> np.ndarray:
    """Cartesian to ``(r, phi, z)``."""
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    return np.column_stack([np.hypot(p[:, 0], p[:, 1]), np.arctan2(p[:, 1], p[:, 0]), p[:, 2]])


def from_cylindrical(coords) -> np.ndarray:
    c = np.atleast_2d(np.asarray(coords, dtype=float))
    return np.column_stack([c[:, 0] * np.cos(c[:, 1]), c[:, 0] * np.sin(c[:, 1]), c[:, 2]])


def to_polar(pts) -> np.ndarray:
    """Cartesian to ``(r, theta)``."""
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    return np.column_stack([np.hypot(p[:, 0], p[:, 1]), np.arctan2(p[:, 1], p[:, 0])])


def from_polar(coords) -> np.ndarray:
    c = np.atleast_2d(np.asarray(coords, dtype=float))
    return np.column_stack([c[:, 0] * np.cos(c[:, 1]), c[:, 0] * np.sin(c[:, 1])])


FRAMES = {
    "spherical": (to_spherical, from_spherical),
    "cylindrical": (to_cylindrical, from_cylindrical),
    "polar": (to_polar, from_polar),
}
