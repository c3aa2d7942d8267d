"""Line integrals, Dirichlet energy, Cacciopolli and Bochner under noise.

Gradients and Hessians of sampled fields are central differences of scalar
field samples, so the Monte Carlo side only ever uses the kernel itself; the
analytic derivative constants are the oracle.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from .. import mc
from ..exceptions import InvalidArgument, InvalidCurve, NonDifferentiableKernel
from ..geometry import Ball, Curve, Shell, ball_volume, build_grid, shell_volume_ratio
from ..grf import CovKernel, FieldSampler, NoiseConstants
from ..harmonic import HarmonicFn, bochner_terms
from .report import PerturbedField, Report, check_row, exact_row, info_row, mc_row, note_row

DEFAULT_STEP = 0.02  # finite-difference step in units of the correlation length


def _step(kernel: CovKernel, h: float | None) -> float:
    if h is not None:
        return float(h)
    return DEFAULT_STEP * float(getattr(kernel, "xi", 1.0))


def _require_differentiable(kernel: CovKernel):
    if not getattr(kernel, "differentiable", False):
        raise NonDifferentiableKernel(f"{kernel.describe()} has no mean-square derivatives")


def gradient_stencil(X, h: float):
    """Stencil points ``x_p +- h e_i`` ordered (p, i, sign) and the weight
    tensor ``D`` (m, n, 2 m n) with ``grad_h F(x_p)_i = D[p, i] @ F``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    E = np.eye(n)
    pts = (X[:, None, None, :] + h * np.stack([E, -E], axis=1)[None]).reshape(-1, n)
    D = np.zeros((m, n, 2 * m * n))
    for p in range(m):
        for i in range(n):
            k = 2 * (p * n + i)
            D[p, i, k] = 0.5 / h
            D[p, i, k + 1] = -0.5 / h
    return pts, D


# --------------------------------------------------------------------------
# line integrals
# --------------------------------------------------------------------------


def _refined(curve: Curve, k: int) -> Curve:
    P = curve.points
    t = np.linspace(0.0, 1.0, k + 1)[:-1]
    fine = (P[:-1, None, :] + t[None, :, None] * (P[1:] - P[:-1])[:, None, :]).reshape(-1, P.shape[1])
    return Curve(np.vstack([fine, P[-1:]]), closed=curve.closed)


def loop_double_integral(kernel: CovKernel, c1: Curve, c2: Curve) -> float:
    """``sum_kl K(m_k, m'_l) dx_k . dx'_l`` over two polylines."""
    K = kernel.matrix(c1.midpoints, c2.midpoints)
    return float(np.sum(K * (c1.increments @ c2.increments.T)))


def stochastic_line_integral(field: PerturbedField, curve: Curve, curve2: Curve | None = None,
                             n_samples: int = 10_000, seed: int = 0, refine: int = 4,
                             workers: int | None = None) -> Report:
    """Integral of ``grad psi + lam G`` along curves, ``G`` a vector noise.

    Each component of ``G`` is an independent field with the given kernel,
    sampled at segment midpoints.  The deterministic part is
    ``psi(B) - psi(A)``.  For two closed loops the covariance oracle is the
    double line integral of ``K dx . dx'``, evaluated on ``refine``-times
    subdivided polylines.
    """
    field.check()
    if curve2 is not None and not (curve.closed and curve2.closed):
        raise InvalidCurve("the loop covariance needs two closed curves")
    curves = [curve] if curve2 is None else [curve, curve2]
    f = field.base
    lam = field.lam
    kern = field.kernel
    n = curve.points.shape[1]

    def det(c):
        if f is None:
            return 0.0
        return 0.0 if c.closed else float(f.value(c.B[None, :])[0] - f.value(c.A[None, :])[0])

    mids = np.vstack([c.midpoints for c in curves])
    sizes = [len(c.midpoints) for c in curves]
    cuts = np.cumsum([0] + sizes)
    sampler = FieldSampler(kern, mids)
    noise = np.zeros((n_samples, len(curves)))
    for i in range(n):
        A = np.zeros((len(mids), len(curves)))
        for j, c in enumerate(curves):
            A[cuts[j]:cuts[j + 1], j] = c.increments[:, i]
        noise += sampler.linear_stats(mc.derive_seed(seed, i), n_samples, A, workers)
    I = np.array([det(c) for c in curves]) + lam * noise

    rep = Report("line-integral", params=dict(lam=lam, kernel=kern.describe(), n_samples=n_samples,
                                              seed=seed, closed=curve.closed))
    if f is not None:
        quad = float(np.sum(f.grad(curve.midpoints) * curve.increments))
        rep.add(exact_row("midpoint rule of grad psi . dx = psi(B) - psi(A)", quad, det(curve),
                          rtol=1e-3, atol=1e-3 * max(1.0, curve.length)))
    label = "closed-loop mean" if curve.closed else "open-curve mean"
    rep.add(mc_row(label, I[:, 0], det(curve), paper=det(curve)))
    fine1 = _refined(curve, refine)
    var1 = lam**2 * loop_double_integral(kern, fine1, fine1)
    rep.add(mc_row("line-integral variance", (I[:, 0] - det(curve)) ** 2, var1, order=2,
                   detail="oracle lam^2 double line integral of K"))
    if curve2 is not None:
        fine2 = _refined(curve2, refine)
        cov = lam**2 * loop_double_integral(kern, fine1, fine2)
        rep.add(mc_row("loop-loop covariance", (I[:, 0] - det(curve)) * (I[:, 1] - det(curve2)),
                       cov, paper=cov, detail="double line integral of K dx . dx'"))
    if curve.closed:
        F = FieldSampler(kern, curve.points[:-1]).draw(seed, 0, 1)[0]
        tele = float(np.sum(np.roll(F, -1) - F))
        rep.add(note_row("loop integral of a scalar-field gradient", var1, 0.0, value=tele,
                         agrees=False,
                         detail="gradient of a scalar field telescopes to zero on a loop; "
                                "the covariance needs vector noise"))
    return rep


# --------------------------------------------------------------------------
# Dirichlet energy
# --------------------------------------------------------------------------


def _constants(kernel: CovKernel, n: int, lam: float, constants: NoiseConstants | None):
    if constants is not None:
        return constants
    return NoiseConstants.from_kernel(kernel, n, lam)


def sadei(field: PerturbedField, domain=None, n_samples: int = 10_000, seed: int = 0,
          resolution: int = 8, h: float | None = None, constants: NoiseConstants | None = None,
          workers: int | None = None) -> Report:
    """Shift of the energy ``int |grad psi_bar|^2`` by ``lam^2 beta |D|``.

    ``beta`` is the total gradient variance ``E|grad F|^2``.  The Monte Carlo
    side integrates squared central-difference gradients of field samples on a
    midpoint grid.
    """
    field.check()
    kern = field.kernel
    _require_differentiable(kern)
    domain = domain or Ball(3, 1.0)
    n = domain.dim
    lam = field.lam
    k = _constants(kern, n, lam, constants)
    beta = k.require("beta")
    alpha = k.alpha
    grid = build_grid(domain, "volume", resolution, "midpoint")
    X, w = grid.points, grid.weights
    vol = domain.volume()
    h = _step(kern, h)
    pts, D = gradient_stencil(X, h)
    gpsi = np.zeros(X.shape) if field.base is None else field.base.grad(X)
    E0 = float(np.sum(w * np.sum(gpsi**2, axis=1)))
    Dw = D * np.sqrt(w)[:, None, None]
    Dm = Dw.reshape(-1, D.shape[2])
    M = lam**2 * (Dm.T @ Dm)
    b = 2 * lam * np.einsum("p,pi,pik->k", w, gpsi, D)
    energy = FieldSampler(kern, pts).quadratic_stats(seed, n_samples, M, b, E0, workers)
    shift = lam**2 * beta * vol
    rep = Report("sadei", params=dict(lam=lam, beta=beta, alpha=alpha, volume=vol, h=h,
                                      n_samples=n_samples, seed=seed, kernel=kern.describe()))
    row = mc_row("expected energy", energy, E0 + shift, detail="oracle E(psi) + lam^2 beta |D|")
    est_shift = row.mc_estimate - E0
    rel = abs(est_shift - shift) / shift if shift > 0 else abs(est_shift)
    rep.add(
        info_row("deterministic energy", E0),
        row,
        check_row("energy shift within 5% of lam^2 beta |D|", rel <= 0.05, est_shift, shift,
                  detail=f"relative error {rel:.3g}"),
        note_row("energy shift, published lam alpha |D|", lam * alpha * vol, shift,
                 value=est_shift, stderr=row.mc_stderr),
    )
    m2, se2 = mc.batch_means(energy**2)
    rep.add(info_row("energy second moment", float(m2),
                     detail=f"bound terms: E^2/4={E0**2 / 4!r}, "
                            f"(3/2) beta |D| E={1.5 * beta * vol * E0!r}, |D|^2/4={vol**2 / 4!r}"))
    return rep


# --------------------------------------------------------------------------
# Cacciopolli
# --------------------------------------------------------------------------


def cacciopolli_condition(R: float, alpha: float, beta: float, n: int = 3):
    """``(R^2/4)(beta/alpha)``, the shell ratio ``2^n - 1`` and the threshold
    radius ``2 sqrt((2^n - 1) alpha / beta)``."""
    if alpha <= 0:
        raise InvalidArgument("alpha must be positive")
    lhs = R * R / 4 * beta / alpha
    rhs = shell_volume_ratio(n)
    r_star = 2 * math.sqrt(rhs * alpha / beta) if beta > 0 else math.inf
    return lhs, rhs, r_star


def stochastic_cacciopolli(R: float, constants: NoiseConstants, n: int | None = None,
                           field: PerturbedField | None = None, seeds=range(10),
                           n_samples: int = 200, resolution: int = 8, h: float | None = None,
                           workers: int | None = None) -> Report:
    """Condition ``(R^2/4)(beta/alpha) <= 2^n - 1`` and, optionally, the
    sampled quadrature form ``E int_{B_R} |grad psi_bar|^2 <= (4/R^2) E int_shell psi_bar^2``
    checked once per seed."""
    n = constants.n if n is None else n
    lhs, rhs, r_star = cacciopolli_condition(R, constants.alpha, constants.require("beta"), n)
    holds = lhs <= rhs
    rep = Report("cacciopolli-stochastic", params=dict(R=R, n=n, alpha=constants.alpha,
                                                       beta=constants.beta, threshold=r_star))
    rep.add(info_row("condition lhs (R^2/4)(beta/alpha)", lhs),
            info_row("shell volume ratio", rhs),
            info_row("threshold radius", r_star),
            check_row("condition evaluation consistent with threshold",
                      holds == (R <= r_star * (1 + 1e-12)), lhs, rhs,
                      detail="holds" if holds else "fails"))
    if field is None:
        rep.holds = holds
        return rep
    field.check()
    kern = field.kernel
    _require_differentiable(kern)
    lam = field.lam
    inner = build_grid(Ball(n, R), "volume", resolution, "midpoint")
    shell = build_grid(Shell(n, R, 2 * R), "volume", resolution, "gauss")
    h = _step(kern, h)
    spts, D = gradient_stencil(inner.points, h)
    pts = np.vstack([spts, shell.points])
    ns = len(spts)
    base = field.base_values(pts)
    sampler = FieldSampler(kern, pts)
    wi, ws = inner.weights, shell.weights

    def sides(F):
        V = base + lam * F
        G = np.einsum("pik,sk->spi", D, V[:, :ns])
        left = np.sum(wi * np.sum(G * G, axis=2), axis=1)
        right = 4 / R**2 * (V[:, ns:] ** 2 @ ws)
        return np.column_stack([left, right])

    ok_all = True
    for s in seeds:
        S = sampler.map(int(s), n_samples, sides, workers)
        (lm, rm), (ls, rs) = mc.batch_means(S)
        ok = lm <= rm
        ok_all &= ok
        rep.add(check_row(f"quadrature form seed {s}", (not holds) or ok, float(lm), float(rm),
                          detail=f"lhs se {ls:.3g}, rhs se {rs:.3g}"))
    rep.holds = holds
    rep.quadrature_holds = bool(ok_all)
    return rep


# --------------------------------------------------------------------------
# Bochner
# --------------------------------------------------------------------------


def _jet_offsets(n: int):
    offs = {tuple(np.zeros(n, dtype=int))}
    E = np.eye(n, dtype=int)
    for i in range(n):
        for s in (1, -1):
            offs.add(tuple(s * E[i]))
            offs.add(tuple(2 * s * E[i]))
            for j in range(n):
                if j != i:
                    for t in (1, -1):
                        offs.add(tuple(s * E[i] + t * E[j]))
    return sorted(offs)


def _jet_ops(n: int, h: float):
    """Linear maps from stencil values to the FD Hessian at the centre and the
    FD gradients at the centre and its ``+- h e_k`` neighbours."""
    offs = _jet_offsets(n)
    idx = {o: k for k, o in enumerate(offs)}
    E = np.eye(n, dtype=int)
    m = len(offs)
    z = tuple(np.zeros(n, dtype=int))
    H = np.zeros((n, n, m))
    for i in range(n):
        H[i, i, idx[tuple(E[i])]] += 1 / h**2
        H[i, i, idx[tuple(-E[i])]] += 1 / h**2
        H[i, i, idx[z]] -= 2 / h**2
        for j in range(n):
            if j != i:
                for s, t in product((1, -1), repeat=2):
                    H[i, j, idx[tuple(s * E[i] + t * E[j])]] += s * t / (4 * h * h)
    centres = [np.zeros(n, dtype=int)] + [s * E[k] for k in range(n) for s in (1, -1)]
    G = np.zeros((len(centres), n, m))
    for c, cen in enumerate(centres):
        for i in range(n):
            G[c, i, idx[tuple(cen + E[i])]] += 0.5 / h
            G[c, i, idx[tuple(cen - E[i])]] -= 0.5 / h
    return np.array(offs, dtype=float), H, G


def _half_lap_grad_sq(G, V, h):
    g = np.einsum("cik,sk->sci", G, V)
    q = np.sum(g * g, axis=2)
    return 0.5 * np.sum(q[:, 1::2] + q[:, 2::2] - 2 * q[:, :1], axis=1) / h**2


def bochner_shifted_value(f: HarmonicFn, x, Xi: float | None, lam: float, n: int | None = None,
                          h: float = 1e-2) -> float:
    """``(1/2) Lap |grad f|^2 (x) + lam^2 n Xi``."""
    from ..exceptions import MissingConstant

    if Xi is None:
        raise MissingConstant("Xi is neither derivable from the kernel nor supplied")
    n = f.dim if n is None else n
    return bochner_terms(f, x, h).half_lap_grad_sq + lam**2 * n * Xi


def stochastic_bochner(f: HarmonicFn, x, kernel: CovKernel, lam: float = 1.0,
                       n_samples: int = 10_000, seed: int = 0, h: float | None = None,
                       constants: NoiseConstants | None = None,
                       workers: int | None = None) -> Report:
    """Bochner terms of ``f + lam F`` at ``x``.

    Rows: the published shifted value ``(1/2) Lap |grad f|^2 + lam^2 n Xi``;
    the Monte Carlo Hessian norm ``E|Hess psi_bar|^2 = |Hess f|^2 + lam^2 n Xi``;
    the Monte Carlo ``E[(1/2) Lap |grad psi_bar|^2]``, which by stationarity
    equals the deterministic value; and ``Xi`` itself.
    """
    x = np.asarray(x, dtype=float)
    n = f.dim
    k = _constants(kernel, n, lam, constants)
    Xi = k.require("Xi")
    det = bochner_terms(f, x).half_lap_grad_sq
    shifted = bochner_shifted_value(f, x, Xi, lam, n)
    Hf = f.hessian(x[None, :])[0]
    hess_sq = float(np.sum(Hf * Hf))
    rep = Report("bochner-stochastic", params=dict(lam=lam, Xi=Xi, Theta=k.Theta, n=n,
                                                   kernel=kernel.describe(), n_samples=n_samples))
    rep.add(info_row("deterministic (1/2) Lap |grad f|^2", det),
            info_row("shifted value (1/2) Lap |grad f|^2 + lam^2 n Xi", shifted))
    if not getattr(kernel, "differentiable", False):
        return rep
    h = _step(kernel, h) if h is None else h
    offs, H, G = _jet_ops(n, h)
    pts = x + h * offs
    base = f.value(pts)
    sampler = FieldSampler(kernel, pts)

    def stats(F):
        V = base + lam * F
        HV = np.einsum("ijk,sk->sij", H, V)
        HF = np.einsum("ijk,sk->sij", H, F)
        return np.column_stack([np.sum(HV**2, axis=(1, 2)), np.sum(HF**2, axis=(1, 2)) / n,
                                _half_lap_grad_sq(G, V, h)])

    S = sampler.map(seed, n_samples, stats, workers)
    det_fd = float(_half_lap_grad_sq(G, base[None, :], h)[0])
    rep.add(
        exact_row("FD (1/2) Lap |grad f|^2 vs fourth-order value", det_fd, det, rtol=1e-3,
                  atol=1e-6),
        mc_row("E|Hess psi_bar|^2", S[:, 0], hess_sq + lam**2 * n * Xi,
               detail="oracle |Hess f|^2 + lam^2 n Xi"),
        mc_row("Xi from sampled Hessians", S[:, 1], Xi),
        mc_row("E[(1/2) Lap |grad psi_bar|^2]", S[:, 2], det_fd, paper=det + lam**2 * n * Xi,
               detail="stationarity: the noise adds a constant to |grad|^2 on average"),
    )
    row = rep["E[(1/2) Lap |grad psi_bar|^2]"]
    rep.add(note_row("shifted Bochner value", det + lam**2 * n * Xi, det_fd, row.mc_estimate,
                     row.mc_stderr, row.n_samples),
            note_row("shifted Bochner value with Theta", det + n * lam**2 * (k.require("Theta") + Xi),
                     det_fd, row.mc_estimate, row.mc_stderr, row.n_samples))
    return rep
