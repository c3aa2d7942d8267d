"""Verification suites: one report per identifier, written as CSV or JSON.

Each runner maps a :class:`RunConfig` onto the stochastic and classical
operations and returns a :class:`Report`.  A suite passes when no row has
verdict ``FAIL``; published-value disagreements are ``NOTE`` rows.
"""

from __future__ import annotations

import math
import os
from typing import Callable

import numpy as np

from .config import RunConfig
from .exceptions import NonDifferentiableKernel
from .geometry import Ball, Curve, Disc, build_grid
from .grf import NoiseConstants
from .harmonic import (ComplexPoly, FlowPastSphere, LineVortex, Linear, Radial3D, RadialLog2D,
                       bochner_residual, boundary_preset, cacciopolli_check, disc_fourier_eval,
                       disc_fourier_solve, disc_poisson_eval, harnack_bounds,
                       max_principle_check, mvp_residual, random_harmonic_polynomial,
                       stability_check)
from .potentials import (RieszSpec, ball_integral_closed, ball_newton_closed,
                         ball_newton_gradient_closed, riesz_potential)
from .stochastic import (PerturbedField, Report, averaged_max_principle, check_row,
                         cylinder_boundary_stats, exact_row, force_moments, info_row,
                         laplacian_moments, mc_row, noisy_boundary_ball, noisy_boundary_disc,
                         noisy_density_newton, perturbed_mvp, sadei, sampler_fidelity,
                         stochastic_bochner, stochastic_cacciopolli, stochastic_harnack,
                         stochastic_line_integral, stochastic_riesz_moments,
                         turbulent_flow_stats)
from .wos import WalkConfig, wos_laplace, wos_poisson


def _n(cfg: RunConfig, default: int) -> int:
    return cfg.samples if cfg.samples is not None else default


def _res(cfg: RunConfig, default: int) -> int:
    return cfg.resolution if cfg.resolution is not None else default


def _smooth_kernel(cfg: RunConfig, xi: float = 0.5):
    k = cfg.build_kernel(xi)
    if not getattr(k, "differentiable", False):
        raise NonDifferentiableKernel(f"{k.describe()} has no mean-square derivatives; "
                                      "this suite needs a Gaussian kernel")
    return k


def _merge(name: str, *reports: Report, **params) -> Report:
    out = Report(name, params=dict(params))
    for rep in reports:
        out.rows.extend(rep.rows)
        out.params.update({f"{rep.name}.{k}": v for k, v in rep.params.items()})
    return out


# --------------------------------------------------------------------------
# stochastic suites
# --------------------------------------------------------------------------


def run_mvp(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(0.5)
    n = _n(cfg, 100_000)
    res = _res(cfg, 8)
    zero = perturbed_mvp(PerturbedField(None, cfg.lam, k), Ball(3, 1.0), n, cfg.seed, res,
                         workers=cfg.workers)
    base = perturbed_mvp(PerturbedField(Linear((1.0, 0.0, 0.0), 2.0), cfg.lam, k), Ball(3, 1.0),
                         max(n // 10, 1000), cfg.seed + 1, res, workers=cfg.workers)
    for r in zero.rows:
        r.statistic = f"psi=0: {r.statistic}"
    for r in base.rows:
        r.statistic = f"psi=2+x: {r.statistic}"
    mp = averaged_max_principle(PerturbedField(ComplexPoly(2, "real", 2), cfg.lam, k), Disc(1.0),
                                cfg.orders[0], max(n // 10, 1000), cfg.seed + 2,
                                workers=cfg.workers)
    for r in mp.rows:
        r.statistic = f"max principle: {r.statistic}"
    return _merge("mvp-stochastic", zero, base, mp)


def run_harnack(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(0.5)
    reps = [stochastic_harnack(Linear((1.0, 0.0, 0.0), 2.0), np.array([0.5, 0.0, 0.0]), 1.0,
                               cfg.lam, k, P, _n(cfg, 10_000), cfg.seed + i, workers=cfg.workers)
            for i, P in enumerate(cfg.orders)]
    return _merge("harnack-stochastic", *reps)


def run_cacciopolli(cfg: RunConfig) -> Report:
    xi = cfg.xi if cfg.xi is not None else math.sqrt(6.0)   # beta / alpha = 1 in 3-D
    k = _smooth_kernel(cfg, xi)
    consts = NoiseConstants.from_kernel(k, 3, cfg.lam)
    field = PerturbedField(Linear((1.0, 0.0, 0.0), 0.0), cfg.lam, k)
    inner = stochastic_cacciopolli(1.0, consts, 3, field, range(cfg.seed, cfg.seed + 10),
                                   _n(cfg, 200), _res(cfg, 8), workers=cfg.workers)
    outer = stochastic_cacciopolli(6.0, consts, 3)
    for r in inner.rows:
        r.statistic = f"R=1: {r.statistic}"
    for r in outer.rows:
        r.statistic = f"R=6: {r.statistic}"
    out = _merge("cacciopolli-stochastic", inner, outer)
    if math.isclose(consts.beta, consts.alpha):
        out.add(check_row("condition holds at R=1", inner.holds),
                check_row("condition fails at R=6", not outer.holds))
    return out


def run_riesz(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(0.5)
    spec = RieszSpec(3, 1.5, 1.0, Ball(3, 1.0), 12, 1.0, "gauss")
    reps = [stochastic_riesz_moments(spec, cfg.lam, k, [0.0, 0.0, 2.0], P, _n(cfg, 100_000),
                                     cfg.seed + i, workers=cfg.workers)
            for i, P in enumerate(cfg.orders)]
    return _merge("riesz-moments", *reps)


def run_noisy_disc(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(cfg.eta, "exponential", "angular")
    return noisy_boundary_disc(cfg.g if cfg.g else "cos1", 1.0, cfg.lam, k, cfg.r,
                               cfg.theta or 0.3, cfg.orders[0], _n(cfg, 100_000), cfg.seed,
                               _res(cfg, 256), workers=cfg.workers)


def run_noisy_ball(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(0.5)
    g = cfg.extra.get("ball_g", "zdir")
    return noisy_boundary_ball(g, 1.0, cfg.lam, k, 0.5, cfg.orders[0], _n(cfg, 100_000),
                               cfg.seed, monotone_as_note=True, workers=cfg.workers)


def run_sadei(cfg: RunConfig) -> Report:
    k = _smooth_kernel(cfg, 0.5)
    return sadei(PerturbedField(None, cfg.lam, k), Ball(3, 1.0), _n(cfg, 10_000), cfg.seed,
                 _res(cfg, 8), workers=cfg.workers)


def run_bochner(cfg: RunConfig) -> Report:
    k = _smooth_kernel(cfg, 1.0)
    return stochastic_bochner(ComplexPoly(2, "real", 2), [0.2, 0.1], k, cfg.lam,
                              _n(cfg, 10_000), cfg.seed, workers=cfg.workers)


def run_turbulence(cfg: RunConfig) -> Report:
    k = _smooth_kernel(cfg, 0.5)
    flow = turbulent_flow_stats(FlowPastSphere(1.0, 1.0), k, lam=cfg.lam,
                                n_samples=_n(cfg, 100_000), seed=cfg.seed,
                                kelvin_samples=max(_n(cfg, 100_000) // 10, 1000),
                                workers=cfg.workers)
    cyl = cylinder_boundary_stats(n_samples=_n(cfg, 100_000), seed=cfg.seed + 1,
                                  workers=cfg.workers)
    return _merge("turbulence", flow, cyl)


def run_line_integral(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(0.5)
    field = PerturbedField(ComplexPoly(2, "real", 2), cfg.lam, k)
    loops = stochastic_line_integral(field, Curve.circle(1.0, m=64),
                                     Curve.circle(0.7, center=(0.3, 0.0), m=64),
                                     _n(cfg, 10_000), cfg.seed, workers=cfg.workers)
    seg = stochastic_line_integral(field, Curve.segment([0.0, 0.0], [0.5, 0.6]), None,
                                   _n(cfg, 10_000), cfg.seed + 1, workers=cfg.workers)
    for r in seg.rows:
        r.statistic = f"open path: {r.statistic}"
    return _merge("line-integral", loops, seg)


def run_newton(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(0.5)
    n = _n(cfg, 100_000)
    P = cfg.orders[0]
    dens = noisy_density_newton(1.0, 1.0, 1.0, cfg.lam, k, P=P, n_samples=n, seed=cfg.seed,
                                workers=cfg.workers)
    force = force_moments(lam=cfg.lam, kernel=k, n_samples=n, seed=cfg.seed + 1,
                          workers=cfg.workers)
    lap = laplacian_moments(lam=cfg.lam, kernel=k, P=P, n_samples=n, seed=cfg.seed + 2,
                            workers=cfg.workers)
    return _merge("newton-density", dens, force, lap)


def run_kolmogorov(cfg: RunConfig) -> Report:
    k = cfg.build_kernel(1.0) if cfg.kernel in ("", "gaussian", "exponential") else None
    return sampler_fidelity(k, None, _n(cfg, 100_000), cfg.seed, workers=cfg.workers)


# --------------------------------------------------------------------------
# deterministic and walk-on-spheres suites
# --------------------------------------------------------------------------


def _nonneg_shift(f, pts):
    """Constant making ``f + c`` positive on ``pts``."""
    return 1.0 - float(np.min(f.value(pts)))


def run_classical(cfg: RunConfig) -> Report:
    """Mean values, maximum principle, comparison, Harnack, Cacciopolli and
    Bochner over the presets and a randomized harmonic-polynomial family."""
    rep = Report("classical", params=dict(seed=cfg.seed, family=20))
    disc, ball = Disc(1.0), Ball(3, 1.0)
    presets = [("complex z^3 (real)", ComplexPoly(3, "real", 2), disc),
               ("complex z^2 (imag, 3-D)", ComplexPoly(2, "imag", 3), ball),
               ("linear", Linear((1.0, -2.0, 0.5), 0.3), ball),
               ("radial 1/r, pole outside", Radial3D(1.0, 0.0, (3.0, 0.0, 0.0)), ball),
               ("radial log, pole outside", RadialLog2D(1.0, 0.0, (2.5, 0.0)), disc),
               ("flow past sphere", FlowPastSphere(1.0, 1.0), Ball(3, 1.0, (0.0, 0.0, 3.0))),
               ("line vortex", LineVortex(1.0, 3), Ball(3, 0.5, (2.0, 0.0, 0.0)))]
    worst = 0.0
    for name, f, dom in presets:
        res = mvp_residual(f, dom)
        worst = max(worst, res.volume_rel, res.surface_rel)
        rep.add(exact_row(f"MVP {name}", max(res.volume_rel, res.surface_rel), 0.0, atol=1e-6))
    rng = np.random.default_rng(cfg.seed)
    fails = {k: 0 for k in ("mvp", "max", "harnack", "cacciopolli", "bochner")}
    interior = build_grid(disc, "volume", 24, "gauss")
    boundary = build_grid(disc, "surface", 256, "gauss")
    big = build_grid(Disc(1.0), "volume", 16, "gauss")
    probe = rng.uniform(-0.4, 0.4, size=(8, 2))
    bmax = 0.0
    for _ in range(20):
        f = random_harmonic_polynomial(rng, 5, 2)
        res = mvp_residual(f, Disc(0.5))
        fails["mvp"] += max(res.volume_rel, res.surface_rel) >= 1e-6
        fails["max"] += not max_principle_check(f, interior, boundary).holds
        c = _nonneg_shift(f, np.vstack([big.points, boundary.points]))
        val0 = float(f.value(np.zeros((1, 2)))[0]) + c
        for x in probe:
            d = float(np.linalg.norm(x))
            lo, hi = harnack_bounds(val0, 1.0, d, 2)
            v = float(f.value(x[None])[0]) + c
            fails["harnack"] += not (lo <= v * (1 + 1e-12) and v <= hi * (1 + 1e-12))
        fails["cacciopolli"] += not cacciopolli_check(f, 0.4).holds
        b = max(bochner_residual(f, x, 1e-2) for x in probe[:3])
        bmax = max(bmax, b)
        fails["bochner"] += b > 1e-4
    for key, label in (("mvp", "MVP residual < 1e-6"), ("max", "maximum principle"),
                       ("harnack", "Harnack containment"), ("cacciopolli", "Cacciopolli"),
                       ("bochner", "Bochner residual <= 1e-4")):
        rep.add(check_row(f"random family: {label}", fails[key] == 0, float(fails[key]), 0.0,
                          detail="count of failing members out of 20"))
    rep.add(info_row("largest Bochner residual", bmax))
    cmp_ = stability_check(boundary_preset("cos1"),
                           lambda b: np.cos(b) - 1 - np.sin(2 * b) ** 2, 1.0, 200, cfg.seed)
    rep.add(check_row("comparison: g1 >= g2 gives psi1 >= psi2", bool(cmp_.ordered)),
            check_row("stability: |psi1 - psi2| <= max |g1 - g2|", cmp_.holds,
                      cmp_.max_solution_gap, cmp_.max_boundary_gap))
    for spec in ("cos1", "cos2", "sin3"):
        g = boundary_preset(spec)
        co = disc_fourier_solve(g, 16, 512)
        r = np.linspace(0.0, 0.9, 10)
        t = np.linspace(0.0, 2 * math.pi, 10)
        gap = float(np.max(np.abs(disc_poisson_eval(g, 1.0, r, t) - disc_fourier_eval(co, 1.0, r, t))))
        rep.add(exact_row(f"disc solvers agree, g={spec}", gap, 0.0, atol=1e-8))
    step = boundary_preset("step")
    beta = np.arange(4096) * (2 * math.pi / 4096)
    centre = float(disc_poisson_eval(step, 1.0, 0.0, 0.0))
    rep.add(exact_row("disc centre value equals boundary mean", centre,
                      float(step.on_angles(beta).mean()), atol=1e-10))
    return rep


def run_potentials(cfg: RunConfig) -> Report:
    rep = Report("potentials", params=dict(resolution=_res(cfg, 32)))
    res = _res(cfg, 32)
    spec = RieszSpec(3, 2.0, 1.0, Ball(3, 1.0), res)
    for a, label in ((2.0, "exterior"), (0.0, "centre"), (1.0, "surface")):
        q = float(riesz_potential(spec, [0.0, 0.0, a]))
        tol = 0.02 if a == 1.0 else 0.01
        rep.add(exact_row(f"ball integral at a={a:g} ({label})", q, ball_integral_closed(1.0, a),
                          rtol=tol))
    newton = RieszSpec(3, 2.0, 1.0, Ball(3, 1.0), res, 1 / (4 * math.pi))
    rep.add(exact_row("Newton potential at |x|=2, quadrature", float(riesz_potential(newton, [0, 0, 2.0])),
                      1 / 6, rtol=0.01),
            exact_row("Newton potential at |x|=2, closed form", ball_newton_closed(1.0, 2.0), 1 / 6,
                      rtol=1e-14))
    a = np.array([0.0, 0.0, 2.0])
    grad = ball_newton_gradient_closed(1.0, a)
    h = 1e-5
    fd = np.array([(ball_integral_closed(1.0, np.linalg.norm(a + h * e))
                    - ball_integral_closed(1.0, np.linalg.norm(a - h * e))) / (2 * h)
                   for e in np.eye(3)])
    rep.add(exact_row("force magnitude at a=(0,0,2)", float(np.linalg.norm(grad)), math.pi / 3,
                      rtol=1e-12),
            exact_row("force vs central differences", float(np.linalg.norm(fd - grad)), 0.0,
                      atol=1e-6 * float(np.linalg.norm(grad))))
    return rep


def run_wos(cfg: RunConfig) -> Report:
    n = _n(cfg, 10_000)
    walk = WalkConfig(cfg.epsilon, 10_000, n, cfg.seed, cfg.workers)
    rep = Report("wos", params=dict(n_walkers=n, seed=cfg.seed, epsilon=cfg.epsilon))
    cases = [("disc, g=cos, x=(0.5,0)", wos_laplace(Disc(1.0), boundary_preset("cos1"), (0.5, 0.0), walk), 0.5),
             ("ball, g=z, x=(0,0,0.5)", wos_laplace(Ball(3, 1.0), boundary_preset("zdir"), (0.0, 0.0, 0.5), walk), 0.5),
             ("disc Poisson, f=-4, centre", wos_poisson(Disc(1.0), -4.0, 0.0, (0.0, 0.0), walk), 1.0),
             ("ball Poisson, f=-6, centre", wos_poisson(Ball(3, 1.0), -6.0, 0.0, (0.0, 0.0, 0.0), walk), 1.0),
             ("disc Poisson, f=-4, x=(0.3,0.4)", wos_poisson(Disc(1.0), -4.0, 0.0, (0.3, 0.4), walk), 0.75),
             ("ball Poisson, f=-6, x=(0,0.6,0)", wos_poisson(Ball(3, 1.0), -6.0, 0.0, (0.0, 0.6, 0.0), walk), 0.64)]
    for name, res, oracle in cases:
        rep.add(mc_row(name, res.scores, oracle, detail=f"mean steps {res.mean_steps:.3g}"))
    return rep


SUITES: dict[str, Callable[[RunConfig], Report]] = {
    "mvp-stochastic": run_mvp,
    "harnack-stochastic": run_harnack,
    "cacciopolli-stochastic": run_cacciopolli,
    "riesz-moments": run_riesz,
    "noisy-disc": run_noisy_disc,
    "noisy-ball": run_noisy_ball,
    "sadei": run_sadei,
    "bochner-stochastic": run_bochner,
    "turbulence": run_turbulence,
    "line-integral": run_line_integral,
    "newton-density": run_newton,
    "kolmogorov-kernels": run_kolmogorov,
}
EXTRAS: dict[str, Callable[[RunConfig], Report]] = {
    "classical": run_classical,
    "potentials": run_potentials,
    "wos": run_wos,
}
ALL_IDS = tuple(SUITES) + tuple(EXTRAS)


def suite_ids(target: str) -> tuple:
    if target == "all":
        return ALL_IDS
    if target in SUITES or target in EXTRAS:
        return (target,)
    raise KeyError(target)


def run_suite(name: str, cfg: RunConfig | None = None) -> Report:
    cfg = cfg or RunConfig()
    fn = SUITES.get(name) or EXTRAS.get(name)
    if fn is None:
        raise KeyError(name)
    rep = fn(cfg)
    rep.name = name
    return rep


def report_path(out_dir: str, name: str, fmt: str = "csv") -> str:
    return os.path.join(out_dir, f"{name.replace('-', '_')}.{fmt}")


def write_report(rep: Report, out_dir: str, fmt: str = "csv") -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = report_path(out_dir, rep.name, fmt)
    text = rep.to_csv() if fmt == "csv" else rep.to_json()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
