"""Command-line front end.

::

    stochpot verify ID|all [--samples N] [--seed N] [--out DIR] [--format csv|json]
    stochpot solve disc|ball|wos [--g PRESET] [--r R] [--theta T] [--x X] [--domain D]
    stochpot sample [--domain D] [--kernel K] [--seed N] [--lambda L]

Exit status: 0 on success, 1 on oracle failures or numerical errors, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .config import RunConfig, domain_grid, parse_domain, parse_point
from .exceptions import StochpotError
from .grf import kc_admissible, sample_field
from .harmonic import ball_poisson_eval, boundary_preset, disc_poisson_eval
from .verify import ALL_IDS, run_suite, suite_ids, write_report
from .wos import WalkConfig, wos_laplace

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--dump-config", metavar="PATH",
                   help="write the effective configuration ('-' for stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--out", help="output directory (verify) or file (solve, sample)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--kernel", choices=("gaussian", "exponential", "powerlaw", "white"))
    p.add_argument("--metric", choices=("euclidean", "angular"))
    p.add_argument("--orders", help="comma-separated moment orders")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stochpot",
                                 description="Harmonic functions and potentials under Gaussian "
                                             "random perturbations.")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("target", help=f"suite id or 'all' ({', '.join(ALL_IDS)})")
    _common(v)
    s = sub.add_parser("solve", help="evaluate Dirichlet solutions")
    s.add_argument("target", choices=("disc", "ball", "wos"))
    s.add_argument("--g", help="boundary preset, e.g. cos1, zdir, const:3")
    s.add_argument("--r", help="radius or comma-separated radii (disc)")
    s.add_argument("--theta", help="angle or comma-separated angles (disc)")
    s.add_argument("--x", action="append", help="evaluation point, e.g. 0,0,0.5 (repeatable)")
    s.add_argument("--domain", help="ball or disc, optionally ball:3:R / disc:R (wos)")
    s.add_argument("--epsilon", type=float, help="walk-on-spheres absorption shell")
    _common(s)
    m = sub.add_parser("sample", help="dump one field sample on a grid")
    m.add_argument("--domain", help="ball:n:R, disc:R, shell:n:R0:R1, cylinder:R:L, sphere:R, circle:R")
    _common(m)
    return ap


def make_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    over = {"command": args.command, "target": getattr(args, "target", None)}
    for key in ("seed", "samples", "resolution", "out", "format", "lam", "alpha", "xi", "eta",
                "kernel", "metric", "orders", "workers", "g", "epsilon", "domain"):
        over[key] = getattr(args, key, None)
    for key in ("r", "theta"):
        v = getattr(args, key, None)
        if v is not None:
            vals = parse_point(v)
            over[key] = vals[0]
            if len(vals) > 1:
                over[f"{key}_list"] = v
    xs = getattr(args, "x", None)
    if xs:
        over["x"] = "|".join(xs)
    cfg = cfg.update(over)
    return cfg.validate()


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        ids = suite_ids(cfg.target)
    except KeyError:
        print(f"error: unknown suite {cfg.target!r}; known: {', '.join(ALL_IDS)}", file=sys.stderr)
        return EXIT_USAGE
    status = EXIT_OK
    out_dir = cfg.out or "reports"
    for name in ids:
        rep = run_suite(name, cfg)
        path = write_report(rep, out_dir, cfg.format)
        verdict = "PASS" if rep.passed else "FAIL"
        print(f"{verdict} {name}: {len(rep)} rows, {len(rep.failures())} failed, "
              f"{len(rep.notes())} notes -> {path}", file=stdout)
        for row in rep.failures():
            print(f"    FAIL {row.statistic}: oracle={row.oracle_value!r} "
                  f"estimate={row.mc_estimate!r} stderr={row.mc_stderr!r}", file=stdout)
        if not rep.passed:
            status = EXIT_FAIL
    return status


def _floats(cfg: RunConfig, key: str):
    raw = cfg.extra.get(f"{key}_list")
    return list(parse_point(raw)) if raw else [getattr(cfg, key)]


def _points(cfg: RunConfig, default):
    if not cfg.x:
        return [tuple(default)]
    return [parse_point(p) for p in cfg.x.split("|")]


def _solve_rows(cfg: RunConfig):
    g = boundary_preset(cfg.g or ("zdir" if cfg.target == "ball" else "cos1"))
    rows = []
    if cfg.target == "disc":
        for r in _floats(cfg, "r"):
            for t in _floats(cfg, "theta"):
                pt = (r * math.cos(t), r * math.sin(t))
                try:
                    rows.append((pt, float(disc_poisson_eval(g, 1.0, r, t)), None, None, ""))
                except StochpotError as exc:
                    rows.append((pt, None, None, None, str(exc)))
        return rows
    if cfg.target == "ball":
        default = [(0.0, 0.0, 0.0), (0.0, 0.0, 0.5), (0.3, -0.2, 0.4)]
        pts = _points(cfg, None) if cfg.x else default
        for pt in pts:
            try:
                rows.append((pt, float(ball_poisson_eval(g, np.asarray(pt), 1.0)), None, None, ""))
            except StochpotError as exc:
                rows.append((pt, None, None, None, str(exc)))
        return rows
    dom, _ = parse_domain(cfg.domain or "ball")
    walk = WalkConfig(cfg.epsilon, 10_000, cfg.samples or 10_000, cfg.seed, cfg.workers)
    default = (0.0, 0.0, 0.5) if dom.dim == 3 else (0.5, 0.0)
    for pt in _points(cfg, default):
        try:
            res = wos_laplace(dom, g, np.asarray(pt), walk)
            rows.append((pt, res.estimate, res.stderr, res.mean_steps, res.warning or ""))
        except StochpotError as exc:
            rows.append((pt, None, None, None, str(exc)))
    return rows


def _emit(text: str, out: str, stdout):
    if out and out != "-":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def cmd_solve(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    rows = _solve_rows(cfg)
    if cfg.format == "json":
        data = [{"point": list(p), "value": v, "stderr": s, "mean_steps": m, "error": e}
                for p, v, s, m, e in rows]
        text = json.dumps({"kind": cfg.target, "g": cfg.g, "rows": data}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point", "value", "stderr", "mean_steps", "error"])
        for p, v, s, m, e in rows:
            w.writerow([";".join(repr(float(c)) for c in p),
                        "" if v is None else repr(v), "" if s is None else repr(s),
                        "" if m is None else repr(m), e])
        text = buf.getvalue()
    _emit(text, cfg.out, stdout)
    return EXIT_FAIL if all(r[1] is None for r in rows) else EXIT_OK


def cmd_sample(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    domain = cfg.domain or "circle:1"
    metric = "angular" if domain.startswith("circle") else "euclidean"
    kernel = cfg.build_kernel(cfg.xi or 0.5, "exponential", metric)
    adm = kc_admissible(kernel)
    if not adm:
        print(f"error: {adm.reason}", file=sys.stderr)
        return EXIT_FAIL
    grid = domain_grid(domain, cfg.resolution or 64)
    sample = sample_field(kernel, grid, cfg.seed)
    if cfg.lam != 1.0:
        sample = sample.scaled(cfg.lam)
    if cfg.format == "json":
        text = json.dumps({"seed": sample.seed, "kernel": kernel.describe(), "lambda": cfg.lam,
                           "points": sample.points.tolist(),
                           "values": sample.values.tolist()}) + "\n"
    else:
        text = sample.to_csv()
    _emit(text, cfg.out, stdout)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "solve": cmd_solve, "sample": cmd_sample}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
    except (StochpotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.dump_config:
        _emit(cfg.dumps(), args.dump_config, sys.stdout)
    try:
        return COMMANDS[args.command](cfg)
    except (StochpotError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
