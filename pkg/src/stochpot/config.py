"""Run configuration: plain ``key=value`` files overridable by flags."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields

from .exceptions import InvalidArgument
from .geometry import Ball, Cylinder, Disc, Shell, build_grid, circle_grid, sphere_grid
from .grf import CovKernel, Exponential, GaussianCorr, PowerLaw, WhiteNoise

FORMATS = ("csv", "json")
KERNELS = ("gaussian", "exponential", "powerlaw", "white")


@dataclass
class RunConfig:
    """Every setting of a command-line run.

    ``None`` for ``xi``, ``samples`` or ``resolution`` and an empty
    ``kernel``, ``metric`` or ``out`` mean the per-command default.  ``eta``
    is the correlation length of boundary kernels.
    """

    command: str = "verify"
    target: str = "all"
    domain: str = ""
    kernel: str = ""
    metric: str = ""
    base: str = ""
    g: str = ""
    lam: float = 1.0
    alpha: float = 1.0
    xi: float | None = None
    eta: float = 0.5
    orders: tuple = (2,)
    samples: int | None = None
    seed: int = 0
    resolution: int | None = None
    out: str = ""
    format: str = "csv"
    workers: int | None = None
    r: float = 0.5
    theta: float = 0.0
    x: str = ""
    epsilon: float = 1e-3
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> "RunConfig":
        if self.format not in FORMATS:
            raise InvalidArgument(f"format must be one of {FORMATS}")
        if self.kernel and self.kernel not in KERNELS:
            raise InvalidArgument(f"kernel must be one of {KERNELS}")
        for name in ("alpha", "eta", "epsilon"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.xi is not None and not self.xi > 0:
            raise InvalidArgument("xi must be positive")
        if self.lam < 0:
            raise InvalidArgument("lambda must be non-negative")
        if self.samples is not None and self.samples < 100:
            raise InvalidArgument("samples must be at least 100")
        if self.resolution is not None and self.resolution < 1:
            raise InvalidArgument("resolution must be positive")
        if any(int(p) != p or p < 1 for p in self.orders):
            raise InvalidArgument("moment orders must be positive integers")
        return self

    # ---- serialization -------------------------------------------------

    def dumps(self) -> str:
        lines = ["# stochpot run configuration"]
        for f in fields(self):
            if f.name == "extra":
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ",".join(str(t) for t in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        lines.extend(f"{k}={v}" for k, v in sorted(self.extra.items()))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        return cls().update(parse_key_values(text))

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def update(self, values: dict) -> "RunConfig":
        """Apply string or typed overrides; unknown keys land in ``extra``."""
        known = {f.name: f for f in fields(self)}
        changes, extra = {}, dict(self.extra)
        for key, raw in values.items():
            key = {"lambda": "lam"}.get(key, key)
            if raw is None:
                continue
            if key in known and key != "extra":
                changes[key] = _coerce(key, raw)
            else:
                extra[key] = raw
        return dataclasses.replace(self, **changes, extra=extra)

    # ---- builders ------------------------------------------------------

    def build_kernel(self, default_xi: float = 0.5, default_kind: str = "gaussian",
                     default_metric: str = "euclidean") -> CovKernel:
        xi = self.xi if self.xi is not None else default_xi
        metric = self.metric or default_metric
        kind = self.kernel or default_kind
        if kind == "gaussian":
            return GaussianCorr(self.alpha, xi, metric)
        if kind == "exponential":
            return Exponential(self.alpha, xi, metric)
        if kind == "powerlaw":
            return PowerLaw(xi, float(self.extra.get("p", 1.0)))
        return WhiteNoise()


_INT = ("samples", "seed", "resolution", "workers")
_FLOAT = ("lam", "alpha", "xi", "eta", "r", "theta", "epsilon")
_OPTIONAL = ("xi", "samples", "resolution", "workers")


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return tuple(int(v) for v in raw) if key == "orders" else raw
    s = raw.strip()
    if key not in _INT + _FLOAT + ("orders",):
        return s
    if s.lower() in ("", "none"):
        if key in _OPTIONAL:
            return None
        raise InvalidArgument(f"{key} needs a value")
    try:
        if key in _INT:
            return int(s)
        if key in _FLOAT:
            v = float(s)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key == "orders":
            return tuple(int(t) for t in s.split(",") if t.strip())
    except ValueError as exc:
        raise InvalidArgument(f"cannot parse {key}={raw!r}") from exc
    return s


def parse_key_values(text: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"line {n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_point(text: str):
    try:
        return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())
    except ValueError as exc:
        raise InvalidArgument(f"cannot parse point {text!r}") from exc


def parse_domain(text: str):
    """Domain descriptors.

    ``ball:n:R``, ``disc:R``, ``shell:n:R0:R1``, ``cylinder:R:L`` for solids;
    ``sphere:R`` and ``circle:R`` for the boundaries of a 3-ball and a disc.
    Returns ``(domain, measure_kind)``.
    """
    kind, *args = text.strip().lower().split(":")
    try:
        a = [float(v) for v in args]
    except ValueError as exc:
        raise InvalidArgument(f"cannot parse domain {text!r}") from exc
    if kind == "ball":
        n = int(a[0]) if a else 3
        return Ball(n, a[1] if len(a) > 1 else 1.0), "volume"
    if kind == "disc":
        return Disc(a[0] if a else 1.0), "volume"
    if kind == "shell":
        n, r0, r1 = (int(a[0]), a[1], a[2]) if len(a) == 3 else (3, 0.5, 1.0)
        return Shell(n, r0, r1), "volume"
    if kind == "cylinder":
        return Cylinder(a[0] if a else 1.0, a[1] if len(a) > 1 else 2.0), "volume"
    if kind == "sphere":
        return Ball(3, a[0] if a else 1.0), "surface"
    if kind == "circle":
        return Disc(a[0] if a else 1.0), "curve"
    raise InvalidArgument(f"unknown domain {text!r}")


def domain_grid(text: str, resolution: int):
    """Sampling grid for a domain descriptor."""
    dom, kind = parse_domain(text)
    if kind == "curve":
        return circle_grid(dom.R, resolution)
    if kind == "surface":
        return sphere_grid(dom.R, resolution)
    return build_grid(dom, "volume", resolution)
