"""Report rows shared by every stochastic verification.

Each row compares a Monte Carlo estimate (or a quadrature value) against an
independent oracle and, where the source states one, against the published
closed form.  Oracle disagreements fail; published-value disagreements are
recorded with verdict ``NOTE`` and never fail a run.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from ..exceptions import InvalidArgument
from ..grf import CovKernel, kc_admissible
from ..mc import batch_means

N_SIGMA = 3.0
COLUMNS = ("statistic", "order", "paper_value", "oracle_value", "mc_estimate", "mc_stderr",
           "n_samples", "verdict", "paper_verdict", "provenance", "detail")


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v


@dataclass
class MomentReport:
    """One comparison row.

    Attributes
    ----------
    statistic : str
    order : int or None
        Moment order P where it applies.
    paper_value : float or None
        The published closed form, evaluated literally.
    oracle_value : float
        Independent reference (closed form derived here, quadrature, or
        double-quadrature covariance).
    mc_estimate, mc_stderr : float or None
        Batch-means estimate and its standard error.
    gaussian_value : float or None
        The closed form under true Gaussian moments, when distinct.
    verdict : {"PASS", "FAIL", "NOTE", "INFO"}
    paper_verdict : {"agrees", "disagrees", "n/a"}
    provenance : {"mc", "oracle", "paper"}
        Which comparison the verdict rests on.
    """

    statistic: str
    order: int | None = None
    paper_value: float | None = None
    oracle_value: float | None = None
    mc_estimate: float | None = None
    mc_stderr: float | None = None
    n_samples: int = 0
    verdict: str = "INFO"
    paper_verdict: str = "n/a"
    provenance: str = "oracle"
    detail: str = ""
    gaussian_value: float | None = None

    @property
    def closed_form_paper(self):
        return self.paper_value

    @property
    def closed_form_gaussian(self):
        return self.gaussian_value if self.gaussian_value is not None else self.oracle_value

    @property
    def passed(self) -> bool:
        return self.verdict != "FAIL"

    @property
    def z_score(self) -> float:
        if self.mc_estimate is None or self.oracle_value is None or not self.mc_stderr:
            return float("nan")
        return (self.mc_estimate - self.oracle_value) / self.mc_stderr

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in COLUMNS}


def _agree(value, ref, se, k=N_SIGMA, rtol=1e-9, atol=1e-12) -> bool:
    if value is None or ref is None:
        return False
    tol = k * (se or 0.0) + atol + rtol * max(abs(ref), abs(value))
    return abs(value - ref) <= tol


def mc_row(statistic: str, samples, oracle: float, paper: float | None = None,
           order: int | None = None, k: float = N_SIGMA, detail: str = "",
           gaussian: float | None = None, rtol: float = 1e-9) -> MomentReport:
    """Batch-means estimate of ``samples`` compared with ``oracle`` within ``k`` stderr."""
    x = np.asarray(samples, dtype=float)
    mean, se = batch_means(x)
    mean, se = float(mean), float(se)
    ok = _agree(mean, oracle, se, k, rtol)
    pv = "n/a" if paper is None else ("agrees" if _agree(mean, paper, se, k, rtol) else "disagrees")
    return MomentReport(statistic, order, _num(paper), _num(oracle), mean, se, int(x.shape[0]),
                        "PASS" if ok else "FAIL", pv, "mc", detail, _num(gaussian))


def ratio_row(statistic: str, num, den, oracle: float, paper: float | None = None,
              k: float = N_SIGMA, detail: str = "") -> MomentReport:
    """Ratio of two sample means with a delta-method standard error over batches."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    nb = min(100, len(num))
    bn = np.array([b.mean() for b in np.array_split(num, nb)])
    bd = np.array([b.mean() for b in np.array_split(den, nb)])
    a, b = num.mean(), den.mean()
    r = a / b
    cov = np.cov(bn, bd, ddof=1) / nb
    var = cov[0, 0] / b**2 + a * a * cov[1, 1] / b**4 - 2 * a * cov[0, 1] / b**3
    se = math.sqrt(max(var, 0.0))
    ok = _agree(r, oracle, se, k)
    pv = "n/a" if paper is None else ("agrees" if _agree(r, paper, se, k) else "disagrees")
    return MomentReport(statistic, None, _num(paper), _num(oracle), float(r), se, len(num),
                        "PASS" if ok else "FAIL", pv, "mc", detail)


def exact_row(statistic: str, value: float, oracle: float, rtol: float = 1e-6,
              atol: float = 0.0, paper: float | None = None, detail: str = "",
              order: int | None = None) -> MomentReport:
    """Deterministic comparison of a computed value with an oracle."""
    ok = abs(value - oracle) <= atol + rtol * abs(oracle)
    pv = "n/a" if paper is None else (
        "agrees" if abs(value - paper) <= atol + rtol * abs(paper) + 1e-12 else "disagrees")
    return MomentReport(statistic, order, _num(paper), _num(oracle), float(value), 0.0, 0,
                        "PASS" if ok else "FAIL", pv, "oracle", detail)


def check_row(statistic: str, holds: bool, value: float | None = None,
              oracle: float | None = None, detail: str = "") -> MomentReport:
    """Pass/fail row for a boolean property (an inequality, an ordering)."""
    return MomentReport(statistic, None, None, _num(oracle), _num(value), None, 0,
                        "PASS" if holds else "FAIL", "n/a", "oracle", detail)


def note_row(statistic: str, paper: float | None, oracle: float | None,
             value: float | None = None, stderr: float | None = None, n_samples: int = 0,
             agrees: bool | None = None, rtol: float = 1e-6, detail: str = "") -> MomentReport:
    """Published value set against the oracle; recorded, never failing."""
    if agrees is None:
        if paper is None or oracle is None or not np.isfinite(paper):
            agrees = False
        else:
            ref = value if value is not None else oracle
            agrees = _agree(paper, ref, stderr, N_SIGMA, rtol)
    return MomentReport(statistic, None, _num(paper), _num(oracle), _num(value), _num(stderr),
                        n_samples, "NOTE", "agrees" if agrees else "disagrees", "paper", detail)


def info_row(statistic: str, value: float, detail: str = "", oracle: float | None = None) -> MomentReport:
    return MomentReport(statistic, None, None, _num(oracle), float(value), None, 0, "INFO",
                        "n/a", "oracle", detail)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class Report:
    """Ordered collection of rows for one verification id."""

    name: str
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def add(self, *rows: MomentReport) -> "Report":
        self.rows.extend(rows)
        return self

    def extend(self, rows: Iterable[MomentReport]) -> "Report":
        self.rows.extend(rows)
        return self

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if r.verdict == "FAIL"]

    def notes(self) -> list:
        return [r for r in self.rows if r.verdict == "NOTE"]

    def __getitem__(self, statistic: str) -> MomentReport:
        for r in self.rows:
            if r.statistic == statistic:
                return r
        raise KeyError(statistic)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return repr(v)
            return v

        data = {"name": self.name, "passed": self.passed,
                "params": {k: clean(v) for k, v in self.params.items()},
                "rows": [{k: clean(v) for k, v in r.as_dict().items()} for r in self.rows]}
        return json.dumps(data, indent=1, sort_keys=False)


@dataclass(frozen=True)
class PerturbedField:
    """Deterministic base plus ``lam`` times a Gaussian field.

    ``binding`` records where the noise lives: ``"interior"``, ``"boundary"``
    or ``"density"``.
    """

    base: Callable | None
    lam: float
    kernel: CovKernel
    binding: str = "interior"

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidArgument("noise amplitude must be non-negative")
        if self.binding not in ("interior", "boundary", "density"):
            raise InvalidArgument("binding must be interior, boundary or density")

    def base_values(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.base is None:
            return np.zeros(X.shape[0])
        return np.asarray(self.base(X), dtype=float) * np.ones(X.shape[0])

    def check(self):
        adm = kc_admissible(self.kernel)
        if not adm:
            from ..exceptions import InadmissibleKernel
            raise InadmissibleKernel(adm.reason)
