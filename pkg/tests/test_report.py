import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochpot.stochastic import (COLUMNS, Report, check_row, exact_row, info_row, mc_row,
                                 note_row, ratio_row)


def test_mc_row_passes_within_three_se():
    x = np.random.default_rng(0).normal(1.0, 1.0, 10_000)
    row = mc_row("mean", x, 1.0)
    assert row.verdict == "PASS" and row.provenance == "mc"
    assert abs(row.z_score) < 3
    assert mc_row("mean", x, 1.2).verdict == "FAIL"


@pytest.mark.parametrize("paper, verdict", [(1.0, "agrees"), (5.0, "disagrees")])
def test_mc_row_records_paper_verdict_without_failing(paper, verdict):
    x = np.random.default_rng(1).normal(1.0, 0.1, 10_000)
    row = mc_row("mean", x, 1.0, paper=paper)
    assert row.verdict == "PASS"
    assert row.paper_verdict == verdict


def test_zero_variance_rows_use_tolerance():
    row = mc_row("const", np.full(200, 2.0), 2.0)
    assert row.verdict == "PASS"
    assert mc_row("const", np.full(200, 2.0), 2.1).verdict == "FAIL"


def test_ratio_row_delta_method():
    rng = np.random.default_rng(2)
    num, den = rng.normal(2.0, 0.1, 20_000), rng.normal(1.0, 0.1, 20_000)
    assert ratio_row("r", num, den, 2.0).verdict == "PASS"


@pytest.mark.parametrize("value, oracle, rtol, ok", [
    (1.0, 1.0 + 1e-9, 1e-6, True), (1.0, 1.1, 1e-2, False), (0.0, 1e-12, 1e-6, False),
])
def test_exact_row(value, oracle, rtol, ok):
    assert (exact_row("x", value, oracle, rtol).verdict == "PASS") is ok


def test_note_and_info_never_fail():
    rep = Report("demo")
    rep.add(note_row("paper form", 1.0, 2.0))
    rep.add(info_row("diag", 3.0))
    rep.add(check_row("ok", True))
    assert rep.passed and len(rep.notes()) == 1
    rep.add(check_row("bad", False))
    assert not rep.passed and [r.statistic for r in rep.failures()] == ["bad"]


def test_csv_layout_and_float_repr():
    rep = Report("demo")
    rep.add(exact_row("third", 1 / 3, 1 / 3))
    text = rep.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == tuple(COLUMNS)
    rec = dict(zip(rows[0], rows[1]))
    assert float(rec["oracle_value"]) == 1 / 3
    assert rec["provenance"] in {"paper", "oracle", "mc"}
    assert json.loads(rep.to_json())["rows"][0]["statistic"] == "third"


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
def test_csv_round_trips_floats_exactly(values):
    rep = Report("rt")
    for v in values:
        rep.add(info_row("v", v))
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert [float(r["mc_estimate"]) for r in rows] == [float(v) for v in values]
