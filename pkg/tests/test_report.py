import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horoduality.report import Report, SuiteResult, dumps, fmt, parse, write_report


def test_empty_suite_json():
    data = json.loads(dumps(SuiteResult("geometry", "e2", 0)))
    assert data["cases"] == []
    assert data["summary"]["passed"] == 0 and data["summary"]["failed"] == 0
    assert set(data) == {"suite", "space", "seed", "cases", "summary"}


def test_case_schema():
    r = SuiteResult("duality", "h2", 42)
    r.add("a", -0.120115, -0.1201145, 2e-3, True, witness=np.array([1.0, 2.0]))
    case = json.loads(dumps(r))["cases"][0]
    assert set(case) == {"name", "expected", "actual", "tol", "pass", "witness"}
    assert case["witness"] == [1.0, 2.0]


def test_fmt_twelve_digits():
    assert fmt(1 / 3) == 0.333333333333
    assert fmt(float("inf")) == "inf" and fmt(float("nan")) == "nan"
    assert fmt("property") == "property"


names = st.text(alphabet="abcdefghij_", min_size=1, max_size=12)
nums = st.floats(allow_nan=False, width=64, min_value=-1e6, max_value=1e6)


@given(st.lists(st.tuples(names, st.one_of(nums, st.just("property")), nums,
                          st.floats(min_value=0, max_value=1), st.booleans()), max_size=8),
       st.integers(0, 2 ** 31))
def test_round_trip(cases, seed):
    r = SuiteResult("isometry", "spd2", seed)
    for c in cases:
        r.add(*c)
    back = parse(dumps(r))
    assert dumps(back) == dumps(r)
    assert [c.name for c in back.cases] == [c.name for c in r.cases]
    for a, b in zip(back.cases, r.cases):
        assert a.actual == fmt(b.actual) and a.passed == b.passed


def test_csv_rows(tmp_path):
    r = SuiteResult("geometry", "e2", 0)
    for i in range(5):
        r.add(f"c{i}", "property", i, 0.1, i % 2 == 0)
    path = tmp_path / "r.csv"
    write_report(r, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "name,expected,actual,tol,pass"
    assert len(lines) == 6
    assert lines[2].endswith(",false")


def test_summary_counts():
    r = SuiteResult("s", "e2", 0)
    r.add("a", 1, 1, 0, True)
    r.add("b", 1, 2, 0, False)
    assert (r.passed, r.failed, r.ok) == (1, 1, False)


def test_ordered_merge():
    r = SuiteResult("s", "e2", 0)
    for n in ("b", "a", "c"):
        r.add(n, 0, 0, 0, True)
    assert [c.name for c in r.ordered().cases] == ["a", "b", "c"]


def test_unknown_format():
    with pytest.raises(ValueError):
        dumps(SuiteResult("s", "e2", 0), "xml")


def test_report_truthiness():
    assert Report("x", True) and not Report("y", False)
