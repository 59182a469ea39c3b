"""Result containers and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["Report", "Case", "SuiteResult", "write_report", "dumps", "parse", "fmt"]


@dataclass
class Report:
    """Outcome of a sampled check (audits, membership tests, probes).

    ``metrics`` holds the headline numbers, ``witness`` the data needed to
    replay the decisive sample.
    """

    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    witness: dict | None = None
    notes: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.passed)


@dataclass
class Case:
    name: str
    expected: Any  # float or the string "property"
    actual: float
    tol: float
    passed: bool
    witness: Any = None


@dataclass
class SuiteResult:
    suite: str
    space: str
    seed: int
    cases: list = field(default_factory=list)
    runtime_ms: float = 0.0

    def add(self, name, expected, actual, tol, passed, witness=None) -> Case:
        case = Case(name, expected, float(actual), float(tol), bool(passed), _plain(witness))
        self.cases.append(case)
        return case

    @property
    def passed(self) -> int:
        return sum(c.passed for c in self.cases)

    @property
    def failed(self) -> int:
        return len(self.cases) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def ordered(self) -> "SuiteResult":
        """Copy with cases merged in name order (the deterministic layout)."""
        out = SuiteResult(self.suite, self.space, self.seed, sorted(self.cases, key=lambda c: c.name),
                          self.runtime_ms)
        return out


def fmt(x) -> float | str | None:
    """Round to 12 significant digits; non-finite values become strings."""
    if x is None:
        return None
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def _plain(obj):
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return str(obj)


def _unfmt(x):
    if isinstance(x, str) and x in ("nan", "inf", "-inf"):
        return float(x)
    return x


def to_dict(result: SuiteResult) -> dict:
    return {
        "suite": result.suite,
        "space": result.space,
        "seed": int(result.seed),
        "cases": [
            {
                "name": c.name,
                "expected": fmt(c.expected),
                "actual": fmt(c.actual),
                "tol": fmt(c.tol),
                "pass": bool(c.passed),
                "witness": c.witness,
            }
            for c in result.cases
        ],
        "summary": {"passed": result.passed, "failed": result.failed,
                    "runtime_ms": fmt(result.runtime_ms)},
    }


def dumps(result: SuiteResult, format: str = "json") -> str:
    if format == "json":
        return json.dumps(to_dict(result), indent=2)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "expected", "actual", "tol", "pass"])
        for c in result.cases:
            w.writerow([c.name, fmt(c.expected), fmt(c.actual), fmt(c.tol), str(bool(c.passed)).lower()])
        return buf.getvalue()
    raise ValueError(f"unknown report format {format!r}")


def write_report(result: SuiteResult, path, format: str | None = None) -> None:
    """Write ``result`` to ``path``; the format defaults to the file suffix."""
    path = str(path)
    if format is None:
        format = "csv" if path.endswith(".csv") else "json"
    text = dumps(result, format)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def parse(text: str) -> SuiteResult:
    """Inverse of the JSON form of :func:`dumps`."""
    data = json.loads(text)
    res = SuiteResult(data["suite"], data["space"], int(data["seed"]))
    for c in data["cases"]:
        res.cases.append(Case(c["name"], _unfmt(c["expected"]), float(_unfmt(c["actual"])),
                              float(_unfmt(c["tol"])), bool(c["pass"]), c.get("witness")))
    res.runtime_ms = float(_unfmt(data["summary"]["runtime_ms"]))
    return res
