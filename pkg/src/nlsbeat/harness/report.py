"""Machine-checkable verification reports."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List

import numpy as np

__all__ = ["Check", "VerificationReport", "merge_reports"]


def _clean(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


@dataclass
class Check:
    """``observed <comparison> threshold``; comparison is '<=', '>=' or 'in'."""

    name: str
    threshold: Any
    observed: float
    comparison: str = "<="
    exploratory: bool = False
    note: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        if isinstance(self.observed, (int, float, np.floating, np.integer)):
            self.observed = self.observed.item() if hasattr(self.observed, "item") else self.observed
        o = self.observed
        if self.comparison == "<=":
            self.passed = bool(o <= self.threshold)
        elif self.comparison == ">=":
            self.passed = bool(o >= self.threshold)
        elif self.comparison == "in":
            lo, hi = self.threshold
            self.passed = bool(lo <= o <= hi)
        elif self.comparison == "==":
            self.passed = bool(o == self.threshold)
        else:
            raise ValueError(f"unknown comparison {self.comparison!r}")

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = " [exploratory]" if self.exploratory else ""
        return f"{tag} {self.name}: observed={self.observed!r} {self.comparison} {self.threshold!r}{extra}"


@dataclass
class VerificationReport:
    scenario: str
    inputs: Dict[str, Any]
    metrics: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    exploratory_flags: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add(self, *args, **kw) -> Check:
        c = Check(*args, **kw)
        if any(x.name == c.name for x in self.checks):
            raise ValueError(f"duplicate check {c.name!r}")
        self.checks.append(c)
        if c.exploratory and c.name not in self.exploratory_flags:
            self.exploratory_flags.append(c.name)
        return c

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.exploratory)

    def to_dict(self) -> dict:
        return _clean({
            "scenario": self.scenario,
            "inputs": self.inputs,
            "metrics": self.metrics,
            "checks": [asdict(c) for c in self.checks],
            "exploratory_flags": self.exploratory_flags,
            "notes": self.notes,
            "passed": self.passed,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    def summary(self) -> str:
        head = f"{self.scenario}: {'PASS' if self.passed else 'FAIL'}"
        return "\n".join([head] + ["  " + c.line() for c in self.checks])


def merge_reports(reports: List[dict]) -> dict:
    """Combine report dicts into one summary ordered by scenario name."""
    ordered = sorted(reports, key=lambda r: r["scenario"])
    return {
        "scenarios": {r["scenario"]: {
            "passed": r["passed"],
            "failed_checks": [c["name"] for c in r["checks"]
                              if not c["passed"] and not c["exploratory"]],
            "failed_exploratory": [c["name"] for c in r["checks"]
                                   if not c["passed"] and c["exploratory"]],
        } for r in ordered},
        "passed": all(r["passed"] for r in ordered),
    }
